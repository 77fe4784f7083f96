use super::{FlowVars, GenHour, MpdcopfOptions, MpdcopfProblem, OpfError, RowRef, VarMap};
use crate::grid::{Generator, Network};
use crate::lp::{LinearProgram, Sense, VarId};

/// Assembles the dispatch LP for `network` over `demand[0].len()` hours.
///
/// `demand` is indexed `[bus][hour]` and `availability` `[gen][hour]`, both
/// in network order; availability above `p_max` is capped there.
/// `initial_dispatch` ramp-couples hour zero to a prior state.
pub fn build_problem(
    network: &Network,
    demand: Vec<Vec<f64>>,
    availability: Vec<Vec<f64>>,
    options: MpdcopfOptions,
    initial_dispatch: Option<Vec<f64>>,
) -> Result<MpdcopfProblem, OpfError> {
    let nb = network.buses.len();
    let ng = network.generators.len();
    check_len("demand rows", nb, demand.len())?;
    let hours = demand.first().map(Vec::len).unwrap_or(0);
    if hours == 0 {
        return Err(OpfError::InvalidInput("horizon must be at least one hour".into()));
    }
    for row in &demand {
        check_len("demand hours", hours, row.len())?;
        if row.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(OpfError::InvalidInput("demand must be finite and ≥ 0".into()));
        }
    }
    check_len("availability rows", ng, availability.len())?;
    for row in &availability {
        check_len("availability hours", hours, row.len())?;
        if row.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(OpfError::InvalidInput(
                "availability must be finite and ≥ 0".into(),
            ));
        }
    }
    if let Some(init) = &initial_dispatch {
        check_len("initial dispatch", ng, init.len())?;
    }
    for g in &network.generators {
        if g.cost_curve.check().is_err() {
            return Err(OpfError::UnboundedCost(g.id));
        }
    }
    if options.soft_limits && !(options.penalty >= 0.0) {
        return Err(OpfError::InvalidInput("penalty must be ≥ 0".into()));
    }

    let bus_pos = network.bus_index();
    let refs = network.reference_buses();
    let mut lp = LinearProgram::new();
    let mut map = VarMap {
        gen: vec![Vec::with_capacity(hours); ng],
        theta: vec![Vec::with_capacity(hours); nb],
        flow: vec![Vec::with_capacity(hours); network.branches.len()],
        dc: vec![Vec::with_capacity(hours); network.dc_lines.len()],
        shed: vec![Vec::with_capacity(hours); nb],
        balance: vec![Vec::with_capacity(hours); nb],
        row_refs: Vec::new(),
    };
    let availability: Vec<Vec<f64>> = availability
        .into_iter()
        .zip(&network.generators)
        .map(|(row, g)| row.into_iter().map(|a| a.min(g.p_max)).collect())
        .collect();

    for t in 0..hours {
        // Bus balance terms: (var, coeff) plus the rhs.
        let mut terms: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); nb];
        let mut rhs: Vec<f64> = (0..nb).map(|b| demand[b][t]).collect();

        for (gi, g) in network.generators.iter().enumerate() {
            let bi = bus_pos[&g.bus];
            let avail = availability[gi][t];
            let (floor, segs) = segment_bounds(g, avail);
            let mut vars = Vec::with_capacity(segs.len());
            for (k, (width, cost)) in segs.into_iter().enumerate() {
                if width <= 0.0 {
                    continue;
                }
                let v = lp.add_var(format!("p_{}_{t}_{k}", g.id), cost, 0.0, width);
                terms[bi].push((v, 1.0));
                vars.push(v);
            }
            rhs[bi] -= floor;
            if g.fuel.is_must_run() {
                lp.objective_offset += g.no_load_cost;
            }
            map.gen[gi].push(GenHour {
                floor,
                segments: vars,
            });
        }

        for (bi, bus) in network.buses.iter().enumerate() {
            let is_ref = network
                .interconnection_of(bus.id)
                .and_then(|ic| refs.get(ic))
                .is_some_and(|r| *r == bus.id);
            let (lo, hi) = if is_ref {
                (0.0, 0.0)
            } else {
                (f64::NEG_INFINITY, f64::INFINITY)
            };
            map.theta[bi].push(lp.add_var(format!("theta_{}_{t}", bus.id), 0.0, lo, hi));
        }

        for (li, br) in network.branches.iter().enumerate() {
            let cap = br.capacity;
            let f = lp.add_var(format!("f_{}_{t}", br.id), 0.0, -cap, cap);
            let over = options.soft_limits.then(|| {
                let up = lp.add_var(format!("vp_{}_{t}", br.id), options.penalty, 0.0, f64::INFINITY);
                let down =
                    lp.add_var(format!("vn_{}_{t}", br.id), options.penalty, 0.0, f64::INFINITY);
                (up, down)
            });
            let (fi, ti) = (bus_pos[&br.from], bus_pos[&br.to]);
            let mut total = vec![(f, 1.0)];
            if let Some((up, down)) = over {
                total.push((up, 1.0));
                total.push((down, -1.0));
            }
            for &(v, a) in &total {
                terms[fi].push((v, -a));
                terms[ti].push((v, a));
            }
            let susceptance = network.base_mva / br.reactance;
            let mut def = total;
            def.push((map.theta[fi][t], -susceptance));
            def.push((map.theta[ti][t], susceptance));
            lp.add_row(format!("flow_{}_{t}", br.id), def, Sense::Eq, 0.0);
            map.row_refs.push(RowRef::FlowDefinition {
                branch: br.id,
                hour: t,
            });
            map.flow[li].push(FlowVars { flow: f, over });
        }

        for (di, dc) in network.dc_lines.iter().enumerate() {
            let v = lp.add_var(format!("dc_{}_{t}", dc.id), 0.0, -dc.capacity, dc.capacity);
            terms[bus_pos[&dc.from]].push((v, -1.0));
            terms[bus_pos[&dc.to]].push((v, 1.0));
            map.dc[di].push(v);
        }

        for (bi, bus) in network.buses.iter().enumerate() {
            let shed = match options.load_shed_cost {
                Some(cost) if demand[bi][t] > 0.0 => {
                    let v = lp.add_var(format!("shed_{}_{t}", bus.id), cost, 0.0, demand[bi][t]);
                    terms[bi].push((v, 1.0));
                    Some(v)
                }
                _ => None,
            };
            map.shed[bi].push(shed);
            let row = lp.add_row(
                format!("bal_{}_{t}", bus.id),
                std::mem::take(&mut terms[bi]),
                Sense::Eq,
                rhs[bi],
            );
            map.row_refs.push(RowRef::Balance {
                bus: bus.id,
                hour: t,
            });
            map.balance[bi].push(row);
        }

        for (gi, g) in network.generators.iter().enumerate() {
            if g.ramp_limit >= g.p_max {
                continue;
            }
            let now = &map.gen[gi][t];
            let (prev_terms, prev_level) = if t > 0 {
                let prev = &map.gen[gi][t - 1];
                (prev.segments.clone(), prev.floor)
            } else if let Some(init) = &initial_dispatch {
                (Vec::new(), init[gi])
            } else {
                continue;
            };
            let r = lp.add_var(
                format!("ramp_{}_{t}", g.id),
                0.0,
                -g.ramp_limit,
                g.ramp_limit,
            );
            let mut coeffs: Vec<(VarId, f64)> = now.segments.iter().map(|&v| (v, 1.0)).collect();
            coeffs.extend(prev_terms.iter().map(|&v| (v, -1.0)));
            coeffs.push((r, -1.0));
            lp.add_row(
                format!("ramp_{}_{t}", g.id),
                coeffs,
                Sense::Eq,
                prev_level - now.floor,
            );
            map.row_refs.push(RowRef::Ramp { gen: g.id, hour: t });
        }
    }

    Ok(MpdcopfProblem {
        hours,
        options,
        bus_ids: network.buses.iter().map(|b| b.id).collect(),
        gen_ids: network.generators.iter().map(|g| g.id).collect(),
        branch_ids: network.branches.iter().map(|b| b.id).collect(),
        dc_line_ids: network.dc_lines.iter().map(|d| d.id).collect(),
        branch_capacity: network.branches.iter().map(|b| b.capacity).collect(),
        demand,
        availability,
        initial_dispatch,
        lp,
        map,
    })
}

/// Availability of every generator at its full rating, `[gen][hour]`.
pub fn full_availability(network: &Network, hours: usize) -> Vec<Vec<f64>> {
    network
        .generators
        .iter()
        .map(|g| vec![g.p_max; hours])
        .collect()
}

/// Output floor and `(width, marginal cost)` of each dispatchable segment
/// above it, truncated at `avail`.
///
/// Must-run units sit at `p_min` (or `avail` if lower); all others may go
/// down to zero, with the first cost segment extended to cover `[0, p_min]`.
fn segment_bounds(g: &Generator, avail: f64) -> (f64, Vec<(f64, f64)>) {
    let curve = &g.cost_curve;
    let must_run = g.fuel.is_must_run();
    let floor = if must_run { g.p_min.min(avail) } else { 0.0 };
    let mut segs: Vec<(f64, f64, f64)> = curve
        .segments()
        .map(|s| (s.start, s.end, s.marginal_cost))
        .collect();
    if segs.is_empty() {
        segs.push((curve.start(), curve.end(), 0.0));
    }
    if !must_run {
        segs[0].0 = 0.0;
    }
    let mut out = Vec::with_capacity(segs.len());
    for (start, end, cost) in segs {
        let lo = start.max(floor);
        let hi = end.min(avail);
        out.push(((hi - lo).max(0.0), cost));
    }
    (floor, out)
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), OpfError> {
    if expected == got {
        Ok(())
    } else {
        Err(OpfError::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
