//! Two-phase primal revised simplex for bounded variables.
//!
//! Rows are turned into equalities with one slack per inequality. The start
//! basis uses column singletons that can absorb a row's residual within their
//! bounds and falls back to artificials elsewhere; phase one drives the
//! artificials to zero. The basis inverse is kept as a sparse LU factor plus
//! a product-form eta file that is refactored periodically. Pricing is
//! Dantzig's rule with a Harris two-pass ratio test, switching to Bland's
//! rule after a run of degenerate pivots.

use log::{debug, trace};

use super::lu::LuFactor;
use super::{LinearProgram, LpError, LpSolution, LpSolver, LpStatus, RowId, Sense};

#[derive(Debug, Clone)]
pub struct RevisedSimplex {
    /// Hard cap on pivots across both phases; `None` scales with problem size.
    pub max_iterations: Option<usize>,
    /// Eta vectors accumulated before the basis is refactored.
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots tolerated before Bland's rule kicks in.
    pub degenerate_limit: usize,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
}

impl Default for RevisedSimplex {
    fn default() -> Self {
        RevisedSimplex {
            max_iterations: None,
            refactor_interval: 96,
            degenerate_limit: 40,
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
        }
    }
}

impl LpSolver for RevisedSimplex {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        Engine::new(lp, self)?.run(lp)
    }
}

const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

struct Eta {
    pos: usize,
    pivot: f64,
    /// Off-pivot entries of the entering column, by basis position.
    col: Vec<(usize, f64)>,
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct Engine<'a> {
    opts: &'a RevisedSimplex,
    m: usize,
    n_struct: usize,
    first_artificial: usize,
    cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    pos_of: Vec<usize>,
    lu: LuFactor,
    etas: Vec<Eta>,
    iterations: usize,
    max_iterations: usize,
}

impl<'a> Engine<'a> {
    fn new(lp: &LinearProgram, opts: &'a RevisedSimplex) -> Result<Self, LpError> {
        let m = lp.num_rows();
        let n_struct = lp.num_vars();
        for j in 0..n_struct {
            let (l, u) = (lp.lower[j], lp.upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!(
                    "variable {} has bounds [{l}, {u}]",
                    lp.var_name(super::VarId(j))
                )));
            }
            if !lp.costs[j].is_finite() {
                return Err(LpError::Malformed(format!(
                    "variable {} has non-finite cost",
                    lp.var_name(super::VarId(j))
                )));
            }
        }

        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_struct];
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut b = Vec::with_capacity(m);
        for (i, row) in lp.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!(
                    "row {} has non-finite rhs",
                    lp.row_name(RowId(i))
                )));
            }
            b.push(row.rhs);
            for &(v, a) in &row.coeffs {
                if v.0 >= n_struct || !a.is_finite() {
                    return Err(LpError::Malformed(format!(
                        "row {} has a bad coefficient",
                        lp.row_name(RowId(i))
                    )));
                }
                if a != 0.0 {
                    cols[v.0].push((i, a));
                }
            }
        }
        for col in &mut cols {
            col.sort_by_key(|&(r, _)| r);
            col.dedup_by(|later, earlier| {
                if later.0 == earlier.0 {
                    earlier.1 += later.1;
                    true
                } else {
                    false
                }
            });
            col.retain(|&(_, a)| a != 0.0);
        }
        for (i, row) in lp.rows.iter().enumerate() {
            let (l, u) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => continue,
            };
            cols.push(vec![(i, 1.0)]);
            lower.push(l);
            upper.push(u);
        }
        let first_artificial = cols.len();
        let n_total = first_artificial + m;

        let mut x = vec![0.0; first_artificial];
        let mut state = vec![State::Lower; first_artificial];
        for j in 0..first_artificial {
            let (l, u) = (lower[j], upper[j]);
            let (v, s) = match (l.is_finite(), u.is_finite()) {
                (true, true) if u.abs() < l.abs() => (u, State::Upper),
                (true, _) => (l, State::Lower),
                (false, true) => (u, State::Upper),
                (false, false) => (0.0, State::Zero),
            };
            x[j] = v;
            state[j] = s;
        }

        // Row residuals with every non-artificial column at its start value.
        let mut residual = b.clone();
        for (j, col) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                for &(r, a) in col {
                    residual[r] -= a * x[j];
                }
            }
        }

        let mut singletons: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (j, col) in cols.iter().enumerate() {
            if col.len() == 1 && lower[j] < upper[j] {
                singletons[col[0].0].push(j);
            }
        }

        let mut basis = vec![usize::MAX; m];
        for i in 0..m {
            let tol = opts.feasibility_tol * (1.0 + b[i].abs());
            for &j in singletons[i].iter().rev() {
                let a = cols[j][0].1;
                let value = x[j] + residual[i] / a;
                if value >= lower[j] - tol && value <= upper[j] + tol {
                    x[j] = value.clamp(lower[j], upper[j]);
                    state[j] = State::Basic;
                    basis[i] = j;
                    break;
                }
            }
        }

        for i in 0..m {
            let j = first_artificial + i;
            if basis[i] == usize::MAX {
                let sign = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
                cols.push(vec![(i, sign)]);
                lower.push(0.0);
                upper.push(f64::INFINITY);
                x.push(residual[i].abs());
                state.push(State::Basic);
                basis[i] = j;
            } else {
                cols.push(vec![(i, 1.0)]);
                lower.push(0.0);
                upper.push(0.0);
                x.push(0.0);
                state.push(State::Lower);
            }
        }
        let mut pos_of = vec![usize::MAX; n_total];
        for (p, &j) in basis.iter().enumerate() {
            pos_of[j] = p;
        }

        let max_iterations = opts
            .max_iterations
            .unwrap_or(50 * (m + n_total) + 10_000);
        let refs: Vec<&[(usize, f64)]> = basis.iter().map(|&j| cols[j].as_slice()).collect();
        let lu = LuFactor::factor(m, &refs)
            .map_err(|_| LpError::NumericalFailure("singular start basis".into()))?;

        Ok(Engine {
            opts,
            m,
            n_struct,
            first_artificial,
            cols,
            b,
            lower,
            upper,
            x,
            state,
            basis,
            pos_of,
            lu,
            etas: Vec::new(),
            iterations: 0,
            max_iterations,
        })
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let n_total = self.cols.len();
        let art_sum: f64 = self.x[self.first_artificial..].iter().sum();
        let b_scale = self.b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));

        if art_sum > 0.0 {
            let mut phase1 = vec![0.0; n_total];
            for c in &mut phase1[self.first_artificial..] {
                *c = 1.0;
            }
            debug!("phase one: {} rows, artificial sum {art_sum}", self.m);
            self.iterate(&phase1)?;
            self.refactor()?;
            let infeasibility: f64 = self.x[self.first_artificial..].iter().sum();
            if infeasibility > 1e-7 * b_scale {
                let rows: Vec<RowId> = (0..self.m)
                    .filter(|&i| self.x[self.first_artificial + i] > 1e-9 * b_scale)
                    .map(RowId)
                    .collect();
                debug!("infeasible: residual {infeasibility} on {} rows", rows.len());
                let x = self.x[..self.n_struct].to_vec();
                return Ok(LpSolution {
                    status: LpStatus::Infeasible { rows },
                    objective: lp.objective(&x),
                    x,
                    row_duals: vec![0.0; self.m],
                    reduced_costs: vec![0.0; self.n_struct],
                    iterations: self.iterations,
                });
            }
        }
        for j in self.first_artificial..n_total {
            self.upper[j] = 0.0;
            if self.state[j] != State::Basic {
                self.x[j] = 0.0;
                self.state[j] = State::Lower;
            }
        }

        let mut cost = vec![0.0; n_total];
        cost[..self.n_struct].copy_from_slice(&lp.costs);
        let outcome = self.iterate(&cost)?;
        self.refactor()?;
        let x: Vec<f64> = self.x[..self.n_struct].to_vec();
        let y = self.duals(&cost);
        let reduced_costs: Vec<f64> = (0..self.n_struct)
            .map(|j| self.reduced_cost(j, &cost, &y))
            .collect();
        let status = match outcome {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Unbounded => LpStatus::Unbounded,
        };
        debug!(
            "simplex finished: {:?} after {} iterations",
            status, self.iterations
        );
        Ok(LpSolution {
            status,
            objective: lp.objective(&x),
            x,
            row_duals: y,
            reduced_costs,
            iterations: self.iterations,
        })
    }

    fn iterate(&mut self, cost: &[f64]) -> Result<Outcome, LpError> {
        let cost_scale = cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        let opt_tol = self.opts.optimality_tol * cost_scale;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::IterationLimit(self.max_iterations));
            }
            if self.etas.len() >= self.opts.refactor_interval {
                self.refactor()?;
            }
            let y = self.duals(cost);

            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.cols.len() {
                let s = self.state[j];
                if s == State::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.reduced_cost(j, cost, &y);
                let eligible = match s {
                    State::Lower => d < -opt_tol,
                    State::Upper => d > opt_tol,
                    State::Zero => d.abs() > opt_tol,
                    State::Basic => false,
                };
                if !eligible {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| d.abs() > best.abs()) {
                    entering = Some((j, d));
                }
            }
            let Some((q, d_q)) = entering else {
                return Ok(Outcome::Optimal);
            };
            self.iterations += 1;

            let alpha = self.ftran(q);
            let dir = if d_q < 0.0 { 1.0 } else { -1.0 };
            let step = self.ratio_test(q, dir, &alpha, bland);
            let Some(step) = step else {
                return Ok(Outcome::Unbounded);
            };
            trace!(
                "iter {}: enter {q} dir {dir} theta {} leave {:?}",
                self.iterations,
                step.theta,
                step.leave
            );

            if step.theta <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > self.opts.degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }

            let theta = step.theta;
            self.x[q] += dir * theta;
            for (p, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.basis[p]] -= dir * a * theta;
                }
            }
            match step.leave {
                None => {
                    if dir > 0.0 {
                        self.x[q] = self.upper[q];
                        self.state[q] = State::Upper;
                    } else {
                        self.x[q] = self.lower[q];
                        self.state[q] = State::Lower;
                    }
                }
                Some((p, to_upper)) => {
                    let leaving = self.basis[p];
                    if to_upper {
                        self.x[leaving] = self.upper[leaving];
                        self.state[leaving] = State::Upper;
                    } else {
                        self.x[leaving] = self.lower[leaving];
                        self.state[leaving] = State::Lower;
                    }
                    self.pos_of[leaving] = usize::MAX;
                    self.basis[p] = q;
                    self.pos_of[q] = p;
                    self.state[q] = State::Basic;
                    let col = alpha
                        .iter()
                        .enumerate()
                        .filter(|&(i, &a)| i != p && a != 0.0)
                        .map(|(i, &a)| (i, a))
                        .collect();
                    self.etas.push(Eta {
                        pos: p,
                        pivot: alpha[p],
                        col,
                    });
                }
            }
        }
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> Option<Step> {
        let tol = self.opts.feasibility_tol;
        let range = self.upper[q] - self.lower[q];

        // Distance each basic variable may travel and its rate of change.
        let candidates = alpha.iter().enumerate().filter_map(|(p, &a)| {
            if a.abs() <= PIVOT_TOL {
                return None;
            }
            let j = self.basis[p];
            let rate = -dir * a;
            if rate < 0.0 {
                let l = self.lower[j];
                l.is_finite()
                    .then(|| ((self.x[j] - l).max(0.0), -rate, p, false))
            } else {
                let u = self.upper[j];
                u.is_finite()
                    .then(|| ((u - self.x[j]).max(0.0), rate, p, true))
            }
        });

        if bland {
            let mut best: Option<(f64, usize, usize, bool)> = None;
            for (dist, rate, p, to_upper) in candidates {
                let ratio = dist / rate;
                let j = self.basis[p];
                let better = match best {
                    None => true,
                    Some((r, _, bj, _)) => {
                        ratio < r - 1e-12 || (ratio <= r + 1e-12 && j < bj)
                    }
                };
                if better {
                    best = Some((ratio, p, j, to_upper));
                }
            }
            return match best {
                Some((ratio, _, _, _)) if range <= ratio => Some(Step::flip(range)),
                Some((ratio, p, _, to_upper)) => Some(Step {
                    theta: ratio,
                    leave: Some((p, to_upper)),
                }),
                None if range.is_finite() => Some(Step::flip(range)),
                None => None,
            };
        }

        let candidates: Vec<_> = candidates.collect();
        let theta_max = candidates
            .iter()
            .map(|&(dist, rate, _, _)| (dist + tol) / rate)
            .fold(f64::INFINITY, f64::min);
        if range <= theta_max {
            return range.is_finite().then(|| Step::flip(range));
        }
        let mut best: Option<(f64, f64, usize, bool)> = None;
        for &(dist, rate, p, to_upper) in &candidates {
            let ratio = dist / rate;
            if ratio > theta_max {
                continue;
            }
            let better = match best {
                None => true,
                Some((_, best_rate, bp, _)) => {
                    rate > best_rate || (rate == best_rate && self.basis[p] < self.basis[bp])
                }
            };
            if better {
                best = Some((ratio, rate, p, to_upper));
            }
        }
        best.map(|(ratio, _, p, to_upper)| Step {
            theta: ratio.max(0.0),
            leave: Some((p, to_upper)),
        })
    }

    fn reduced_cost(&self, j: usize, cost: &[f64], y: &[f64]) -> f64 {
        cost[j] - self.cols[j].iter().map(|&(r, a)| a * y[r]).sum::<f64>()
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let mut c: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for &(i, a) in &eta.col {
                s -= a * c[i];
            }
            c[eta.pos] = s / eta.pivot;
        }
        self.lu.solve_transpose(&c)
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let mut rhs = vec![0.0; self.m];
        for &(r, a) in &self.cols[j] {
            rhs[r] = a;
        }
        self.ftran_dense(rhs)
    }

    fn ftran_dense(&self, rhs: Vec<f64>) -> Vec<f64> {
        let mut z = self.lu.solve(rhs);
        for eta in &self.etas {
            let zp = z[eta.pos];
            if zp == 0.0 {
                continue;
            }
            let zp = zp / eta.pivot;
            z[eta.pos] = zp;
            for &(i, a) in &eta.col {
                z[i] -= a * zp;
            }
        }
        z
    }

    /// Refactors the current basis and recomputes basic values from scratch.
    fn refactor(&mut self) -> Result<(), LpError> {
        let refs: Vec<&[(usize, f64)]> =
            self.basis.iter().map(|&j| self.cols[j].as_slice()).collect();
        self.lu = LuFactor::factor(self.m, &refs).map_err(|s| {
            LpError::NumericalFailure(format!(
                "singular basis at position {} after {} iterations",
                s.position, self.iterations
            ))
        })?;
        self.etas.clear();
        let mut rhs = self.b.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                for &(r, a) in col {
                    rhs[r] -= a * self.x[j];
                }
            }
        }
        let xb = self.lu.solve(rhs);
        for (p, v) in xb.into_iter().enumerate() {
            self.x[self.basis[p]] = v;
        }
        Ok(())
    }
}

#[derive(Debug)]
struct Step {
    theta: f64,
    /// Basis position leaving and whether it leaves at its upper bound.
    leave: Option<(usize, bool)>,
}

impl Step {
    fn flip(range: f64) -> Self {
        Step {
            theta: range,
            leave: None,
        }
    }
}
