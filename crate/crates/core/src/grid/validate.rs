use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use super::{BranchId, BusId, DcLineId, GenId, Network, UnknownInterconnection, ZoneId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Entity {
    Bus(BusId),
    Branch(BranchId),
    DcLine(DcLineId),
    Generator(GenId),
    Zone(ZoneId),
    Interconnection(String),
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entity::Bus(id) => write!(f, "bus {id}"),
            Entity::Branch(id) => write!(f, "branch {id}"),
            Entity::DcLine(id) => write!(f, "dcline {id}"),
            Entity::Generator(id) => write!(f, "gen {id}"),
            Entity::Zone(id) => write!(f, "zone {id}"),
            Entity::Interconnection(name) => write!(f, "interconnection {name}"),
        }
    }
}

/// A broken structural rule, identified by entity and rule name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub entity: Entity,
    pub rule: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

pub fn validate_network(n: &Network) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |entity: Entity, rule: &'static str| out.push(Violation { entity, rule });

    if !(n.base_mva > 0.0) {
        push(Entity::Interconnection("*".into()), "base_mva > 0");
    }

    let mut seen = HashSet::new();
    for b in &n.buses {
        if !seen.insert(b.id) {
            push(Entity::Bus(b.id), "unique id");
        }
        if !(b.base_kv > 0.0) {
            push(Entity::Bus(b.id), "base_kv > 0");
        }
        if !(b.population_weight >= 0.0) || !b.population_weight.is_finite() {
            push(Entity::Bus(b.id), "population_weight ≥ 0");
        }
        if !n.zones.contains_key(&b.zone) {
            push(Entity::Bus(b.id), "zone exists");
        }
    }
    let bus_ids: HashSet<BusId> = n.buses.iter().map(|b| b.id).collect();

    let mut seen = HashSet::new();
    for br in &n.branches {
        let e = || Entity::Branch(br.id);
        if !seen.insert(br.id) {
            push(e(), "unique id");
        }
        if br.from == br.to {
            push(e(), "from ≠ to");
        }
        if !(br.reactance > 0.0) || !br.reactance.is_finite() {
            push(e(), "reactance > 0");
        }
        if !(br.capacity >= 0.0) {
            push(e(), "capacity ≥ 0");
        }
        if !bus_ids.contains(&br.from) || !bus_ids.contains(&br.to) {
            push(e(), "endpoints exist");
        }
    }

    let mut seen = HashSet::new();
    for dc in &n.dc_lines {
        let e = || Entity::DcLine(dc.id);
        if !seen.insert(dc.id) {
            push(e(), "unique id");
        }
        if !(dc.capacity >= 0.0) {
            push(e(), "capacity ≥ 0");
        }
        if !bus_ids.contains(&dc.from) || !bus_ids.contains(&dc.to) {
            push(e(), "endpoints exist");
        }
    }

    let mut seen = HashSet::new();
    for g in &n.generators {
        let e = || Entity::Generator(g.id);
        if !seen.insert(g.id) {
            push(e(), "unique id");
        }
        if !bus_ids.contains(&g.bus) {
            push(e(), "bus exists");
        }
        if !(g.p_min >= 0.0) {
            push(e(), "p_min ≥ 0");
        }
        if !(g.p_min <= g.p_max) {
            push(e(), "p_min ≤ p_max");
        }
        if !(g.ramp_limit >= 0.0) {
            push(e(), "ramp_limit ≥ 0");
        }
        if !(g.no_load_cost >= 0.0) {
            push(e(), "no_load_cost ≥ 0");
        }
        if !(g.co2_rate >= 0.0) {
            push(e(), "co2_rate ≥ 0");
        }
        if g.cost_curve.check().is_err() {
            push(e(), "cost curve well-formed and convex");
        } else if !close(g.cost_curve.start(), g.p_min) || !close(g.cost_curve.end(), g.p_max) {
            push(e(), "cost curve spans [p_min, p_max]");
        }
        if let Some(h) = &g.heat_rate {
            if !h.is_non_decreasing() || h.points.iter().any(|&(_, y)| y < 0.0) {
                push(e(), "heat rate nonnegative and non-decreasing");
            }
        }
    }

    let mut ics: BTreeSet<&str> = BTreeSet::new();
    for b in &n.buses {
        if let Some(z) = n.zones.get(&b.zone) {
            ics.insert(z.interconnection.as_str());
        }
    }
    for ic in ics {
        if let Ok(comps) = connected_components(n, ic) {
            if comps.len() > 1 {
                push(Entity::Interconnection(ic.to_string()), "connected");
            }
        }
    }
    out
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Partitions one interconnection's buses by AC-branch adjacency.
/// Components are returned sorted by their smallest bus id.
pub fn connected_components(
    n: &Network,
    interconnection: &str,
) -> Result<Vec<BTreeSet<BusId>>, UnknownInterconnection> {
    let members: Vec<BusId> = n
        .buses
        .iter()
        .filter(|b| {
            n.zones
                .get(&b.zone)
                .is_some_and(|z| z.interconnection == interconnection)
        })
        .map(|b| b.id)
        .collect();
    if members.is_empty() && !n.zones.values().any(|z| z.interconnection == interconnection) {
        return Err(UnknownInterconnection(interconnection.to_string()));
    }
    let member_set: HashSet<BusId> = members.iter().copied().collect();
    let mut adjacency: HashMap<BusId, Vec<BusId>> = HashMap::new();
    for br in &n.branches {
        if member_set.contains(&br.from) && member_set.contains(&br.to) {
            adjacency.entry(br.from).or_default().push(br.to);
            adjacency.entry(br.to).or_default().push(br.from);
        }
    }

    let mut sorted = members;
    sorted.sort();
    let mut visited = HashSet::new();
    let mut components = Vec::new();
    for start in sorted {
        if !visited.insert(start) {
            continue;
        }
        let mut comp = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(b) = queue.pop_front() {
            for &next in adjacency.get(&b).map(Vec::as_slice).unwrap_or(&[]) {
                if visited.insert(next) {
                    comp.insert(next);
                    queue.push_back(next);
                }
            }
        }
        components.push(comp);
    }
    Ok(components)
}
