use std::collections::{HashMap, VecDeque};

use super::CalibrationError;
use crate::grid::Network;

/// Raises every spur branch to at least the total rating of the generators
/// behind it.
///
/// The generator side of a spur is the part of the network cut off when
/// the spur is removed (DC lines count as connections) and must contain no
/// demand-participating bus. If both sides qualify the smaller one is used.
pub fn match_spur_capacity(network: &Network) -> Result<Network, CalibrationError> {
    let index = network.bus_index();
    let nb = network.buses.len();
    // adjacency: (neighbor, edge id); AC branches first, then DC lines
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nb];
    let ends = network
        .branches
        .iter()
        .map(|b| (b.from, b.to))
        .chain(network.dc_lines.iter().map(|d| (d.from, d.to)));
    for (e, (from, to)) in ends.enumerate() {
        let (i, j) = (index[&from], index[&to]);
        adj[i].push((j, e));
        adj[j].push((i, e));
    }
    let mut rating: HashMap<usize, f64> = HashMap::new();
    for g in &network.generators {
        *rating.entry(index[&g.bus]).or_default() += g.p_max;
    }

    let mut out = network.clone();
    for (e, branch) in network.branches.iter().enumerate() {
        if !branch.is_spur {
            continue;
        }
        let from_side = reach(&adj, index[&branch.from], e);
        let to = index[&branch.to];
        if from_side[to] {
            return Err(CalibrationError::SpurTopologyError(branch.id));
        }
        let to_side = reach(&adj, to, e);
        let generator_only = |side: &[bool]| {
            network
                .buses
                .iter()
                .enumerate()
                .all(|(i, b)| !side[i] || !b.demand_participation)
        };
        let size = |side: &[bool]| side.iter().filter(|s| **s).count();
        let side = match (generator_only(&from_side), generator_only(&to_side)) {
            (true, true) if size(&from_side) < size(&to_side) => from_side,
            (_, true) => to_side,
            (true, false) => from_side,
            (false, false) => return Err(CalibrationError::SpurTopologyError(branch.id)),
        };
        let behind: f64 = (0..nb)
            .filter(|&i| side[i])
            .map(|i| rating.get(&i).copied().unwrap_or(0.0))
            .sum();
        let cap = &mut out.branches[e].capacity;
        if behind > *cap {
            log::debug!("spur {} raised from {} to {} MW", branch.id, cap, behind);
            *cap = behind;
        }
    }
    Ok(out)
}

fn reach(adj: &[Vec<(usize, usize)>], start: usize, skip_edge: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        for &(j, e) in &adj[i] {
            if e != skip_edge && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen
}
