//! Per-BS cluster formation: pick the fewest clusters whose seeds' capacities
//! cover the cell, then grow them one member per round by min-cost
//! assignment on channel-gain proximity.

use crate::assignment;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCount {
    pub count: usize,
    /// Capacities could not cover every UE; the excess become singletons.
    pub shortfall: bool,
}

/// Smallest prefix of the descending capacities that covers `num_ue`.
pub fn cluster_count(sorted_caps: &[usize], num_ue: usize) -> ClusterCount {
    let mut acc = 0usize;
    for (i, &k) in sorted_caps.iter().enumerate() {
        acc += k;
        if acc >= num_ue {
            return ClusterCount { count: i + 1, shortfall: false };
        }
    }
    ClusterCount { count: num_ue, shortfall: true }
}

/// Matching cost of adding a UE with gain `h` to a cluster with gains
/// `members`: nearest stronger gain over `h` plus `h` over nearest weaker
/// gain, each term dropped when no such member exists. Full clusters cost
/// infinity.
pub fn edge_weight(members: &[f64], h: f64, has_room: bool) -> f64 {
    if !has_room {
        return f64::INFINITY;
    }
    let above = members.iter().copied().filter(|&g| g >= h).fold(f64::INFINITY, f64::min);
    let below = members.iter().copied().filter(|&g| g <= h).fold(f64::NEG_INFINITY, f64::max);
    let mut e = 0.0;
    if above.is_finite() {
        e += above / h;
    }
    if below.is_finite() {
        e += h / below;
    }
    e
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormedCluster {
    /// UE ids, descending gain.
    pub members: Vec<usize>,
    pub gains: Vec<f64>,
    pub capacity: usize,
}

impl FormedCluster {
    fn push(&mut self, ue: usize, gain: f64) {
        let pos = self
            .gains
            .iter()
            .zip(&self.members)
            .position(|(&g, &m)| g < gain || (g == gain && m > ue))
            .unwrap_or(self.members.len());
        self.members.insert(pos, ue);
        self.gains.insert(pos, gain);
    }
}

/// Partitions the UEs `(id, gain)` of one BS. `caps[i]` is the capacity of
/// `ues[i]`, clamped to `[1, max_size]`.
pub fn form_clusters(ues: &[(usize, f64)], caps: &[usize], max_size: usize) -> Vec<FormedCluster> {
    assert_eq!(ues.len(), caps.len());
    let n = ues.len();
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    let kap = |i: usize| caps[i].clamp(1, max_size.max(1));
    order.sort_by(|&a, &b| {
        kap(b)
            .cmp(&kap(a))
            .then(ues[b].1.total_cmp(&ues[a].1))
            .then(ues[a].0.cmp(&ues[b].0))
    });
    let sorted: Vec<usize> = order.iter().map(|&i| kap(i)).collect();
    let count = cluster_count(&sorted, n).count;

    let mut clusters: Vec<FormedCluster> = order[..count]
        .iter()
        .map(|&i| FormedCluster { members: vec![ues[i].0], gains: vec![ues[i].1], capacity: kap(i) })
        .collect();
    let mut pending: Vec<usize> = order[count..].to_vec();
    pending.sort_by_key(|&i| ues[i].0);

    while !pending.is_empty() {
        let cost: Vec<Vec<f64>> = clusters
            .iter()
            .map(|c| {
                let room = c.members.len() < c.capacity;
                pending.iter().map(|&i| edge_weight(&c.gains, ues[i].1, room)).collect()
            })
            .collect();
        let a = assignment::solve(&cost);
        let mut taken = vec![false; pending.len()];
        for (ci, col) in a.row_to_col.iter().enumerate() {
            if let Some(j) = *col {
                let (id, g) = ues[pending[j]];
                clusters[ci].push(id, g);
                taken[j] = true;
            }
        }
        if !taken.iter().any(|&t| t) {
            break;
        }
        pending = pending.iter().zip(&taken).filter(|(_, &t)| !t).map(|(&i, _)| i).collect();
    }
    for i in pending {
        clusters.push(FormedCluster { members: vec![ues[i].0], gains: vec![ues[i].1], capacity: kap(i) });
    }
    clusters
}
