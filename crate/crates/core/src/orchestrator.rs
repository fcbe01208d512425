//! The distributed allocation loop and the baseline schemes.
//!
//! Each iteration the MBS re-splits bandwidth given the spectral
//! efficiencies reported by the clusters, every cluster re-solves its power
//! problem for the new share, and a BS re-forms its clusters whenever the
//! per-user capacities implied by the new shares change.

use std::collections::HashSet;

use crate::bandwidth_alloc::{solve_master, MasterCluster, MasterInstance};
use crate::cluster_formation::form_clusters;
use crate::cluster_size::{cluster_size_constrained, pareto_powers, spectral_feasible};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::noma::{effective_fef, floored_objective, rates, sinr_with_noise, Cluster, RadioParams};
use crate::power_alloc::{solve_slave, KktCase, SlaveProblem, CSC_TOL};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Proposed,
    /// Perfect cancellation (`ε` at the smallest positive double).
    ProposedPerfect,
    /// Allocates as if cancellation were perfect, evaluated at the true `ε`.
    ProposedAgnostic,
    /// Pairs only.
    BasicNoma,
    BasicPerfect,
    BasicAgnostic,
    /// Equal bandwidth per user at full power.
    Oma,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 7] = [
        SchemeKind::Proposed,
        SchemeKind::ProposedPerfect,
        SchemeKind::ProposedAgnostic,
        SchemeKind::BasicNoma,
        SchemeKind::BasicPerfect,
        SchemeKind::BasicAgnostic,
        SchemeKind::Oma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Proposed => "proposed",
            SchemeKind::ProposedPerfect => "proposed_perfect",
            SchemeKind::ProposedAgnostic => "proposed_agnostic",
            SchemeKind::BasicNoma => "basic",
            SchemeKind::BasicPerfect => "basic_perfect",
            SchemeKind::BasicAgnostic => "basic_agnostic",
            SchemeKind::Oma => "oma",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s || (s == "basic_noma" && *k == SchemeKind::BasicNoma))
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }

    fn perfect(self) -> bool {
        matches!(self, SchemeKind::ProposedPerfect | SchemeKind::BasicPerfect)
    }

    fn agnostic(self) -> bool {
        matches!(self, SchemeKind::ProposedAgnostic | SchemeKind::BasicAgnostic)
    }

    /// `ε` the allocation believes in.
    pub fn belief_fef(self, fef: f64) -> f64 {
        if self.perfect() || self.agnostic() {
            f64::MIN_POSITIVE
        } else {
            effective_fef(fef)
        }
    }

    /// `ε` used to score the result.
    pub fn eval_fef(self, fef: f64) -> f64 {
        if self.perfect() {
            f64::MIN_POSITIVE
        } else {
            effective_fef(fef)
        }
    }

    pub fn max_cluster_size(self, kbar: usize) -> usize {
        match self {
            SchemeKind::BasicNoma | SchemeKind::BasicPerfect | SchemeKind::BasicAgnostic => kbar.min(2),
            SchemeKind::Oma => 1,
            _ => kbar,
        }
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Every UE gets this capacity and clusters are never re-formed.
    pub forced_cluster_size: Option<usize>,
    /// Keep the initial equal split instead of running the bandwidth step.
    pub fixed_uniform_bandwidth: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub cluster: Cluster,
    pub capacity: usize,
    pub weights: Vec<f64>,
    /// `None` for outage singletons and OMA users.
    pub case: Option<KktCase>,
    /// SINR under the believed `ε`.
    pub belief_sinr: Vec<f64>,
    pub belief_rates: Vec<f64>,
    /// SINR and rate under the evaluation `ε`.
    pub sinr: Vec<f64>,
    pub rates: Vec<f64>,
    /// No power vector meets this cluster's demands.
    pub outage: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    pub objective: f64,
    pub belief_objective: f64,
    pub theta_sum: f64,
    pub sizes: Vec<usize>,
    pub thetas: Vec<f64>,
    pub reclustered: bool,
    /// Fraction of the bandwidth step that was accepted.
    pub step: f64,
    /// Per BS: power commands sent to UEs.
    pub bs_to_ue: Vec<usize>,
    /// Per BS: utility reports sent to the MBS (zero for the MBS itself).
    pub sbs_to_mbs: Vec<usize>,
    pub invariant_violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationState {
    pub scheme: SchemeKind,
    pub clusters: Vec<ClusterState>,
    /// α-fair objective at the evaluation `ε` (1 bps floor).
    pub objective: f64,
    pub belief_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub reclusterings: usize,
    pub trace: Vec<IterationRecord>,
    pub p_max_w: f64,
    pub budget: f64,
}

impl AllocationState {
    pub fn thetas(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.cluster.theta).collect()
    }

    pub fn sum_rate(&self) -> f64 {
        self.clusters.iter().flat_map(|c| &c.rates).sum()
    }

    /// UEs in clusters flagged as outage.
    pub fn outage_ues(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .clusters
            .iter()
            .filter(|c| c.outage)
            .flat_map(|c| c.cluster.members.iter().copied())
            .collect();
        v.sort_unstable();
        v
    }

    pub fn has_outage(&self) -> bool {
        self.clusters.iter().any(|c| c.outage)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMetrics {
    pub sum_rate: f64,
    /// W.
    pub total_power: f64,
    /// bps/W.
    pub energy_efficiency: f64,
}

pub fn energy_metrics(state: &AllocationState) -> EnergyMetrics {
    let sum_rate = state.sum_rate();
    let total_power: f64 = state.clusters.iter().flat_map(|c| &c.weights).sum::<f64>() * state.p_max_w;
    EnergyMetrics { sum_rate, total_power, energy_efficiency: sum_rate / total_power }
}

struct Ctx<'a> {
    topo: &'a Topology,
    radio: RadioParams,
    belief: f64,
    eval: f64,
    alpha: f64,
    kbar: usize,
    budget: f64,
    forced: Option<usize>,
}

impl Ctx<'_> {
    fn cluster(&self, b: usize, members: &[usize], theta: f64) -> Cluster {
        let m: Vec<(usize, f64, f64)> =
            members.iter().map(|&i| (i, self.topo.gains[b][i], self.topo.qos[i])).collect();
        Cluster::new(b, &m, theta)
    }

    fn score(&self, cluster: Cluster, capacity: usize, weights: Vec<f64>, case: Option<KktCase>, outage: bool) -> ClusterState {
        let (belief_sinr, sinr) = match self.radio.normalized_noise(cluster.theta) {
            Ok(n) => (
                sinr_with_noise(&cluster.gains, &weights, self.belief, n),
                sinr_with_noise(&cluster.gains, &weights, self.eval, n),
            ),
            Err(_) => (vec![0.0; cluster.len()], vec![0.0; cluster.len()]),
        };
        let belief_rates = rates(&belief_sinr, cluster.theta, self.radio.rb_bandwidth);
        let r = rates(&sinr, cluster.theta, self.radio.rb_bandwidth);
        ClusterState { cluster, capacity, weights, case, belief_sinr, belief_rates, sinr, rates: r, outage }
    }

    /// Solves one cluster; an infeasible cluster sheds its weakest member
    /// into a singleton until every piece is feasible or a singleton is
    /// in outage.
    fn solve(&self, cluster: Cluster, capacity: usize) -> Vec<ClusterState> {
        let k = cluster.len();
        let Ok(noise) = self.radio.normalized_noise(cluster.theta) else {
            return vec![self.score(cluster, capacity, vec![1.0; k], None, true)];
        };
        let csc = self.radio.csc(&cluster.qos, cluster.theta).composite;
        let problem = SlaveProblem {
            gains: &cluster.gains,
            csc: &csc,
            noise,
            fef: self.belief,
            bandwidth: cluster.theta * self.radio.rb_bandwidth,
            alpha: self.alpha,
        };
        match solve_slave(&problem) {
            Ok(sol) => vec![self.score(cluster, capacity, sol.weights, Some(sol.case), false)],
            Err(_) if k > 1 => {
                let share = cluster.theta / k as f64;
                let last = k - 1;
                let head = self.cluster(cluster.bs, &cluster.members[..last], share * last as f64);
                let tail = self.cluster(cluster.bs, &cluster.members[last..], share);
                let mut out = self.solve(head, capacity);
                out.extend(self.solve(tail, 1));
                out
            }
            Err(_) => vec![self.score(cluster, capacity, vec![1.0], None, true)],
        }
    }

    /// Largest size `k ≤ K̄` that a UE with per-member share `share` could
    /// join: its demand over `k * share` RBs must still admit `k` members.
    fn capacity(&self, ue: usize, b: usize, share: f64) -> usize {
        if let Some(k) = self.forced {
            return k.max(1);
        }
        let g = self.topo.gains[b][ue];
        let qos = self.topo.qos[ue];
        let mut best = 1;
        for k in 2..=self.kbar {
            let theta = share * k as f64;
            if theta <= 0.0 {
                break;
            }
            let demand = self.radio.csc(&[qos], theta).composite[0];
            let noise = self.radio.noise_psd_w * theta * self.radio.rb_bandwidth;
            let ok = match cluster_size_constrained(demand, self.belief, noise, self.radio.p_max_w, g, g) {
                Ok(r) => r.k_min >= k,
                Err(Error::DegenerateFef) => {
                    spectral_feasible(&vec![demand; k], self.belief).0
                        && demand * noise <= self.radio.p_max_w * g
                }
                Err(_) => false,
            };
            if ok {
                best = k;
            }
        }
        best
    }

    fn capacities(&self, b: usize, ues: &[usize], share: &dyn Fn(usize) -> f64) -> Vec<usize> {
        ues.iter().map(|&i| self.capacity(i, b, share(i))).collect()
    }

    fn form(&self, b: usize, ues: &[usize], caps: &[usize]) -> Vec<(Vec<usize>, usize)> {
        let input: Vec<(usize, f64)> = ues.iter().map(|&i| (i, self.topo.gains[b][i])).collect();
        form_clusters(&input, caps, self.forced.unwrap_or(self.kbar))
            .into_iter()
            .map(|c| (c.members, c.capacity))
            .collect()
    }

    /// Clusters for BS `b`, each at the summed shares of its members. Every
    /// cap `k` up to the largest capacity is tried and the partition with the
    /// best believed utility wins.
    fn partition(&self, b: usize, ues: &[usize], caps: &[usize], share: &dyn Fn(usize) -> f64) -> Vec<ClusterState> {
        let build = |caps: &[usize]| -> Vec<ClusterState> {
            self.form(b, ues, caps)
                .into_iter()
                .flat_map(|(m, cap)| {
                    let theta: f64 = m.iter().map(|&i| share(i)).sum();
                    self.solve(self.cluster(b, &m, theta), cap)
                })
                .collect()
        };
        let top = caps.iter().copied().max().unwrap_or(1);
        if self.forced.is_some() || top <= 1 {
            return build(caps);
        }
        let mut best = build(caps);
        let mut best_obj = self.objectives(&best).1;
        for k in (1..top).rev() {
            let capped: Vec<usize> = caps.iter().map(|&c| c.min(k)).collect();
            let cand = build(&capped);
            let obj = self.objectives(&cand).1;
            if obj > best_obj {
                best = cand;
                best_obj = obj;
            }
        }
        best
    }

    fn objectives(&self, states: &[ClusterState]) -> (f64, f64) {
        let truth: Vec<f64> = states.iter().flat_map(|c| c.rates.iter().copied()).collect();
        let belief: Vec<f64> = states.iter().flat_map(|c| c.belief_rates.iter().copied()).collect();
        (floored_objective(&truth, self.alpha), floored_objective(&belief, self.alpha))
    }

    /// Whether some power vector meets every demand of `c` at share `theta`.
    fn feasible_at(&self, c: &Cluster, theta: f64) -> bool {
        let Ok(noise) = self.radio.normalized_noise(theta) else { return false };
        let csc = self.radio.csc(&c.qos, theta).composite;
        match pareto_powers(&csc, self.belief, noise) {
            Ok(x) => x.iter().zip(&c.gains).all(|(x, h)| *x <= *h),
            Err(_) => false,
        }
    }

    /// Smallest share (to bisection accuracy) at which `c` stays feasible,
    /// never above its current share.
    fn min_feasible_theta(&self, c: &Cluster) -> f64 {
        let mut hi = c.theta;
        if !self.feasible_at(c, hi) {
            return hi;
        }
        let mut lo = hi * 1e-9;
        if self.feasible_at(c, lo) {
            return lo;
        }
        for _ in 0..80 {
            let mid = (lo * hi).sqrt();
            if self.feasible_at(c, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi / lo < 1.0 + 1e-10 {
                break;
            }
        }
        hi
    }

    /// Target shares from the bandwidth problem at the current efficiencies.
    /// Each cluster's floor is the smallest share at which its demands can
    /// still be met (outage clusters keep their current share).
    fn master_target(&self, states: &[ClusterState]) -> Vec<f64> {
        let w = self.radio.rb_bandwidth;
        let clusters: Vec<MasterCluster> = states
            .iter()
            .map(|s| {
                let densities: Vec<f64> =
                    s.belief_sinr.iter().map(|&g| (w * g.ln_1p() / std::f64::consts::LN_2).max(1e-9)).collect();
                let lower = if s.outage { s.cluster.theta } else { self.min_feasible_theta(&s.cluster) };
                MasterCluster { densities, lower }
            })
            .collect();
        let mut inst = MasterInstance { clusters, budget: self.budget };
        match solve_master(&inst, self.alpha) {
            Ok(t) => t,
            Err(_) => {
                let scale = self.budget / inst.lower_sum();
                for c in &mut inst.clusters {
                    c.lower *= scale;
                }
                solve_master(&inst, self.alpha).unwrap_or_else(|_| states.iter().map(|s| s.cluster.theta).collect())
            }
        }
    }

    fn resolve_at(&self, states: &[ClusterState], theta: &[f64]) -> Vec<ClusterState> {
        states
            .iter()
            .zip(theta)
            .flat_map(|(s, &t)| {
                let mut c = s.cluster.clone();
                c.theta = t;
                self.solve(c, s.capacity)
            })
            .collect()
    }
}

fn check_invariants(ctx: &Ctx, states: &[ClusterState]) -> Option<String> {
    let n = ctx.topo.num_ue();
    let mut seen = vec![0usize; n];
    for s in states {
        for &m in &s.cluster.members {
            seen[m] += 1;
            if ctx.topo.association[m] != s.cluster.bs {
                return Some(format!("UE {m} clustered at BS {} but served by {}", s.cluster.bs, ctx.topo.association[m]));
            }
        }
        if s.cluster.len() > s.capacity || s.capacity > ctx.forced.unwrap_or(ctx.kbar).max(1) {
            return Some(format!("cluster of {} exceeds capacity {}", s.cluster.len(), s.capacity));
        }
        if s.weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Some("weight outside [0, 1]".into());
        }
        if !s.outage {
            let csc = ctx.radio.csc(&s.cluster.qos, s.cluster.theta).composite;
            if s.belief_sinr.iter().zip(&csc).any(|(g, d)| *g < d * (1.0 - CSC_TOL)) {
                return Some(format!("SINR floor violated in cluster {:?}", s.cluster.members));
            }
        }
    }
    if let Some(i) = seen.iter().position(|&c| c != 1) {
        return Some(format!("UE {i} appears {} times", seen[i]));
    }
    let total: f64 = states.iter().map(|s| s.cluster.theta).sum();
    if total > ctx.budget * (1.0 + 1e-9) {
        return Some(format!("bandwidth {total} exceeds budget {}", ctx.budget));
    }
    None
}

fn record(ctx: &Ctx, t: usize, states: &[ClusterState], obj: (f64, f64), reclustered: bool, step: f64) -> IterationRecord {
    let nb = ctx.topo.num_bs();
    let mut down = vec![0; nb];
    let mut up = vec![0; nb];
    for s in states {
        down[s.cluster.bs] += s.cluster.len();
        if s.cluster.bs != 0 {
            up[s.cluster.bs] += 1;
        }
    }
    IterationRecord {
        t,
        objective: obj.0,
        belief_objective: obj.1,
        theta_sum: states.iter().map(|s| s.cluster.theta).sum(),
        sizes: states.iter().map(|s| s.cluster.len()).collect(),
        thetas: states.iter().map(|s| s.cluster.theta).collect(),
        reclustered,
        step,
        bs_to_ue: down,
        sbs_to_mbs: up,
        invariant_violation: check_invariants(ctx, states),
    }
}

fn partition_key(states: &[ClusterState]) -> Vec<Vec<usize>> {
    let mut k: Vec<Vec<usize>> = states
        .iter()
        .map(|s| {
            let mut m = s.cluster.members.clone();
            m.sort_unstable();
            m
        })
        .collect();
    k.sort();
    k
}

pub fn run(topo: &Topology, cfg: &NetworkConfig, scheme: SchemeKind) -> Result<AllocationState> {
    run_with(topo, cfg, scheme, &RunOptions::default())
}

pub fn run_with(topo: &Topology, cfg: &NetworkConfig, scheme: SchemeKind, opts: &RunOptions) -> Result<AllocationState> {
    cfg.validate()?;
    if topo.num_ue() == 0 {
        return Err(Error::Config("topology has no UEs".into()));
    }
    let ctx = Ctx {
        topo,
        radio: cfg.radio(),
        belief: scheme.belief_fef(cfg.fef),
        eval: scheme.eval_fef(cfg.fef),
        alpha: cfg.alpha,
        kbar: scheme.max_cluster_size(cfg.max_cluster_size),
        budget: cfg.num_rbs,
        forced: opts.forced_cluster_size,
    };
    if scheme == SchemeKind::Oma {
        return Ok(run_oma(&ctx, scheme));
    }

    let u = topo.num_ue();
    let served: Vec<Vec<usize>> = (0..topo.num_bs()).map(|b| topo.served_by(b)).collect();
    let initial_share = ctx.budget / u as f64;
    let mut caps_used: Vec<Vec<usize>> =
        served.iter().enumerate().map(|(b, ues)| ctx.capacities(b, ues, &|_| initial_share)).collect();
    let groups: Vec<ClusterState> = served
        .iter()
        .enumerate()
        .flat_map(|(b, ues)| ctx.partition(b, ues, &caps_used[b], &|_| initial_share))
        .collect();
    let theta0 = ctx.budget / groups.len() as f64;
    let mut states: Vec<ClusterState> = groups
        .into_iter()
        .flat_map(|s| {
            let mut c = s.cluster;
            c.theta = theta0;
            ctx.solve(c, s.capacity)
        })
        .collect();
    let mut obj = ctx.objectives(&states);
    let mut trace = vec![record(&ctx, 0, &states, obj, false, 0.0)];
    let mut seen_partitions: HashSet<Vec<Vec<usize>>> = HashSet::from([partition_key(&states)]);
    let mut converged = false;
    let mut reclusterings = 0;
    let mut iterations = 0;

    for t in 1..=cfg.max_iterations {
        iterations = t;
        let prev = obj;

        let mut step = 0.0;
        if !opts.fixed_uniform_bandwidth {
            let current: Vec<f64> = states.iter().map(|s| s.cluster.theta).collect();
            let target = ctx.master_target(&states);
            let mut tau = 1.0;
            while tau >= 1.0 / 1024.0 {
                let theta: Vec<f64> = current.iter().zip(&target).map(|(a, b)| a + tau * (b - a)).collect();
                let cand = ctx.resolve_at(&states, &theta);
                let cand_obj = ctx.objectives(&cand);
                if cand_obj.1 >= obj.1 - 1e-12 * obj.1.abs() {
                    states = cand;
                    obj = cand_obj;
                    step = tau;
                    break;
                }
                tau *= 0.5;
            }
        }

        let mut reclustered = false;
        if opts.forced_cluster_size.is_none() {
            let mut share = vec![0.0; u];
            for s in &states {
                for &m in &s.cluster.members {
                    share[m] = s.cluster.theta / s.cluster.len() as f64;
                }
            }
            let mut next: Vec<ClusterState> = Vec::with_capacity(states.len());
            let mut changed = false;
            let mut new_caps = caps_used.clone();
            for (b, ues) in served.iter().enumerate() {
                let own: Vec<ClusterState> = states.iter().filter(|s| s.cluster.bs == b).cloned().collect();
                let caps = ctx.capacities(b, ues, &|i| share[i]);
                if caps == caps_used[b] {
                    next.extend(own);
                    continue;
                }
                new_caps[b] = caps.clone();
                let fresh = ctx.partition(b, ues, &caps, &|i| share[i]);
                // A new partition has to pay for itself at the current shares.
                if ctx.objectives(&fresh).1 >= ctx.objectives(&own).1 {
                    changed = true;
                    next.extend(fresh);
                } else {
                    next.extend(own);
                }
            }
            // Revisiting an earlier partition means the capacities are
            // oscillating; keep the current clusters instead.
            if changed && seen_partitions.insert(partition_key(&next)) {
                states = next;
                obj = ctx.objectives(&states);
                reclustered = true;
                reclusterings += 1;
            }
            caps_used = new_caps;
        }

        trace.push(record(&ctx, t, &states, obj, reclustered, step));
        let rel = (obj.1 - prev.1).abs() / prev.1.abs().max(1e-300);
        if !reclustered && rel < cfg.tolerance {
            converged = true;
            break;
        }
    }

    Ok(AllocationState {
        scheme,
        objective: obj.0,
        belief_objective: obj.1,
        clusters: states,
        iterations,
        converged,
        reclusterings,
        trace,
        p_max_w: ctx.radio.p_max_w,
        budget: ctx.budget,
    })
}

fn run_oma(ctx: &Ctx, scheme: SchemeKind) -> AllocationState {
    let u = ctx.topo.num_ue();
    let share = ctx.budget / u as f64;
    let states: Vec<ClusterState> = (0..u)
        .map(|i| {
            let b = ctx.topo.association[i];
            let c = ctx.cluster(b, &[i], share);
            let mut s = ctx.score(c, 1, vec![1.0], None, false);
            s.outage = s.rates[0] < ctx.topo.qos[i] * (1.0 - CSC_TOL);
            s
        })
        .collect();
    let obj = ctx.objectives(&states);
    let trace = vec![record(ctx, 0, &states, obj, false, 0.0)];
    AllocationState {
        scheme,
        objective: obj.0,
        belief_objective: obj.1,
        clusters: states,
        iterations: 0,
        converged: true,
        reclusterings: 0,
        trace,
        p_max_w: ctx.radio.p_max_w,
        budget: ctx.budget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::generate_topology;

    fn cfg() -> NetworkConfig {
        NetworkConfig { num_sbs: 1, num_ue: 8, num_rbs: 8.0, fef: 1e-3, ..NetworkConfig::default() }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in SchemeKind::ALL {
            assert_eq!(SchemeKind::parse(s.name()).unwrap(), s);
        }
        assert!(matches!(SchemeKind::parse("noma"), Err(Error::Config(_))));
    }

    #[test]
    fn basic_caps_at_pairs() {
        assert_eq!(SchemeKind::BasicNoma.max_cluster_size(10), 2);
        assert_eq!(SchemeKind::Proposed.max_cluster_size(10), 10);
        assert_eq!(SchemeKind::Oma.max_cluster_size(10), 1);
    }

    #[test]
    fn oma_uses_every_ue_at_full_power() {
        let c = cfg();
        let topo = generate_topology(&c).unwrap();
        let st = run(&topo, &c, SchemeKind::Oma).unwrap();
        assert_eq!(st.clusters.len(), 8);
        assert!((st.thetas().iter().sum::<f64>() - 8.0).abs() < 1e-12);
        let e = energy_metrics(&st);
        assert!((e.total_power - 8.0 * c.p_ue_max_w()).abs() < 1e-12);
        assert!((e.energy_efficiency - st.sum_rate() / e.total_power).abs() < 1e-9);
    }

    #[test]
    fn proposed_partitions_every_ue_once() {
        let c = cfg();
        let topo = generate_topology(&c).unwrap();
        let st = run(&topo, &c, SchemeKind::Proposed).unwrap();
        let mut all: Vec<usize> = st.clusters.iter().flat_map(|s| s.cluster.members.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..8).collect::<Vec<_>>());
        assert!(st.trace.iter().all(|r| r.invariant_violation.is_none()));
    }

    #[test]
    fn empty_topology_is_rejected() {
        let c = cfg();
        let mut topo = generate_topology(&c).unwrap();
        topo.ue_positions.clear();
        topo.qos.clear();
        topo.association.clear();
        for g in &mut topo.gains {
            g.clear();
        }
        assert!(run(&topo, &c, SchemeKind::Proposed).is_err());
    }
}
