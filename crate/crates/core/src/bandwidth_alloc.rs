//! Network-wide bandwidth split across clusters.
//!
//! With per-member spectral efficiencies `ϑ` (bps per RB) fixed, the
//! α-fair objective is separable and concave in the cluster shares `θ`, so
//! the optimum is a water-filling: every unclamped cluster satisfies
//! `Σ_i ϑ_i^{1−α} θ_c^{−α} = ν`, solved exactly by pinning clusters to
//! their floors.

use crate::error::{Error, Result};
use crate::noma::alpha_fair_utility;

#[derive(Debug, Clone, PartialEq)]
pub struct MasterCluster {
    /// bps per RB for each member.
    pub densities: Vec<f64>,
    /// Smallest share meeting every member's demand.
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterInstance {
    pub clusters: Vec<MasterCluster>,
    pub budget: f64,
}

impl MasterInstance {
    /// Lower bounds from demands: `max_i R̄_i / ϑ_i`.
    pub fn from_demands(densities: Vec<Vec<f64>>, demands: &[Vec<f64>], budget: f64) -> Self {
        let clusters = densities
            .into_iter()
            .zip(demands)
            .map(|(d, q)| {
                let lower = d.iter().zip(q).map(|(&v, &r)| r / v).fold(0.0, f64::max);
                MasterCluster { densities: d, lower }
            })
            .collect();
        Self { clusters, budget }
    }

    pub fn lower_sum(&self) -> f64 {
        self.clusters.iter().map(|c| c.lower).sum()
    }

    pub fn objective(&self, theta: &[f64], alpha: f64) -> f64 {
        self.clusters
            .iter()
            .zip(theta)
            .flat_map(|(c, &t)| c.densities.iter().map(move |&v| alpha_fair_utility(t * v, alpha).unwrap_or(f64::NEG_INFINITY)))
            .sum()
    }
}

pub fn solve_master(inst: &MasterInstance, alpha: f64) -> Result<Vec<f64>> {
    let n = inst.clusters.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lo: Vec<f64> = inst.clusters.iter().map(|c| c.lower).collect();
    let required: f64 = lo.iter().sum();
    if required > inst.budget * (1.0 + 1e-12) {
        return Err(Error::BudgetInfeasible { required, available: inst.budget });
    }
    let slack = (inst.budget - required).max(0.0);

    if alpha <= 0.0 {
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for (c, cl) in inst.clusters.iter().enumerate() {
            let v: f64 = cl.densities.iter().sum();
            if v > best_v {
                best = c;
                best_v = v;
            }
        }
        let mut theta = lo;
        theta[best] += slack;
        return Ok(theta);
    }

    // Unclamped clusters get θ_c ∝ S_c^{1/α} with S_c = Σ_i ϑ_i^{1−α}.
    // Clusters whose share falls below their floor are pinned there and
    // the rest re-split; the pinned set only grows, so this ends in ≤ n
    // rounds at the exact optimum.
    let ln_w: Vec<f64> = inst
        .clusters
        .iter()
        .map(|c| c.densities.iter().map(|&v| v.powf(1.0 - alpha)).sum::<f64>().ln() / alpha)
        .collect();
    let mut pinned = vec![false; n];
    loop {
        let free_budget = inst.budget - (0..n).filter(|&c| pinned[c]).map(|c| lo[c]).sum::<f64>();
        let top = (0..n).filter(|&c| !pinned[c]).map(|c| ln_w[c]).fold(f64::NEG_INFINITY, f64::max);
        let norm: f64 = (0..n).filter(|&c| !pinned[c]).map(|c| (ln_w[c] - top).exp()).sum();
        let theta: Vec<f64> = (0..n)
            .map(|c| if pinned[c] { lo[c] } else { free_budget * (ln_w[c] - top).exp() / norm })
            .collect();
        let mut moved = false;
        for c in 0..n {
            if !pinned[c] && theta[c] < lo[c] {
                pinned[c] = true;
                moved = true;
            }
        }
        if !moved || pinned.iter().all(|&p| p) {
            return Ok(if moved { lo } else { theta });
        }
    }
}
