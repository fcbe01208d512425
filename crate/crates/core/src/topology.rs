//! Scenario generation: base-station and user placement, composite channel
//! gains and uplink association.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::NetworkConfig;
use crate::error::Result;
use crate::units::dbm_to_watts;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    /// Index 0 is the MBS.
    pub bs_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    /// `gains[b][i]`: linear power gain between BS `b` and UE `i`.
    pub gains: Vec<Vec<f64>>,
    /// Per-UE rate demand (bps).
    pub qos: Vec<f64>,
    /// Serving BS of each UE.
    pub association: Vec<usize>,
}

impl Topology {
    pub fn num_bs(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn num_ue(&self) -> usize {
        self.ue_positions.len()
    }

    /// UEs served by `b`, ascending index.
    pub fn served_by(&self, b: usize) -> Vec<usize> {
        (0..self.num_ue()).filter(|&i| self.association[i] == b).collect()
    }

    /// Gain of each UE towards its serving BS.
    pub fn serving_gain(&self, i: usize) -> f64 {
        self.gains[self.association[i]][i]
    }
}

/// `A * max(d, 1)^(-eta) * 10^(xi/10)`.
pub fn channel_gain(antenna: f64, distance: f64, eta: f64, shadow_db: f64) -> f64 {
    antenna * distance.max(1.0).powf(-eta) * 10f64.powf(shadow_db / 10.0)
}

fn distance(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn generate_topology(cfg: &NetworkConfig) -> Result<Topology> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let side = cfg.area_side;
    let point = |rng: &mut ChaCha8Rng| -> Point { [rng.random::<f64>() * side, rng.random::<f64>() * side] };

    let mut bs_positions = vec![[side / 2.0, side / 2.0]];
    for _ in 0..cfg.num_sbs {
        bs_positions.push(point(&mut rng));
    }
    let ue_positions: Vec<Point> = (0..cfg.num_ue).map(|_| point(&mut rng)).collect();

    let lo = cfg.qos_mean * (1.0 - cfg.qos_spread);
    let hi = cfg.qos_mean * (1.0 + cfg.qos_spread);
    let qos: Vec<f64> = (0..cfg.num_ue)
        .map(|_| if hi > lo { rng.random_range(lo..hi) } else { lo })
        .collect();

    let shadow = Normal::new(0.0, cfg.shadowing_stddev).expect("validated stddev");
    let gains = bs_positions
        .iter()
        .map(|&bp| {
            ue_positions
                .iter()
                .map(|&up| {
                    let xi = shadow.sample(&mut rng);
                    channel_gain(cfg.antenna_constant, distance(bp, up), cfg.pathloss_exponent, xi)
                })
                .collect()
        })
        .collect();

    let mut topo = Topology {
        bs_positions,
        ue_positions,
        gains,
        qos,
        association: Vec::new(),
    };
    topo.association = associate_ul(&topo, cfg);
    Ok(topo)
}

/// Weighted max-gain rule: UE `i` joins `argmax_b w_b h[b][i]` with
/// `w_0 = bias * P_m` and `w_b = P_s` otherwise. Lowest index wins ties.
pub fn associate_ul(topo: &Topology, cfg: &NetworkConfig) -> Vec<usize> {
    let w_mbs = cfg.bias * dbm_to_watts(cfg.p_mbs);
    let w_sbs = dbm_to_watts(cfg.p_sbs);
    (0..topo.num_ue())
        .map(|i| {
            let mut best = 0;
            let mut best_v = w_mbs * topo.gains[0][i];
            for b in 1..topo.num_bs() {
                let v = w_sbs * topo.gains[b][i];
                if v > best_v {
                    best = b;
                    best_v = v;
                }
            }
            best
        })
        .collect()
}
