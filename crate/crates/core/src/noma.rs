//! Cluster SINR and rate model under imperfect SIC.
//!
//! Members of a cluster are kept in descending order of channel gain and
//! decoded in that order: member `i` is interfered by every weaker member
//! in full and by every stronger (already cancelled) member through the
//! residual fraction `ε`.

use crate::error::{Error, Result};

/// Map `ε = 0` to the smallest positive normal double.
pub fn effective_fef(fef: f64) -> f64 {
    if fef <= 0.0 {
        f64::MIN_POSITIVE
    } else {
        fef
    }
}

/// Link-level constants shared by every cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    /// Hz per RB.
    pub rb_bandwidth: f64,
    /// W/Hz.
    pub noise_psd_w: f64,
    /// W.
    pub p_max_w: f64,
    /// Linear SINR floor from receiver sensitivity; 0 disables it.
    pub sensitivity_sinr: f64,
}

impl RadioParams {
    /// `ϱ = N0 θ W / P̄u`, noise over the allocated band normalised by the
    /// maximum UE power so that weights `ω` live in `[0, 1]`.
    pub fn normalized_noise(&self, theta: f64) -> Result<f64> {
        if theta <= 0.0 || !theta.is_finite() {
            return Err(Error::ZeroBandwidth);
        }
        Ok(self.noise_psd_w * theta * self.rb_bandwidth / self.p_max_w)
    }

    pub fn csc(&self, qos: &[f64], theta: f64) -> CscVector {
        composite_csc(qos, self.sensitivity_sinr, theta, self.rb_bandwidth)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub bs: usize,
    /// UE indices, descending gain.
    pub members: Vec<usize>,
    pub gains: Vec<f64>,
    pub qos: Vec<f64>,
    /// Bandwidth share in RBs.
    pub theta: f64,
}

impl Cluster {
    /// Builds a cluster and sorts members by descending gain (ties by UE
    /// index).
    pub fn new(bs: usize, members: &[(usize, f64, f64)], theta: f64) -> Self {
        let mut m = members.to_vec();
        m.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Self {
            bs,
            members: m.iter().map(|x| x.0).collect(),
            gains: m.iter().map(|x| x.1).collect(),
            qos: m.iter().map(|x| x.2).collect(),
            theta,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CscVector {
    pub qos_sinr: Vec<f64>,
    pub sensitivity_sinr: f64,
    pub composite: Vec<f64>,
}

/// `Γ̄_i = max(sensitivity, 2^{R̄_i/(θW)} − 1)`.
pub fn composite_csc(qos: &[f64], sensitivity_sinr: f64, theta: f64, rb_bandwidth: f64) -> CscVector {
    let qos_sinr: Vec<f64> = qos
        .iter()
        .map(|&r| (r / (theta * rb_bandwidth) * std::f64::consts::LN_2).exp_m1())
        .collect();
    let composite = qos_sinr.iter().map(|&g| g.max(sensitivity_sinr)).collect();
    CscVector { qos_sinr, sensitivity_sinr, composite }
}

/// SINR of every member for weights `w` and normalised noise `noise`.
pub fn sinr_with_noise(gains: &[f64], w: &[f64], fef: f64, noise: f64) -> Vec<f64> {
    let rx: Vec<f64> = gains.iter().zip(w).map(|(h, w)| h * w).collect();
    let k = rx.len();
    let mut below = vec![0.0; k];
    for i in (0..k.saturating_sub(1)).rev() {
        below[i] = below[i + 1] + rx[i + 1];
    }
    let mut above = 0.0;
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        out.push(rx[i] / (fef * above + below[i] + noise));
        above += rx[i];
    }
    out
}

pub fn sinr(cluster: &Cluster, w: &[f64], fef: f64, radio: &RadioParams) -> Result<Vec<f64>> {
    let noise = radio.normalized_noise(cluster.theta)?;
    Ok(sinr_with_noise(&cluster.gains, w, fef, noise))
}

/// `R = θ W log2(1 + Γ)` in bps.
pub fn rates(sinr: &[f64], theta: f64, rb_bandwidth: f64) -> Vec<f64> {
    sinr.iter().map(|&g| theta * rb_bandwidth * g.ln_1p() / std::f64::consts::LN_2).collect()
}

/// Single-user α-fair utility.
pub fn alpha_fair_utility(rate: f64, alpha: f64) -> Result<f64> {
    if alpha >= 1.0 {
        if rate <= 0.0 {
            return Err(Error::NonPositiveRate);
        }
        return Ok(rate.ln());
    }
    if rate <= 0.0 {
        return Ok(-1.0 / (1.0 - alpha));
    }
    let s = 1.0 - alpha;
    Ok((s * rate.ln()).exp_m1() / s)
}

pub fn alpha_fair_objective(rates: &[f64], alpha: f64) -> Result<f64> {
    rates.iter().map(|&r| alpha_fair_utility(r, alpha)).sum()
}

/// Objective with the 1 bps floor used inside the allocation loop so that a
/// starved member yields a finite value.
pub fn floored_objective(rates: &[f64], alpha: f64) -> f64 {
    rates
        .iter()
        .map(|&r| alpha_fair_utility(r.max(1.0), alpha).expect("floored rate is positive"))
        .sum()
}

/// High-SNR NOMA-over-OMA gain bounds (bps/Hz) for the two decoding orders:
/// `(ascending, descending)`.
pub fn asymptotic_gain_bounds(h_k: f64, h_l: f64) -> (f64, f64) {
    let up = 0.5 * (h_k.log2() - h_l.log2());
    (up, -up)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodingOrder {
    /// The weaker user removes the stronger one (the order used for UL).
    Ascending,
    /// The stronger user removes the weaker one (the DL order).
    Descending,
}

/// Two-user NOMA minus OMA sum rate (bps/Hz) at transmit SNR `rho`.
///
/// Weights maximise the NOMA sum rate subject to the power-disparity
/// constraint with a 0 dB sensitivity floor: the user decoded first must
/// arrive at least as strong as the other. For the ascending order this
/// holds at full power; for the descending order the strong user backs off
/// to `h_l / h_k`.
pub fn simulate_two_user_gain(h_k: f64, h_l: f64, rho: f64, fef: f64, order: DecodingOrder) -> f64 {
    let fef = effective_fef(fef);
    let oma = 0.5 * ((rho * h_k).ln_1p() + (rho * h_l).ln_1p()) / std::f64::consts::LN_2;
    let inv = 1.0 / rho;
    let noma = match order {
        DecodingOrder::Descending => {
            let (wk, wl) = (h_l / h_k, 1.0);
            (wk * h_k / (fef * wl * h_l + inv)).ln_1p() + (wl * h_l / (wk * h_k + inv)).ln_1p()
        }
        DecodingOrder::Ascending => {
            let (wk, wl) = (1.0, 1.0);
            (wl * h_l / (fef * wk * h_k + inv)).ln_1p() + (wk * h_k / (wl * h_l + inv)).ln_1p()
        }
    } / std::f64::consts::LN_2;
    noma - oma
}
