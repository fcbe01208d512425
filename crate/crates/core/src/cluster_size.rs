//! How many users can share one band: spectral-radius feasibility of a
//! set of SINR demands and the closed-form size bounds derived from it.
//!
//! With received powers `p`, every demand holds with equality at the
//! minimal solution `p* = (I − F)^{-1} diag(Γ̄) σ²`, `F = diag(Γ̄) H`, which
//! exists and is positive iff the spectral radius of `F` is below one.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Tolerance used to snap a real-valued size onto a nearby integer before
/// flooring, so that boundary inputs land on the intended side.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SizeRange {
    pub k_min_real: f64,
    pub k_max_real: f64,
    pub k_min: usize,
    pub k_max: usize,
}

impl SizeRange {
    pub fn k_star(&self) -> usize {
        self.k_min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub k_min: usize,
    pub k_max: usize,
    pub k_star: usize,
    pub lambda_f: f64,
    pub feasible: bool,
    pub p_star: Option<Vec<f64>>,
}

/// `H[i][j] = 1` for `i < j`, `0` on the diagonal, `ε` for `i > j`.
pub fn interference_matrix(k: usize, fef: f64) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => 1.0,
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Greater => fef,
    })
}

pub fn spectral_radius(csc: &[f64], fef: f64) -> f64 {
    let k = csc.len();
    if k <= 1 {
        return 0.0;
    }
    if csc.iter().any(|g| !g.is_finite()) {
        return f64::INFINITY;
    }
    let mut f = interference_matrix(k, fef);
    for (i, &g) in csc.iter().enumerate() {
        f.row_mut(i).scale_mut(g);
    }
    f.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn spectral_feasible(csc: &[f64], fef: f64) -> (bool, f64) {
    let r = spectral_radius(csc, fef);
    (r < 1.0, r)
}

fn floor_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP * r.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

fn to_count(x: f64) -> usize {
    if x.is_nan() || x < 0.0 {
        0
    } else if x >= usize::MAX as f64 {
        usize::MAX
    } else {
        x as usize
    }
}

/// Per-member attenuation of the minimal received power along the
/// decoding order for a common demand `g`.
fn ratio(g: f64, fef: f64) -> f64 {
    (1.0 + fef * g) / (1.0 + g)
}

fn check_fef(fef: f64) -> Result<()> {
    if fef >= 1.0 {
        Err(Error::DegenerateFef)
    } else {
        Ok(())
    }
}

/// Real-valued largest size for identical demands `g`: `ln ε / ln q`.
pub fn identical_size_real(g: f64, fef: f64) -> Result<f64> {
    check_fef(fef)?;
    let fef = crate::noma::effective_fef(fef);
    Ok(fef.ln() / ratio(g, fef).ln())
}

/// Exact size range for identical demands (both ends coincide).
pub fn cluster_size_identical(g: f64, fef: f64) -> Result<SizeRange> {
    let x = identical_size_real(g, fef)?;
    let k = to_count(floor_snapped(x));
    Ok(SizeRange { k_min_real: x, k_max_real: x, k_min: k, k_max: k })
}

/// Size bounds for heterogeneous demands: the strictest member gives the
/// lower end, the loosest the upper end. Both ends are floored.
pub fn cluster_size_unconstrained(csc: &[f64], fef: f64) -> Result<SizeRange> {
    check_fef(fef)?;
    let g_max = csc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let g_min = csc.iter().copied().fold(f64::INFINITY, f64::min);
    let lo = identical_size_real(g_max, fef)?;
    let hi = identical_size_real(g_min, fef)?;
    Ok(SizeRange {
        k_min_real: lo,
        k_max_real: hi,
        k_min: to_count(floor_snapped(lo)),
        k_max: to_count(floor_snapped(hi)),
    })
}

/// Largest common demand that `k` members can all meet.
pub fn attainable_sinr(k: usize, fef: f64) -> f64 {
    if k <= 1 {
        return f64::INFINITY;
    }
    let fef = crate::noma::effective_fef(fef);
    let t = (fef.ln() / k as f64).exp();
    (t - 1.0) / (fef - t)
}

/// Minimal received powers meeting every demand with equality, in units of
/// `noise`.
pub fn pareto_powers(csc: &[f64], fef: f64, noise: f64) -> Result<Vec<f64>> {
    let k = csc.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut r = vec![1.0; k];
    for i in 1..k {
        r[i] = r[i - 1] * (1.0 + fef * csc[i - 1]) / csc[i - 1] * csc[i] / (1.0 + csc[i]);
    }
    let den = 1.0 / csc[0] - r[1..].iter().sum::<f64>();
    if den <= 0.0 || !den.is_finite() {
        return Err(Error::InfeasibleCsc(spectral_radius(csc, fef)));
    }
    let x1 = noise / den;
    Ok(r.iter().map(|&ri| ri * x1).collect())
}

/// Closed form of [`pareto_powers`] for `k` identical demands `g`.
pub fn pareto_powers_identical(g: f64, k: usize, fef: f64, noise: f64) -> Result<Vec<f64>> {
    let q = ratio(g, fef);
    let den = q.powi(k as i32) - fef;
    if den <= 0.0 {
        return Err(Error::InfeasibleCsc(spectral_radius(&vec![g; k], fef)));
    }
    let x1 = noise * g * (1.0 - fef) / ((1.0 + g) * den);
    Ok((0..k).map(|i| q.powi(i as i32) * x1).collect())
}

/// Size bounds when every member is limited to `p_max`. `g_best`/`g_worst`
/// are the best and worst channel gains, `noise` the noise power over the
/// band (same units as `p_max * gain`).
pub fn cluster_size_constrained(
    g: f64,
    fef: f64,
    noise: f64,
    p_max: f64,
    g_best: f64,
    g_worst: f64,
) -> Result<SizeRange> {
    check_fef(fef)?;
    let fef = crate::noma::effective_fef(fef);
    let ln_q = ratio(g, fef).ln();
    let a_worst = noise / (p_max * g_worst);
    let a_best = noise / (p_max * g_best);

    let den = (1.0 + fef * g) - (1.0 - fef) * g * a_worst;
    if den <= 0.0 {
        return Err(Error::Outage);
    }
    let k_min_real = 1.0 + (fef * (1.0 + g) / den).ln() / ln_q;
    if floor_snapped(k_min_real) < 1.0 {
        return Err(Error::Outage);
    }
    let k_max_real = ((fef * (1.0 + g) + (1.0 - fef) * g * a_best) / (1.0 + g)).ln() / ln_q;
    Ok(SizeRange {
        k_min_real,
        k_max_real,
        k_min: to_count(floor_snapped(k_min_real)),
        k_max: to_count(ceil_snapped(k_max_real)),
    })
}

pub fn feasibility_report(csc: &[f64], fef: f64, noise: f64) -> Result<FeasibilityReport> {
    let range = cluster_size_unconstrained(csc, fef)?;
    let (feasible, lambda_f) = spectral_feasible(csc, fef);
    let p_star = if feasible { pareto_powers(csc, fef, noise).ok() } else { None };
    Ok(FeasibilityReport {
        k_min: range.k_min,
        k_max: range.k_max,
        k_star: range.k_star(),
        lambda_f,
        feasible,
        p_star,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub fef: f64,
    pub rate: f64,
    pub sinr: f64,
    pub k_real: f64,
    pub k_int: usize,
}

/// Identical-demand size over an (ε, per-user rate) grid for a band of
/// `theta` RBs.
pub fn size_surface(fefs: &[f64], rates: &[f64], theta: f64, rb_bandwidth: f64) -> Result<Vec<SurfacePoint>> {
    let mut out = Vec::with_capacity(fefs.len() * rates.len());
    for &fef in fefs {
        for &rate in rates {
            let sinr = crate::noma::composite_csc(&[rate], 0.0, theta, rb_bandwidth).composite[0];
            let r = cluster_size_identical(sinr, fef)?;
            out.push(SurfacePoint { fef, rate, sinr, k_real: r.k_min_real, k_int: r.k_min });
        }
    }
    Ok(out)
}
