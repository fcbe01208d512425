//! Per-cluster power allocation.
//!
//! At the optimum each member either transmits at full power or sits exactly
//! on its SINR floor. The solver enumerates all `2^K` such labelings, builds
//! the weights of each in closed form, discards labelings whose slack
//! constraints fail, and keeps the best utility.

use crate::error::{Error, Result};
use crate::noma::{floored_objective, rates, sinr_with_noise};

/// Relative slack allowed when checking a SINR floor.
pub const CSC_TOL: f64 = 1e-9;
/// Weight overshoot treated as rounding and clipped.
const CLIP_TOL: f64 = 1e-12;

/// One labeling of the members. Bit `i` set means member `i` is held at its
/// SINR floor; clear means full power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KktCase {
    pub mask: u32,
    pub k: usize,
}

impl KktCase {
    pub fn new(mask: u32, k: usize) -> Self {
        Self { mask, k }
    }

    pub fn is_floor(&self, i: usize) -> bool {
        self.mask >> i & 1 == 1
    }

    pub fn full_power(&self) -> Vec<usize> {
        (0..self.k).filter(|&i| !self.is_floor(i)).collect()
    }

    pub fn at_floor(&self) -> Vec<usize> {
        (0..self.k).filter(|&i| self.is_floor(i)).collect()
    }

    pub fn floor_count(&self) -> u32 {
        self.mask.count_ones()
    }

    /// `L` for a full-power member, `M` for a member at its floor.
    pub fn signature(&self) -> String {
        (0..self.k).map(|i| if self.is_floor(i) { 'M' } else { 'L' }).collect()
    }
}

/// Everything the slave problem needs about one cluster.
#[derive(Debug, Clone, Copy)]
pub struct SlaveProblem<'a> {
    /// Descending.
    pub gains: &'a [f64],
    pub csc: &'a [f64],
    /// Normalised noise `ϱ`.
    pub noise: f64,
    pub fef: f64,
    /// `θ W` in Hz.
    pub bandwidth: f64,
    pub alpha: f64,
}

impl SlaveProblem<'_> {
    pub fn k(&self) -> usize {
        self.gains.len()
    }

    pub fn utility(&self, w: &[f64]) -> f64 {
        let s = sinr_with_noise(self.gains, w, self.fef, self.noise);
        floored_objective(&rates(&s, 1.0, self.bandwidth), self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSolution {
    pub weights: Vec<f64>,
    pub case: KktCase,
    pub sinr: Vec<f64>,
    pub rates: Vec<f64>,
    pub utility: f64,
    pub cases_evaluated: usize,
}

/// Weights of one labeling, or `None` when the floor members cannot be
/// solved for (nonpositive denominator).
///
/// Along consecutive floor members `m < i` the received powers `x = ω h`
/// obey `x_i (1 + 1/Γ̄_i) = x_m (ε + 1/Γ̄_m) + (ε − 1) Σ_{m<j<i} h_j`, so
/// every floor member is affine in the first one, which is then fixed by its
/// own floor equation.
pub fn closed_form_weights(case: KktCase, p: &SlaveProblem) -> Option<Vec<f64>> {
    let k = p.k();
    let h = p.gains;
    let g = p.csc;
    let eps = p.fef;
    let mut w = vec![1.0; k];
    let floors = case.at_floor();
    let Some(&first) = floors.first() else {
        return Some(w);
    };

    // x_i = a[i] * x_first + b[i] for floor members.
    let mut a = vec![0.0; k];
    let mut b = vec![0.0; k];
    a[first] = 1.0;
    for pair in floors.windows(2) {
        let (m, i) = (pair[0], pair[1]);
        let between: f64 = h[m + 1..i].iter().sum();
        let d = 1.0 + 1.0 / g[i];
        let r = (eps + 1.0 / g[m]) / d;
        a[i] = r * a[m];
        b[i] = r * b[m] + (eps - 1.0) * between / d;
    }

    let before: f64 = h[..first].iter().sum();
    let mut rhs = eps * before + p.noise;
    let mut den = 1.0 / g[first];
    for j in first + 1..k {
        if case.is_floor(j) {
            den -= a[j];
            rhs += b[j];
        } else {
            rhs += h[j];
        }
    }
    if den <= 0.0 || !den.is_finite() {
        return None;
    }
    let x_first = rhs / den;
    for &i in &floors {
        w[i] = (a[i] * x_first + b[i]) / h[i];
    }
    Some(w)
}

/// Slack constraints of a labeling: floor members need `ω ∈ [0, 1]`,
/// full-power members need their SINR floor. Clips rounding-level
/// overshoot in place.
pub fn check_necessary_conditions(case: KktCase, w: &mut [f64], p: &SlaveProblem) -> bool {
    for i in case.at_floor() {
        let x = w[i];
        if !x.is_finite() || !(-CLIP_TOL..=1.0 + CLIP_TOL).contains(&x) {
            return false;
        }
        w[i] = x.clamp(0.0, 1.0);
        if w[i] == 0.0 {
            return false;
        }
    }
    let s = sinr_with_noise(p.gains, w, p.fef, p.noise);
    s.iter().zip(p.csc).all(|(&got, &need)| got >= need * (1.0 - CSC_TOL))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseRow {
    pub case: KktCase,
    pub weights: Option<Vec<f64>>,
    pub feasible: bool,
    pub utility: Option<f64>,
}

/// Every labeling with its weights, feasibility and utility, in binary
/// counting order.
pub fn case_table(p: &SlaveProblem) -> Vec<CaseRow> {
    let k = p.k();
    (0..1u32 << k)
        .map(|mask| {
            let case = KktCase::new(mask, k);
            match closed_form_weights(case, p) {
                None => CaseRow { case, weights: None, feasible: false, utility: None },
                Some(mut w) => {
                    let feasible = check_necessary_conditions(case, &mut w, p);
                    let utility = feasible.then(|| p.utility(&w));
                    CaseRow { case, weights: Some(w), feasible, utility }
                }
            }
        })
        .collect()
}

/// Best feasible labeling. Ties within a relative `1e-12` go to fewer floor
/// members, then to the earlier labeling.
pub fn solve_slave(p: &SlaveProblem) -> Result<PowerSolution> {
    let k = p.k();
    assert!((1..=24).contains(&k), "cluster size {k} out of range");
    let mut best: Option<(KktCase, Vec<f64>, f64)> = None;
    let mut evaluated = 0;
    for mask in 0..1u32 << k {
        evaluated += 1;
        let case = KktCase::new(mask, k);
        let Some(mut w) = closed_form_weights(case, p) else { continue };
        if !check_necessary_conditions(case, &mut w, p) {
            continue;
        }
        let u = p.utility(&w);
        let better = match &best {
            None => true,
            Some((bc, _, bu)) => {
                let tol = 1e-12 * bu.abs().max(1.0);
                u > bu + tol || (u >= bu - tol && case.floor_count() < bc.floor_count())
            }
        };
        if better {
            best = Some((case, w, u));
        }
    }
    let (case, weights, utility) = best.ok_or(Error::ClusterInfeasible)?;
    let sinr = sinr_with_noise(p.gains, &weights, p.fef, p.noise);
    let rates = rates(&sinr, 1.0, p.bandwidth);
    Ok(PowerSolution { weights, case, sinr, rates, utility, cases_evaluated: evaluated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn problem<'a>(h: &'a [f64], g: &'a [f64], eps: f64, noise: f64) -> SlaveProblem<'a> {
        SlaveProblem { gains: h, csc: g, noise, fef: eps, bandwidth: 1.0, alpha: 0.0 }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn signature_and_sets() {
        let c = KktCase::new(0b101, 3);
        assert_eq!(c.signature(), "MLM");
        assert_eq!(c.at_floor(), vec![0, 2]);
        assert_eq!(c.full_power(), vec![1]);
    }

    #[test]
    fn two_member_rows() {
        let h = [1.0, 0.5];
        let g = [1.0, 1.0];
        let p = problem(&h, &g, 0.1, 0.1);
        assert_eq!(closed_form_weights(KktCase::new(0, 2), &p).unwrap(), vec![1.0, 1.0]);
        let w = closed_form_weights(KktCase::new(0b10, 2), &p).unwrap();
        assert!(close(w[1], 0.4, 1e-12) && w[0] == 1.0);
        let mut w2 = w.clone();
        assert!(check_necessary_conditions(KktCase::new(0b10, 2), &mut w2, &p));
        let g_hi = [4.0, 1.0];
        let mut w3 = w.clone();
        assert!(!check_necessary_conditions(KktCase::new(0b10, 2), &mut w3, &problem(&h, &g_hi, 0.1, 0.1)));
    }

    #[test]
    fn noise_dominated_all_full_power_fails() {
        let h = [1.0, 0.5];
        let g = [1.0, 1.0];
        let p = problem(&h, &g, f64::MIN_POSITIVE, 1e6);
        let mut w = vec![1.0, 1.0];
        assert!(!check_necessary_conditions(KktCase::new(0, 2), &mut w, &p));
    }

    fn a_coef(h: &[f64], g: &[f64], eps: f64, m: usize, i: usize) -> f64 {
        h[m] * (eps + 1.0 / g[m]) / (h[i] * (1.0 + 1.0 / g[i]))
    }

    /// Rows of the size-2 and size-3 tables written out literally.
    fn table_rows(h: &[f64], g: &[f64], e: f64, r: f64) -> Vec<(u32, Vec<f64>)> {
        if h.len() == 2 {
            let a1 = a_coef(h, g, e, 0, 1);
            let d = h[0] / g[0] - a1 * h[1];
            return vec![
                (0b00, vec![1.0, 1.0]),
                (0b10, vec![1.0, g[1] * (h[0] * e + r) / h[1]]),
                (0b01, vec![g[0] * (h[1] + r) / h[0], 1.0]),
                (0b11, vec![r / d, a1 * r / d]),
            ];
        }
        let a12 = a_coef(h, g, e, 0, 1);
        let a23 = a_coef(h, g, e, 1, 2);
        let a13 = a_coef(h, g, e, 0, 2);
        let c2 = (e - 1.0) * h[1] / (h[2] * (1.0 + 1.0 / g[2]));
        let d_mm = h[1] / g[1] - a23 * h[2];
        let d_mlm = h[0] / g[0] - a13 * h[2];
        let d_mml = h[0] / g[0] - a12 * h[1];
        let d_all = h[0] / g[0] - a12 * h[1] - a12 * a23 * h[2];
        vec![
            (0b000, vec![1.0, 1.0, 1.0]),
            (0b100, vec![1.0, 1.0, g[2] * (h[0] * e + h[1] * e + r) / h[2]]),
            (0b010, vec![1.0, g[1] * (h[0] * e + h[2] + r) / h[1], 1.0]),
            (0b110, vec![1.0, (h[0] * e + r) / d_mm, a23 * (h[0] * e + r) / d_mm]),
            (0b001, vec![g[0] * (h[1] + h[2] + r) / h[0], 1.0, 1.0]),
            (
                0b101,
                vec![
                    (c2 * h[2] + h[1] + r) / d_mlm,
                    1.0,
                    a13 * (c2 * h[2] + h[1] + r) / d_mlm + c2,
                ],
            ),
            (0b011, vec![(h[2] + r) / d_mml, a12 * (h[2] + r) / d_mml, 1.0]),
            (0b111, vec![r / d_all, a12 * r / d_all, a12 * a23 * r / d_all]),
        ]
    }

    proptest! {
        #[test]
        fn reproduces_tabulated_rows(
            k in 2usize..=3,
            lg in proptest::collection::vec(-4.0f64..0.0, 3),
            g in proptest::collection::vec(0.05f64..5.0, 3),
            le in -7.0f64..-0.3,
            lr in -5.0f64..-1.0,
        ) {
            let mut h: Vec<f64> = lg[..k].iter().map(|x| 10f64.powf(*x)).collect();
            h.sort_by(|a, b| b.total_cmp(a));
            let g = &g[..k];
            let (e, r) = (10f64.powf(le), 10f64.powf(lr));
            let p = problem(&h, g, e, r);
            for (mask, want) in table_rows(&h, g, e, r) {
                let den_ok = want.iter().all(|w| w.is_finite());
                if let Some(got) = closed_form_weights(KktCase::new(mask, k), &p) {
                    for (x, y) in got.iter().zip(&want) {
                        prop_assert!(close(*x, *y, 1e-10) || (x - y).abs() < 1e-14, "mask {mask:b}: {got:?} vs {want:?}");
                    }
                } else {
                    prop_assert!(!den_ok || want.iter().any(|w| *w <= 0.0));
                }
            }
        }

        #[test]
        fn solution_respects_constraints(
            k in 1usize..=6,
            lg in proptest::collection::vec(-4.0f64..0.0, 6),
            g in proptest::collection::vec(0.01f64..3.0, 6),
            le in -7.0f64..-0.3,
            alpha in prop_oneof![Just(0.0), Just(0.5), Just(1.0)],
        ) {
            let mut h: Vec<f64> = lg[..k].iter().map(|x| 10f64.powf(*x)).collect();
            h.sort_by(|a, b| b.total_cmp(a));
            let p = SlaveProblem { gains: &h, csc: &g[..k], noise: 1e-3, fef: 10f64.powf(le), bandwidth: 1.8e5, alpha };
            if let Ok(s) = solve_slave(&p) {
                prop_assert_eq!(s.cases_evaluated, 1 << k);
                for (i, w) in s.weights.iter().enumerate() {
                    prop_assert!((0.0..=1.0).contains(w));
                    prop_assert!(s.sinr[i] >= g[i] * (1.0 - CSC_TOL));
                }
            }
        }

        #[test]
        fn utility_nonincreasing_in_fef(
            lg in proptest::collection::vec(-3.0f64..0.0, 3),
            g in proptest::collection::vec(0.01f64..2.0, 3),
            le in -7.0f64..-1.0,
        ) {
            let mut h = lg.iter().map(|x| 10f64.powf(*x)).collect::<Vec<_>>();
            h.sort_by(|a, b| b.total_cmp(a));
            let mk = |e: f64| SlaveProblem { gains: &h, csc: &g, noise: 1e-3, fef: e, bandwidth: 1.8e5, alpha: 0.0 };
            let e = 10f64.powf(le);
            if let Ok(hi) = solve_slave(&mk(e * 3.0)) {
                let lo = solve_slave(&mk(e)).unwrap();
                prop_assert!(lo.utility >= hi.utility * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn low_fef_loose_demands_full_power() {
        let h = [1.0, 0.1];
        let g = [0.1, 0.1];
        let p = SlaveProblem { gains: &h, csc: &g, noise: 1e-3, fef: 1e-9, bandwidth: 1.8e5, alpha: 0.0 };
        let s = solve_slave(&p).unwrap();
        assert_eq!(s.case.mask, 0);
        assert_eq!(s.weights, vec![1.0, 1.0]);
    }

    #[test]
    fn fef_sweep_moves_through_cases() {
        let h = [1.0, 0.05];
        let g = [1.0, 1.0];
        let mut seen = Vec::new();
        for i in 0..=60 {
            let e = 10f64.powf(-6.0 + i as f64 * 0.1);
            let p = SlaveProblem { gains: &h, csc: &g, noise: 1e-3, fef: e, bandwidth: 1.8e5, alpha: 0.0 };
            if let Ok(s) = solve_slave(&p) {
                if seen.last() != Some(&s.case.mask) {
                    seen.push(s.case.mask);
                }
            }
        }
        assert_eq!(seen.first(), Some(&0));
        assert!(seen.contains(&0b10), "{seen:?}");
    }

    #[test]
    fn infeasible_cluster_reported() {
        let h = [1.0, 0.5];
        let g = [1e3, 1e3];
        let p = problem(&h, &g, 0.5, 0.1);
        assert_eq!(solve_slave(&p), Err(Error::ClusterInfeasible));
    }

    #[test]
    fn case_table_lists_every_case() {
        let h = [1.0, 0.5, 0.2];
        let g = [0.5, 0.5, 0.5];
        let t = case_table(&problem(&h, &g, 0.01, 0.05));
        assert_eq!(t.len(), 8);
        assert!(t.iter().any(|r| r.feasible));
        assert!(t.iter().all(|r| r.feasible == r.utility.is_some()));
    }
}
