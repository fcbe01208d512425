//! Monte Carlo sweeps over one network parameter and CSV output.
//!
//! Every (α, grid value, seed) triple gets its own topology, shared by all
//! schemes so they are compared on identical drops. Results are reduced in
//! sorted key order, so the output does not depend on thread scheduling.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::cluster_size::SurfacePoint;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::orchestrator::{run_with, AllocationState, RunOptions, SchemeKind};
use crate::power_alloc::CaseRow;
use crate::topology::generate_topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    Fef,
    Kbar,
    Beta,
    NumSbs,
    NumUe,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] =
        [SweepVariable::Fef, SweepVariable::Kbar, SweepVariable::Beta, SweepVariable::NumSbs, SweepVariable::NumUe];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Fef => "fef",
            SweepVariable::Kbar => "kbar",
            SweepVariable::Beta => "beta",
            SweepVariable::NumSbs => "num_sbs",
            SweepVariable::NumUe => "num_ue",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep variable `{s}` (expected fef, kbar, beta, num_sbs or num_ue)")))
    }

    /// Copy of `cfg` with this variable set to `value`.
    pub fn apply(self, cfg: &NetworkConfig, value: f64) -> Result<NetworkConfig> {
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("{} expects whole numbers, got {v}", self.name())))
            }
        };
        let mut c = cfg.clone();
        match self {
            SweepVariable::Fef => c.fef = value,
            SweepVariable::Kbar => c.max_cluster_size = count(value)?,
            SweepVariable::Beta => c.bias = value,
            SweepVariable::NumSbs => c.num_sbs = count(value)?,
            SweepVariable::NumUe => c.num_ue = count(value)?,
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub alphas: Vec<f64>,
    pub schemes: Vec<SchemeKind>,
    pub seeds: usize,
    pub out: Option<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if self.seeds == 0 {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes selected".into()));
        }
        if self.alphas.is_empty() {
            return Err(Error::Config("no alpha values selected".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::Config(format!("alpha {a} outside [0, 1]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: SchemeKind,
    pub alpha: f64,
    pub grid_value: f64,
    pub seed: u64,
    pub objective: f64,
    /// Feature-scaled objective within the row's α.
    pub normalized: f64,
    pub sum_rate: f64,
    pub outage: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variable: SweepVariable,
    /// Sorted by (α, grid value, seed, scheme).
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    fn select(&self, scheme: SchemeKind, alpha: f64, grid_value: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows
            .iter()
            .filter(move |r| r.scheme == scheme && r.alpha == alpha && r.grid_value == grid_value)
    }

    /// Mean raw objective over seeds, or `None` if the cell is empty.
    pub fn mean_objective(&self, scheme: SchemeKind, alpha: f64, grid_value: f64) -> Option<f64> {
        mean(self.select(scheme, alpha, grid_value).map(|r| r.objective))
    }

    pub fn mean_normalized(&self, scheme: SchemeKind, alpha: f64, grid_value: f64) -> Option<f64> {
        mean(self.select(scheme, alpha, grid_value).map(|r| r.normalized))
    }

    /// Per-seed objectives of one cell, in seed order.
    pub fn objectives(&self, scheme: SchemeKind, alpha: f64, grid_value: f64) -> Vec<f64> {
        self.select(scheme, alpha, grid_value).map(|r| r.objective).collect()
    }
}

fn mean(it: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = it.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

/// `x' = (x - min) / (max - min)`; all-equal (or single) input maps to 0.
pub fn feature_scale(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    values
        .iter()
        .map(|&x| if span > 0.0 { ((x - lo) / span).clamp(0.0, 1.0) } else { 0.0 })
        .collect()
}

/// Runs every scheme on every (α, grid value, seed). Seed `s` uses
/// `cfg.rng_seed + s`. Writes one CSV per α when `spec.out` is set.
pub fn run_sweep(spec: &SweepSpec, cfg: &NetworkConfig) -> Result<SweepResult> {
    spec.validate()?;
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &alpha in &spec.alphas {
        for &g in &spec.grid {
            for s in 0..spec.seeds as u64 {
                jobs.push((alpha, g, s));
            }
        }
    }
    let chunks: Vec<Vec<SweepRow>> = jobs
        .par_iter()
        .map(|&(alpha, g, s)| -> Result<Vec<SweepRow>> {
            let mut c = spec.variable.apply(cfg, g)?;
            c.alpha = alpha;
            c.rng_seed = cfg.rng_seed.wrapping_add(s);
            let topo = generate_topology(&c)?;
            spec.schemes
                .iter()
                .map(|&scheme| {
                    let st = run_with(&topo, &c, scheme, &RunOptions::default())?;
                    Ok(SweepRow {
                        scheme,
                        alpha,
                        grid_value: g,
                        seed: c.rng_seed,
                        objective: st.objective,
                        normalized: 0.0,
                        sum_rate: st.sum_rate(),
                        outage: st.has_outage(),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<SweepRow> = chunks.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.alpha
            .total_cmp(&b.alpha)
            .then(a.grid_value.total_cmp(&b.grid_value))
            .then(a.seed.cmp(&b.seed))
            .then(a.scheme.cmp(&b.scheme))
    });

    for &alpha in &spec.alphas {
        let idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].alpha == alpha).collect();
        let raw: Vec<f64> = idx.iter().map(|&i| rows[i].objective).collect();
        for (&i, n) in idx.iter().zip(feature_scale(&raw)) {
            rows[i].normalized = n;
        }
    }

    let result = SweepResult { variable: spec.variable, rows };
    if let Some(dir) = &spec.out {
        write_sweep(&result, dir)?;
    }
    Ok(result)
}

/// File name of the CSV holding one α of a sweep.
pub fn sweep_file_name(variable: SweepVariable, alpha: f64) -> String {
    format!("{}_alpha{}.csv", variable.name(), alpha)
}

/// One CSV per α with columns
/// `scheme,alpha,grid_value,seed,objective,normalized,sum_rate,outage`.
pub fn write_sweep(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut alphas: Vec<f64> = result.rows.iter().map(|r| r.alpha).collect();
    alphas.dedup();
    let mut paths = Vec::new();
    for alpha in alphas {
        let path = dir.join(sweep_file_name(result.variable, alpha));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["scheme", "alpha", "grid_value", "seed", "objective", "normalized", "sum_rate", "outage"])?;
        for r in result.rows.iter().filter(|r| r.alpha == alpha) {
            w.write_record([
                r.scheme.name().to_string(),
                r.alpha.to_string(),
                r.grid_value.to_string(),
                r.seed.to_string(),
                r.objective.to_string(),
                r.normalized.to_string(),
                r.sum_rate.to_string(),
                u8::from(r.outage).to_string(),
            ])?;
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

/// Per-iteration trace: `t,objective,theta_sum,sizes,thetas` with the
/// per-cluster lists `;`-separated.
pub fn write_trace(state: &AllocationState, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "objective", "theta_sum", "sizes", "thetas"])?;
    for r in &state.trace {
        w.write_record([r.t.to_string(), r.objective.to_string(), r.theta_sum.to_string(), join(&r.sizes), join(&r.thetas)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cases(rows: &[CaseRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["case", "weights", "feasible", "utility"])?;
    for r in rows {
        w.write_record([
            r.case.signature(),
            r.weights.as_deref().map(join).unwrap_or_default(),
            u8::from(r.feasible).to_string(),
            r.utility.map(|u| u.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_surface(points: &[SurfacePoint], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["fef", "rate", "sinr", "k_real", "k_int"])?;
    for p in points {
        w.write_record([p.fef.to_string(), p.rate.to_string(), p.sinr.to_string(), p.k_real.to_string(), p.k_int.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
