//! Scenario configuration. Defaults follow the standard parameter table of
//! the simulated two-tier network; every field can be overridden from a
//! flat `key = value` file or from the command line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, dbm_to_watts};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Side of the square deployment area (m).
    pub area_side: f64,
    pub num_sbs: usize,
    pub num_ue: usize,
    pub pathloss_exponent: f64,
    /// Log-normal shadowing standard deviation (dB).
    pub shadowing_stddev: f64,
    pub antenna_constant: f64,
    /// Noise power spectral density (dBm/Hz).
    pub noise_psd: f64,
    /// Bandwidth of one resource block (Hz).
    pub rb_bandwidth: f64,
    pub num_rbs: f64,
    pub p_ue_max: f64,
    pub p_sbs: f64,
    pub p_mbs: f64,
    /// UL association bias applied to the MBS weight.
    pub bias: f64,
    /// Fractional error factor of SIC.
    pub fef: f64,
    pub max_cluster_size: usize,
    pub alpha: f64,
    /// Mean per-UE rate demand (bps).
    pub qos_mean: f64,
    /// Demands are uniform on `qos_mean * [1 - qos_spread, 1 + qos_spread]`.
    pub qos_spread: f64,
    /// Receiver sensitivity (dB, linear SINR floor). `None` disables it.
    pub sensitivity_db: Option<f64>,
    pub rng_seed: u64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            area_side: 500.0,
            num_sbs: 10,
            num_ue: 100,
            pathloss_exponent: 3.76,
            shadowing_stddev: 4.0,
            antenna_constant: 1.0,
            noise_psd: -174.0,
            rb_bandwidth: 180e3,
            num_rbs: 100.0,
            p_ue_max: 23.0,
            p_sbs: 30.0,
            p_mbs: 46.0,
            bias: 0.025,
            fef: 1e-7,
            max_cluster_size: 10,
            alpha: 0.0,
            qos_mean: 1e6,
            qos_spread: 0.5,
            sensitivity_db: None,
            rng_seed: 0,
            max_iterations: 50,
            tolerance: 1e-6,
        }
    }
}

impl NetworkConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        let finite = [
            self.area_side,
            self.pathloss_exponent,
            self.shadowing_stddev,
            self.antenna_constant,
            self.noise_psd,
            self.rb_bandwidth,
            self.num_rbs,
            self.p_ue_max,
            self.p_sbs,
            self.p_mbs,
            self.qos_mean,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all numeric parameters must be finite");
        }
        if !(self.fef >= 0.0 && self.fef <= 1.0) {
            return bad("fef must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.bias) {
            return bad("bias must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1]");
        }
        if self.num_rbs < 1.0 {
            return bad("num_rbs must be at least 1");
        }
        if self.max_cluster_size < 1 {
            return bad("max_cluster_size must be at least 1");
        }
        if self.max_cluster_size > 20 {
            return bad("max_cluster_size above 20 makes case enumeration intractable");
        }
        if self.num_ue < 1 {
            return bad("num_ue must be at least 1");
        }
        if self.area_side <= 0.0 || self.rb_bandwidth <= 0.0 || self.qos_mean < 0.0 {
            return bad("area_side, rb_bandwidth must be positive and qos_mean nonnegative");
        }
        if !(0.0..=1.0).contains(&self.qos_spread) {
            return bad("qos_spread must lie in [0, 1]");
        }
        if self.shadowing_stddev < 0.0 || self.antenna_constant <= 0.0 {
            return bad("shadowing_stddev must be nonnegative and antenna_constant positive");
        }
        if self.tolerance <= 0.0 || self.max_iterations == 0 {
            return bad("tolerance and max_iterations must be positive");
        }
        if let Some(s) = self.sensitivity_db {
            if s.is_nan() {
                return bad("sensitivity_db is NaN");
            }
        }
        Ok(())
    }

    /// `ε` with zero mapped to the smallest positive normal double.
    pub fn effective_fef(&self) -> f64 {
        crate::noma::effective_fef(self.fef)
    }

    pub fn p_ue_max_w(&self) -> f64 {
        dbm_to_watts(self.p_ue_max)
    }

    /// Noise PSD in W/Hz.
    pub fn noise_psd_w(&self) -> f64 {
        dbm_to_watts(self.noise_psd)
    }

    pub fn radio(&self) -> crate::noma::RadioParams {
        crate::noma::RadioParams {
            rb_bandwidth: self.rb_bandwidth,
            noise_psd_w: self.noise_psd_w(),
            p_max_w: self.p_ue_max_w(),
            sensitivity_sinr: self.sensitivity_db.map(db_to_linear).unwrap_or(0.0),
        }
    }

    /// Bias that makes UL association a pure max-gain rule.
    pub fn dude_bias(&self) -> f64 {
        dbm_to_watts(self.p_sbs) / dbm_to_watts(self.p_mbs)
    }
}
