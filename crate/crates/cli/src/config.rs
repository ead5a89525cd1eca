use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use pairple::{admissible_theta_range, Error, GeometryConfig64, PairParams64};
use serde::Deserialize;

use crate::CliError;

/// Run configuration as read from JSON. Unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "one")]
    pub gamma1: f64,
    pub mu: f64,
    pub gamma2: Option<f64>,
    pub delta_omega: f64,
    pub rabi1: f64,
    pub rabi2: Option<f64>,
    pub xi: f64,
    pub theta: f64,
    pub phi: f64,
    #[serde(default = "half_pi")]
    pub psi: f64,
    pub r12_lambda: f64,
    pub r_detector_lambda: Option<f64>,
    pub omega0_over_gamma1: Option<f64>,
    pub detuning_min: Option<f64>,
    pub detuning_max: Option<f64>,
    pub detuning_steps: Option<usize>,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
    pub theta_steps: Option<usize>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn half_pi() -> f64 {
    FRAC_PI_2
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn require<T: Copy>(key: &str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| invalid(format!("missing required key `{key}`")))
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("key `{key}` must be positive and finite, got {v}")))
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k + 1 == n { hi } else { lo + step * k as f64 })
        .collect()
}

fn library_error(e: Error) -> CliError {
    // Library validation messages already carry the parameter name.
    invalid(e.to_string())
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        positive("gamma1", self.gamma1)?;
        if let Some(g) = self.gamma2 {
            positive("gamma2", g)?;
        }
        match (self.r_detector_lambda, self.omega0_over_gamma1) {
            (Some(_), None) => {
                return Err(invalid(
                    "key `omega0_over_gamma1` is required when `r_detector_lambda` is set",
                ))
            }
            (None, Some(_)) => {
                return Err(invalid(
                    "key `omega0_over_gamma1` is only meaningful together with `r_detector_lambda`",
                ))
            }
            _ => {}
        }
        if let Some(t) = self.t_max {
            positive("t_max", t)?;
        }
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        for (key, v) in [("detuning_min", self.detuning_min), ("detuning_max", self.detuning_max)] {
            if v.is_some_and(|v| !v.is_finite()) {
                return Err(invalid(format!("key `{key}` must be finite")));
            }
        }
        self.params()?;
        self.geometry()?;
        Ok(())
    }

    /// Pair parameters at zero detuning.
    pub fn params(&self) -> Result<PairParams64, CliError> {
        let mut p = PairParams64::new(self.mu, self.delta_omega, self.rabi1);
        p.gamma1 = self.gamma1;
        p.gamma2 = self.gamma2.unwrap_or(self.mu * self.mu * self.gamma1);
        if let Some(r2) = self.rabi2 {
            p.rabi2 = r2;
        }
        p.validate().map_err(library_error)?;
        Ok(p)
    }

    pub fn geometry(&self) -> Result<GeometryConfig64, CliError> {
        let g = GeometryConfig64::new(self.xi, self.theta, self.phi, self.psi, self.r12_lambda)
            .map_err(library_error)?;
        match (self.r_detector_lambda, self.omega0_over_gamma1) {
            (Some(r), Some(w)) => g.with_detector(r, w).map_err(library_error),
            _ => Ok(g),
        }
    }

    pub fn detuning_grid(&self) -> Result<Vec<f64>, CliError> {
        let lo = require("detuning_min", self.detuning_min)?;
        let hi = require("detuning_max", self.detuning_max)?;
        let n = require("detuning_steps", self.detuning_steps)?;
        if n < 3 {
            return Err(invalid("key `detuning_steps` must be at least 3"));
        }
        if hi <= lo {
            return Err(invalid("key `detuning_max` must exceed `detuning_min`"));
        }
        Ok(linspace(lo, hi, n))
    }

    /// Polarization grid; the bounds default to the admissible range for `xi`.
    pub fn theta_grid(&self) -> Result<Vec<f64>, CliError> {
        let n = require("theta_steps", self.theta_steps)?;
        self.theta_grid_with(n)
    }

    pub fn theta_grid_with(&self, n: usize) -> Result<Vec<f64>, CliError> {
        let (lo, hi) = admissible_theta_range(self.xi);
        let lo = self.theta_min.unwrap_or(lo);
        let hi = self.theta_max.unwrap_or(hi);
        if n == 0 {
            return Err(invalid("key `theta_steps` must be at least 1"));
        }
        if n > 1 && hi <= lo {
            return Err(invalid("key `theta_max` must exceed `theta_min`"));
        }
        let grid = linspace(lo, hi, n);
        for &t in &grid {
            self.geometry()?.with_theta(t).validate().map_err(|e| {
                invalid(format!("keys `theta_min`/`theta_max`: {e}"))
            })?;
        }
        Ok(grid)
    }
}
