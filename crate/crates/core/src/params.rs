//! Model constants and solver controls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diffusivity `kappa`, search effectiveness `alpha`, discount rate `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kappa: f64,
    pub alpha: f64,
    pub rho: f64,
}

impl ModelParams {
    pub fn new(kappa: f64, alpha: f64, rho: f64) -> Result<Self> {
        let p = Self { kappa, alpha, rho };
        p.validate()?;
        Ok(p)
    }

    /// Checks positivity and `rho > kappa`.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("alpha", self.alpha),
            ("rho", self.rho),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.rho <= self.kappa {
            return Err(Error::Parameter(format!(
                "rho = {} must exceed kappa = {}",
                self.rho, self.kappa
            )));
        }
        Ok(())
    }

    /// Parameters only required by the pure reaction-diffusion problem.
    pub fn validate_kpp(&self) -> Result<()> {
        for (name, v) in [("kappa", self.kappa), ("alpha", self.alpha)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Warning text when `alpha <= kappa`, where existence theory does not apply.
    pub fn regime_warning(&self) -> Option<String> {
        (self.alpha <= self.kappa).then(|| {
            format!(
                "alpha = {} does not exceed kappa = {}; outside the regime covered by the existence theory",
                self.alpha, self.kappa
            )
        })
    }

    /// Minimal speed of the pure reaction-diffusion front, `2 sqrt(kappa alpha)`.
    pub fn kpp_speed(&self) -> f64 {
        2.0 * (self.kappa * self.alpha).sqrt()
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            alpha: 2.0,
            rho: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Sup-norm tolerance on successive profile iterates.
    pub tol_profile: f64,
    /// Tolerance on `|F(0) - 1/2|`.
    pub tol_speed: f64,
    /// Cap on Newton iterations for one profile solve.
    pub max_inner: usize,
    /// Cap on root-finding iterations in the speed.
    pub max_speed_iters: usize,
    /// Damping of profile updates, in `(0, 1]`.
    pub relaxation: f64,
    /// Cap on outer coupling iterations.
    pub max_outer: usize,
    /// Largest blending weight applied to the benefit function between outer iterations.
    pub coupling_relaxation: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_profile: 1e-8,
            tol_speed: 1e-8,
            max_inner: 500,
            max_speed_iters: 100,
            relaxation: 1.0,
            max_outer: 500,
            coupling_relaxation: 0.3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol_profile", self.tol_profile),
            ("tol_speed", self.tol_speed),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("max_inner", self.max_inner),
            ("max_speed_iters", self.max_speed_iters),
            ("max_outer", self.max_outer),
        ] {
            if v == 0 {
                return Err(Error::Parameter(format!("{name} must be at least 1")));
            }
        }
        for (name, v) in [
            ("relaxation", self.relaxation),
            ("coupling_relaxation", self.coupling_relaxation),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Parameter(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}
