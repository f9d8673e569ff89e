//! Experiment manifests: a flat TOML document whose keys may be overridden
//! from the command line.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, SolverConfig};
use crate::sweep::Axis;

/// Every key is optional; missing keys fall back to the reference setup
/// `kappa = 1, alpha = 2, rho = 10, a = 40, h = 0.02`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub kappa: Option<f64>,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub a: Option<f64>,
    pub h: Option<f64>,
    /// Sets both `tol_profile` and `tol_speed` unless those are given.
    pub tol: Option<f64>,
    pub tol_profile: Option<f64>,
    pub tol_speed: Option<f64>,
    pub max_inner: Option<usize>,
    pub max_speed_iters: Option<usize>,
    pub max_outer: Option<usize>,
    pub relaxation: Option<f64>,
    pub coupling_relaxation: Option<f64>,
    pub axis: Option<Axis>,
    pub values: Option<Vec<f64>>,
    pub workers: Option<usize>,
    pub warm_start: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub a: f64,
    pub h: f64,
    pub solver: SolverConfig,
    pub axis: Option<Axis>,
    pub values: Option<Vec<f64>>,
    pub workers: Option<usize>,
    pub warm_start: bool,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format {
            path: path.into(),
            msg: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Keys set in `over` replace those in `self`.
    pub fn merge(self, over: ConfigFile) -> ConfigFile {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigFile { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            kappa,
            alpha,
            rho,
            a,
            h,
            tol,
            tol_profile,
            tol_speed,
            max_inner,
            max_speed_iters,
            max_outer,
            relaxation,
            coupling_relaxation,
            axis,
            values,
            workers,
            warm_start
        )
    }

    /// Fills defaults. Parameter ranges are left to the solvers.
    pub fn resolve(&self) -> Result<RunConfig> {
        let base = ModelParams::default();
        let d = SolverConfig::default();
        let solver = SolverConfig {
            tol_profile: self.tol_profile.or(self.tol).unwrap_or(d.tol_profile),
            tol_speed: self.tol_speed.or(self.tol).unwrap_or(d.tol_speed),
            max_inner: self.max_inner.unwrap_or(d.max_inner),
            max_speed_iters: self.max_speed_iters.unwrap_or(d.max_speed_iters),
            max_outer: self.max_outer.unwrap_or(d.max_outer),
            relaxation: self.relaxation.unwrap_or(d.relaxation),
            coupling_relaxation: self.coupling_relaxation.unwrap_or(d.coupling_relaxation),
        };
        solver.validate()?;
        if self.workers == Some(0) {
            return Err(Error::Parameter("workers must be at least 1".into()));
        }
        Ok(RunConfig {
            params: ModelParams {
                kappa: self.kappa.unwrap_or(base.kappa),
                alpha: self.alpha.unwrap_or(base.alpha),
                rho: self.rho.unwrap_or(base.rho),
            },
            a: self.a.unwrap_or(40.0),
            h: self.h.unwrap_or(0.02),
            solver,
            axis: self.axis,
            values: self.values.clone(),
            workers: self.workers,
            warm_start: self.warm_start.unwrap_or(false),
        })
    }
}
