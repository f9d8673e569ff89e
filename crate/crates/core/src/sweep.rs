//! Parameter sweeps, trend checks and the comparison with the pure KPP front.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{central_first_derivative, Grid};
use crate::kpp::solve_kpp;
use crate::params::{ModelParams, SolverConfig};
use crate::wave::{solve_coupled_with, CoupledSolution, SolveOptions, WarmStart};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    A,
    Alpha,
    Rho,
    Kappa,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::A => "a",
            Axis::Alpha => "alpha",
            Axis::Rho => "rho",
            Axis::Kappa => "kappa",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Axis::A),
            "alpha" => Ok(Axis::Alpha),
            "rho" => Ok(Axis::Rho),
            "kappa" => Ok(Axis::Kappa),
            _ => Err(Error::Parameter(format!(
                "unknown axis {s:?}, expected a, alpha, rho or kappa"
            ))),
        }
    }
}

/// Result columns a sweep can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    C,
    X0,
    Gamma,
    QMinus,
    QPlus,
    SpeedRelationResidual,
    DecayRateEstimate,
    DecayRateTheory,
    DirichletEnergy,
    Iterations,
    Residual,
    WallTime,
}

impl Output {
    pub const ALL: [Output; 12] = [
        Output::C,
        Output::X0,
        Output::Gamma,
        Output::QMinus,
        Output::QPlus,
        Output::SpeedRelationResidual,
        Output::DecayRateEstimate,
        Output::DecayRateTheory,
        Output::DirichletEnergy,
        Output::Iterations,
        Output::Residual,
        Output::WallTime,
    ];

    /// Everything except wall time, so that files are reproducible.
    pub const DEFAULT: [Output; 11] = [
        Output::C,
        Output::X0,
        Output::Gamma,
        Output::QMinus,
        Output::QPlus,
        Output::SpeedRelationResidual,
        Output::DecayRateEstimate,
        Output::DecayRateTheory,
        Output::DirichletEnergy,
        Output::Iterations,
        Output::Residual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::C => "c",
            Output::X0 => "x0",
            Output::Gamma => "gamma",
            Output::QMinus => "q_minus",
            Output::QPlus => "q_plus",
            Output::SpeedRelationResidual => "speed_relation_residual",
            Output::DecayRateEstimate => "decay_rate_estimate",
            Output::DecayRateTheory => "decay_rate_theory",
            Output::DirichletEnergy => "dirichlet_energy",
            Output::Iterations => "iterations",
            Output::Residual => "residual",
            Output::WallTime => "wall_time",
        }
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Output::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown output column {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub a: f64,
    pub h: f64,
    pub cfg: SolverConfig,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub outputs: Vec<Output>,
    /// Chain the solves, each starting from its predecessor. Runs sequentially.
    pub warm_start: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Parameter("sweep needs at least one value".into()));
        }
        if let Some(w) = self
            .values
            .windows(2)
            .find(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::Parameter(format!(
                "sweep values must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
        self.cfg.validate()
    }

    /// Parameters and grid of the `i`-th point.
    pub fn point(&self, i: usize) -> Result<(ModelParams, Grid)> {
        let v = self.values[i];
        let mut p = self.base;
        let mut a = self.a;
        match self.axis {
            Axis::A => a = v,
            Axis::Alpha => p.alpha = v,
            Axis::Rho => p.rho = v,
            Axis::Kappa => p.kappa = v,
        }
        p.validate()?;
        Ok((p, Grid::new(a, self.h)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    /// Values are those of the last iterate.
    NotConverged,
    Failed {
        message: String,
    },
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Ok => f.write_str("ok"),
            RunStatus::NotConverged => f.write_str("not_converged"),
            RunStatus::Failed { message } => write!(f, "failed: {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub params: ModelParams,
    pub a: f64,
    pub h: f64,
    pub status: RunStatus,
    pub c: Option<f64>,
    pub x0: Option<f64>,
    pub gamma: Option<f64>,
    pub q_minus: Option<f64>,
    pub q_plus: Option<f64>,
    pub speed_relation_residual: Option<f64>,
    pub decay_rate_estimate: Option<f64>,
    pub decay_rate_theory: Option<f64>,
    pub dirichlet_energy: Option<f64>,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    /// Seconds.
    pub wall_time: f64,
}

impl RunRecord {
    pub fn get(&self, o: Output) -> Option<f64> {
        match o {
            Output::C => self.c,
            Output::X0 => self.x0,
            Output::Gamma => self.gamma,
            Output::QMinus => self.q_minus,
            Output::QPlus => self.q_plus,
            Output::SpeedRelationResidual => self.speed_relation_residual,
            Output::DecayRateEstimate => self.decay_rate_estimate,
            Output::DecayRateTheory => self.decay_rate_theory,
            Output::DirichletEnergy => self.dirichlet_energy,
            Output::Iterations => self.iterations.map(|v| v as f64),
            Output::Residual => self.residual,
            Output::WallTime => Some(self.wall_time),
        }
    }

    fn empty(index: usize, params: ModelParams, a: f64, h: f64, status: RunStatus) -> Self {
        Self {
            index,
            params,
            a,
            h,
            status,
            c: None,
            x0: None,
            gamma: None,
            q_minus: None,
            q_plus: None,
            speed_relation_residual: None,
            decay_rate_estimate: None,
            decay_rate_theory: None,
            dirichlet_energy: None,
            iterations: None,
            residual: None,
            wall_time: 0.0,
        }
    }

    fn fill(&mut self, s: &CoupledSolution) {
        let d = &s.diagnostics;
        self.c = Some(s.profile.c);
        self.x0 = d.x0;
        self.gamma = Some(d.gamma);
        self.q_minus = Some(d.left_value_limit);
        self.q_plus = Some(d.tail_ratio);
        self.speed_relation_residual = Some(d.speed_relation_residual);
        self.decay_rate_estimate = d.decay_rate_estimate;
        self.decay_rate_theory = Some(d.decay_rate_theory);
        self.dirichlet_energy = Some(d.dirichlet_energy);
        self.iterations = Some(s.iterations);
        self.residual = s.history.last().copied();
    }
}

/// Solves one sweep point. The solution is returned for warm starting.
fn run_point(
    spec: &SweepSpec,
    i: usize,
    warm: Option<WarmStart>,
) -> (RunRecord, Option<CoupledSolution>) {
    let t = Instant::now();
    let (p, g) = match spec.point(i) {
        Ok(pg) => pg,
        Err(e) => {
            let mut p = spec.base;
            let mut a = spec.a;
            match spec.axis {
                Axis::A => a = spec.values[i],
                Axis::Alpha => p.alpha = spec.values[i],
                Axis::Rho => p.rho = spec.values[i],
                Axis::Kappa => p.kappa = spec.values[i],
            }
            let status = RunStatus::Failed {
                message: e.to_string(),
            };
            return (RunRecord::empty(i, p, a, spec.h, status), None);
        }
    };
    let mut rec = RunRecord::empty(i, p, g.a(), g.h(), RunStatus::Ok);
    let warm = warm.filter(|w| w.f.len() == g.len());
    let mut result = match warm {
        Some(w) => {
            let opts = SolveOptions {
                warm_start: Some(w),
                ..Default::default()
            };
            match solve_coupled_with(&g, &p, &spec.cfg, &opts) {
                Ok(s) => Ok(s),
                Err(_) => solve_coupled_with(&g, &p, &spec.cfg, &SolveOptions::default()),
            }
        }
        None => solve_coupled_with(&g, &p, &spec.cfg, &SolveOptions::default()),
    };
    let sol = match result.as_mut() {
        Ok(s) => {
            rec.fill(s);
            Some(s.clone())
        }
        Err(Error::NonConvergence {
            iterations,
            residual,
            last,
            ..
        }) => {
            rec.status = RunStatus::NotConverged;
            if let Some(s) = last {
                rec.fill(s);
            }
            rec.iterations = Some(*iterations);
            rec.residual = Some(*residual);
            None
        }
        Err(e) => {
            rec.status = RunStatus::Failed {
                message: e.to_string(),
            };
            None
        }
    };
    rec.wall_time = t.elapsed().as_secs_f64();
    (rec, sol)
}

/// Runs every point of the sweep. Without warm starts the points are solved
/// independently on a pool of `workers` threads; records come back in input
/// order and do not depend on the worker count. Failed points are reported
/// in their row's status.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let n = spec.values.len();
    if spec.warm_start {
        let mut out = Vec::with_capacity(n);
        let mut prev: Option<CoupledSolution> = None;
        for i in 0..n {
            let (rec, sol) = run_point(spec, i, prev.as_ref().map(WarmStart::from_solution));
            prev = sol;
            out.push(rec);
        }
        return Ok(out);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| run_point(spec, i, None).0)
            .collect()
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn monotone(name: &str, v: &[Option<f64>], increasing: bool) -> TrendCheck {
    let vals: Option<Vec<f64>> = v.iter().copied().collect();
    let (passed, detail) = match vals {
        None => (false, "missing values".to_string()),
        Some(vals) => {
            let ok = vals
                .windows(2)
                .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
            (ok, format!("{vals:?}"))
        }
    };
    let dir = if increasing {
        "increasing"
    } else {
        "decreasing"
    };
    TrendCheck {
        name: format!("{name} strictly {dir}"),
        passed,
        detail,
    }
}

/// The parameter-dependence trends expected along each axis. For `a` the
/// transition point must settle: its last two values differ by at most 0.1.
pub fn check_trends(axis: Axis, records: &[RunRecord]) -> Vec<TrendCheck> {
    let c: Vec<Option<f64>> = records.iter().map(|r| r.c).collect();
    let x0: Vec<Option<f64>> = records.iter().map(|r| r.x0).collect();
    let mut out = Vec::new();
    let failed = records.iter().filter(|r| r.status != RunStatus::Ok).count();
    out.push(TrendCheck {
        name: "all points converged".into(),
        passed: failed == 0,
        detail: format!("{failed} of {} failed", records.len()),
    });
    match axis {
        Axis::Rho => {
            out.push(monotone("c", &c, false));
            out.push(monotone("x0", &x0, false));
        }
        Axis::Alpha => out.push(monotone("c", &c, true)),
        Axis::Kappa => {
            out.push(monotone("c", &c, true));
            out.push(monotone("x0", &x0, true));
        }
        Axis::A => {
            let tail: Vec<f64> = x0.iter().rev().take(2).flatten().copied().collect();
            let (passed, detail) = match tail.as_slice() {
                [last, prev] => ((last - prev).abs() <= 0.1, format!("|{last} - {prev}|")),
                _ => (false, "need two transition points".into()),
            };
            out.push(TrendCheck {
                name: "x0 settles in a".into(),
                passed,
                detail,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSlope {
    pub level: f64,
    pub coupled: Option<f64>,
    pub kpp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KppComparison {
    pub x: Vec<f64>,
    pub f_coupled: Vec<f64>,
    pub f_kpp: Vec<f64>,
    pub c_coupled: f64,
    pub c_kpp: f64,
    pub slopes: Vec<LevelSlope>,
    pub coupled: CoupledSolution,
}

/// `0.05, 0.10, ..., 0.95`.
pub fn slope_levels() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}

/// `F'` where a non-increasing profile first crosses `level`, interpolating the
/// central-difference derivative linearly between the bracketing nodes.
pub fn level_slope(f: &[f64], g: &Grid, level: f64) -> Result<Option<f64>> {
    let df = central_first_derivative(f, g)?;
    Ok((0..f.len() - 1)
        .find(|&i| f[i] >= level && f[i + 1] < level)
        .map(|i| {
            let t = (f[i] - level) / (f[i] - f[i + 1]);
            (1.0 - t) * df[i] + t * df[i + 1]
        }))
}

/// Coupled and pure KPP fronts on the same grid with their level slopes.
pub fn compare_kpp(
    p: &ModelParams,
    g: &Grid,
    cfg: &SolverConfig,
    opts: &SolveOptions,
) -> Result<KppComparison> {
    let kpp = solve_kpp(g, p, cfg)?;
    let coupled = solve_coupled_with(g, p, cfg, opts)?;
    let slopes = slope_levels()
        .into_iter()
        .map(|level| {
            Ok(LevelSlope {
                level,
                coupled: level_slope(&coupled.profile.f, g, level)?,
                kpp: level_slope(&kpp.f, g, level)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(KppComparison {
        x: g.nodes(),
        f_coupled: coupled.profile.f.clone(),
        f_kpp: kpp.f,
        c_coupled: coupled.profile.c,
        c_kpp: kpp.c,
        slopes,
        coupled,
    })
}
