//! Outer iteration coupling the front, the value function and the policy.

use serde::{Deserialize, Serialize};

use crate::coupling::{compute_rtilde, locate_transition, state_from_r, CouplingState};
use crate::error::{Error, Result};
use crate::front::{pinned_newton, PinnedSolve, Source};
use crate::grid::{central_first_derivative, trapezoid, Grid};
use crate::hjb::{phi1_violation, solve_qtilde_unchecked, ValueProfile};
use crate::kpp::{solve_kpp, WaveProfile};
use crate::params::{ModelParams, SolverConfig};
use crate::rescaling::{build_g_tables, build_phi_tables, GTables};

/// Smallest admissible profile value for an accepted front step.
const MIN_PROFILE: f64 = -1e-9;
/// Blending weight below which the continuation gives up.
const MIN_WEIGHT: f64 = 1e-6;
/// Profile floor for the tail fit.
const FIT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `|c - 2 sqrt(kappa alpha gamma)| / c`.
    pub speed_relation_residual: f64,
    /// Mean of `Q e^{-x}` over the rightmost fifth of the interval.
    pub tail_ratio: f64,
    /// `1 / (rho - kappa)`.
    pub tail_ratio_theory: f64,
    pub decay_rate_estimate: Option<f64>,
    /// `c / (2 kappa)`.
    pub decay_rate_theory: f64,
    /// `Q(-a)`.
    pub left_value_limit: f64,
    pub x0: Option<f64>,
    pub gamma: f64,
    pub c: f64,
    /// `A1 e^x <= Q`.
    pub growth_a1: f64,
    /// `Q <= A2 e^x + B`.
    pub growth_a2: f64,
    pub growth_b: f64,
    /// Trapezoid of `|F'|^2`.
    pub dirichlet_energy: f64,
    /// Smallest coefficient `phi1` at the final speed.
    pub phi1_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledSolution {
    pub grid: Grid,
    pub params: ModelParams,
    pub profile: WaveProfile,
    pub value: ValueProfile,
    pub coupling: CouplingState,
    pub diagnostics: Diagnostics,
    pub iterations: usize,
    pub converged: bool,
    /// `max(|dF|, |dQt| / max(1, |Qt|), |dc|)` per outer iteration.
    pub history: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Initial state for [`solve_coupled_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub f: Vec<f64>,
    pub c: f64,
    pub qtilde: Vec<f64>,
    pub qprime: Vec<f64>,
    pub r: Vec<f64>,
}

impl WarmStart {
    pub fn from_solution(s: &CoupledSolution) -> Self {
        Self {
            f: s.profile.f.clone(),
            c: s.profile.c,
            qtilde: s.value.qtilde.clone(),
            qprime: s.value.qprime.clone(),
            r: s.coupling.r.clone(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Keep `s* = 1` everywhere, which decouples the front from the value function.
    pub freeze_policy: bool,
    pub warm_start: Option<WarmStart>,
}

/// Least-squares decay rate of `F` over `[a/2, 3a/4]` where `F > 1e-12`.
pub fn estimate_decay_rate(f: &[f64], g: &Grid) -> Result<f64> {
    g.check_len(f)?;
    let (lo, hi) = (0.5 * g.a(), 0.75 * g.a());
    let pts: Vec<(f64, f64)> = (0..g.len())
        .filter(|&i| g.x(i) >= lo - 1e-12 && g.x(i) <= hi + 1e-12 && f[i] > FIT_FLOOR)
        .map(|i| (g.x(i), f[i].ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientTail);
    }
    let nn = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nn;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nn;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(-sxy / sxx)
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn compute_diagnostics(
    f: &[f64],
    c: f64,
    value: &ValueProfile,
    coupling: &CouplingState,
    phi1_min: f64,
    g: &Grid,
    p: &ModelParams,
) -> Result<Diagnostics> {
    let a = g.a();
    let n = g.len();
    let gamma = coupling.gamma;
    let tail: Vec<f64> = (0..n)
        .filter(|&i| g.x(i) >= 0.6 * a - 1e-12)
        .map(|i| value.q[i] * (-g.x(i)).exp())
        .collect();
    let scaled: Vec<f64> = (0..n).map(|i| value.q[i] * (-g.x(i)).exp()).collect();
    let growth_a1 = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let growth_a2 = (g.center()..n)
        .map(|i| scaled[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let growth_b = (0..g.center()).map(|i| value.q[i]).fold(0.0, f64::max);
    let df = central_first_derivative(f, g)?;
    let sq: Vec<f64> = df.iter().map(|d| d * d).collect();
    Ok(Diagnostics {
        speed_relation_residual: (c - 2.0 * (p.kappa * p.alpha * gamma).sqrt()).abs() / c,
        tail_ratio: tail.iter().sum::<f64>() / tail.len() as f64,
        tail_ratio_theory: 1.0 / (p.rho - p.kappa),
        decay_rate_estimate: estimate_decay_rate(f, g).ok(),
        decay_rate_theory: c / (2.0 * p.kappa),
        left_value_limit: value.q[0],
        x0: coupling.x0(),
        gamma,
        c,
        growth_a1,
        growth_a2,
        growth_b,
        dirichlet_energy: trapezoid(&sq, g, 0, n - 1)?,
        phi1_min,
    })
}

pub fn solve_coupled(g: &Grid, p: &ModelParams, cfg: &SolverConfig) -> Result<CoupledSolution> {
    solve_coupled_with(g, p, cfg, &SolveOptions::default())
}

struct Iterate {
    f: Vec<f64>,
    c: f64,
    qtilde: Vec<f64>,
    qprime: Vec<f64>,
    r_used: Option<Vec<f64>>,
}

fn value_at(
    r: &[f64],
    c: f64,
    gt: &GTables,
    g: &Grid,
    p: &ModelParams,
) -> Result<(ValueProfile, f64)> {
    let t = build_phi_tables(gt, c, p)?;
    let phi1_min = t.phi1.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((solve_qtilde_unchecked(r, g, p, &t)?, phi1_min))
}

/// Outer iteration. Each step computes the benefit `R` from the current value
/// function and front, blends it into the benefit used so far, solves the front
/// and speed jointly for that benefit, and then solves the value function at the
/// new speed. A front step is accepted only if it stays nonnegative and below
/// the linear spreading speed of its tail; otherwise the blending weight is
/// halved.
pub fn solve_coupled_with(
    g: &Grid,
    p: &ModelParams,
    cfg: &SolverConfig,
    opts: &SolveOptions,
) -> Result<CoupledSolution> {
    p.validate()?;
    cfg.validate()?;
    let n = g.len();
    let gt = build_g_tables(g);
    let mut warnings: Vec<String> = p.regime_warning().into_iter().collect();

    let mut it = match &opts.warm_start {
        Some(w) => {
            for v in [&w.f, &w.qtilde, &w.qprime, &w.r] {
                g.check_len(v)?;
            }
            Iterate {
                f: w.f.clone(),
                c: w.c,
                qtilde: w.qtilde.clone(),
                qprime: w.qprime.clone(),
                r_used: Some(w.r.clone()),
            }
        }
        None => {
            let kpp = solve_kpp(g, p, cfg)?;
            Iterate {
                f: kpp.f,
                c: kpp.c,
                qtilde: (0..n).map(|i| gt.g[i] * g.x(i).exp()).collect(),
                qprime: g.map(f64::exp),
                r_used: None,
            }
        }
    };

    let tol_pin = cfg.tol_speed * 1e-3;
    let wmax = cfg.coupling_relaxation;
    let mut weight = wmax;
    let mut history = Vec::new();
    let mut last_value: Option<(ValueProfile, f64)> = None;
    let mut converged = false;
    let mut iterations = 0;

    for outer in 0..cfg.max_outer {
        iterations = outer + 1;
        let (_, r_target) = compute_rtilde(&it.qprime, &it.f, g, p)?;
        let r_used = it
            .r_used
            .take()
            .unwrap_or_else(|| r_target.iter().map(|v| v.max(1.0)).collect());

        let (step, r_try) = loop {
            let r_try: Vec<f64> = if opts.freeze_policy {
                vec![1.0; n]
            } else {
                r_used
                    .iter()
                    .zip(&r_target)
                    .map(|(u, t)| u + weight * (t - u))
                    .collect()
            };
            let attempt = if opts.freeze_policy {
                pinned_newton(&it.f, it.c, &Source::Logistic, g, p, cfg.max_inner, tol_pin)
            } else {
                let dr = central_first_derivative(&r_try, g)?;
                let src = Source::Coupled {
                    r: &r_try,
                    dr: &dr,
                    transition: locate_transition(&r_try, g),
                };
                pinned_newton(&it.f, it.c, &src, g, p, cfg.max_inner, tol_pin)
            };
            match attempt {
                Ok(s) if admissible(&s, p) || opts.freeze_policy => break (s, r_try),
                Ok(_) | Err(Error::NonConvergence { .. }) | Err(Error::Singular { .. })
                    if !opts.freeze_policy =>
                {
                    weight *= 0.5;
                    if weight < MIN_WEIGHT {
                        let residual = history.last().copied().unwrap_or(f64::NAN);
                        let last = last_value.take().and_then(|(v, phi1_min)| {
                            let sol = assemble(
                                g,
                                p,
                                &it,
                                v,
                                phi1_min,
                                outer,
                                false,
                                history.clone(),
                                warnings.clone(),
                            );
                            sol.ok().map(Box::new)
                        });
                        return Err(Error::NonConvergence {
                            iterations: outer,
                            residual,
                            history,
                            last,
                        });
                    }
                }
                Ok(_) => unreachable!(),
                Err(e) => return Err(e),
            }
        };

        let (value, phi1_min) = value_at(&r_try, step.c, &gt, g, p)?;
        let omega = cfg.relaxation;
        let f_new: Vec<f64> = if omega < 1.0 {
            it.f.iter()
                .zip(&step.f)
                .map(|(a, b)| (1.0 - omega) * a + omega * b)
                .collect()
        } else {
            step.f
        };
        let c_new = if omega < 1.0 {
            (1.0 - omega) * it.c + omega * step.c
        } else {
            step.c
        };
        let scale = sup_norm(&value.qtilde).max(1.0);
        let d = sup_diff(&f_new, &it.f)
            .max(sup_diff(&value.qtilde, &it.qtilde) / scale)
            .max((c_new - it.c).abs());
        history.push(d);
        it.f = f_new;
        it.c = c_new;
        it.qtilde = value.qtilde.clone();
        it.qprime = value.qprime.clone();
        it.r_used = Some(r_try);
        last_value = Some((value, phi1_min));
        if d <= cfg.tol_profile {
            converged = true;
            break;
        }
        weight = (2.0 * weight).min(wmax);
    }

    let (value, phi1_min) = match last_value {
        Some(v) => v,
        None => value_at(
            it.r_used.as_deref().unwrap_or(&vec![0.0; n]),
            it.c,
            &gt,
            g,
            p,
        )?,
    };
    if let Some((i, v)) = phi1_violation(&build_phi_tables(&gt, it.c, p)?) {
        warnings.push(format!(
            "phi1 = {v:.4e} <= 0 at x = {}: speed exceeds the regime where the rescaled value equation is coercive",
            g.x(i)
        ));
    }
    let sol = assemble(
        g,
        p,
        &it,
        value,
        phi1_min,
        iterations,
        converged,
        history.clone(),
        warnings,
    )?;
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            residual: history.last().copied().unwrap_or(f64::NAN),
            history,
            last: Some(Box::new(sol)),
        });
    }
    Ok(sol)
}

fn admissible(s: &PinnedSolve, p: &ModelParams) -> bool {
    let min = s.f.iter().copied().fold(f64::INFINITY, f64::min);
    min > MIN_PROFILE && s.c < 2.0 * (p.kappa * p.alpha * s.tail_mass.max(0.0)).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    g: &Grid,
    p: &ModelParams,
    it: &Iterate,
    value: ValueProfile,
    phi1_min: f64,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
    warnings: Vec<String>,
) -> Result<CoupledSolution> {
    let (rtilde, r) = compute_rtilde(&value.qprime, &it.f, g, p)?;
    let coupling = state_from_r(rtilde, r, &it.f, g)?;
    let diagnostics = compute_diagnostics(&it.f, it.c, &value, &coupling, phi1_min, g, p)?;
    Ok(CoupledSolution {
        grid: g.clone(),
        params: *p,
        profile: WaveProfile {
            f: it.f.clone(),
            c: it.c,
        },
        value,
        coupling,
        diagnostics,
        iterations,
        converged,
        history,
        warnings,
    })
}
