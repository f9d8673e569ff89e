//! Pure reaction-diffusion front `-c F' - kappa F'' = alpha F (1 - F)` on `[-a, a]`
//! with `F(-a) = 1`, a linearized-tail condition at `a`, and `F(0) = 1/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::{ModelParams, SolverConfig};
use crate::tridiag::{solve_tridiagonal, TridiagonalSystem};

/// Lower end of the initial speed bracket.
pub const SPEED_LO: f64 = 1e-3;
/// Number of speeds tried when the initial bracket shows no sign change.
pub const SCAN_POINTS: usize = 64;

/// Residual tolerance of the fixed-speed Newton iteration.
const NEWTON_RES_TOL: f64 = 1e-12;
/// Step tolerance of the fixed-speed Newton iteration.
const NEWTON_STEP_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub f: Vec<f64>,
    pub c: f64,
}

/// Decay rate of the linearized tail: the smaller root of `kappa b^2 - c b + alpha = 0`,
/// or `c / (2 kappa)` when the roots are complex.
pub fn beta_of_c(c: f64, p: &ModelParams) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Parameter(format!(
            "speed must be positive, got c = {c}"
        )));
    }
    let disc = c * c - 4.0 * p.kappa * p.alpha;
    Ok(if disc <= 0.0 {
        c / (2.0 * p.kappa)
    } else {
        (c - disc.sqrt()) / (2.0 * p.kappa)
    })
}

/// `d beta / d c`; unbounded as the discriminant vanishes from above.
pub(crate) fn beta_derivative(c: f64, p: &ModelParams) -> f64 {
    let disc = c * c - 4.0 * p.kappa * p.alpha;
    if disc <= 0.0 {
        1.0 / (2.0 * p.kappa)
    } else {
        (1.0 - c / disc.sqrt()) / (2.0 * p.kappa)
    }
}

/// `F(a) = exp(-beta(c) a) / 2`.
pub fn relaxed_right_bc(c: f64, g: &Grid, p: &ModelParams) -> Result<f64> {
    Ok(0.5 * (-beta_of_c(c, p)? * g.a()).exp())
}

/// Affine ramp `(a - x) / (2a)`.
pub fn kpp_initial_profile(g: &Grid) -> Vec<f64> {
    let a = g.a();
    let mut f = g.map(|x| (a - x) / (2.0 * a));
    f[0] = 1.0;
    let n = f.len();
    f[n - 1] = 0.0;
    f
}

/// One semi-implicit sweep: linear operator at the new iterate, reaction at the old.
pub fn kpp_inner_solve(f_prev: &[f64], c: f64, g: &Grid, p: &ModelParams) -> Result<Vec<f64>> {
    g.check_len(f_prev)?;
    let right = relaxed_right_bc(c, g, p)?;
    let n = g.len();
    let h = g.h();
    let k = p.kappa / (h * h);
    let mut sys = TridiagonalSystem::zeros(n);
    sys.diag[0] = 1.0;
    sys.rhs[0] = 1.0;
    sys.diag[n - 1] = 1.0;
    sys.rhs[n - 1] = right;
    for i in 1..n - 1 {
        sys.sub[i] = -k + c / (2.0 * h);
        sys.diag[i] = 2.0 * k;
        sys.sup[i] = -k - c / (2.0 * h);
        sys.rhs[i] = p.alpha * f_prev[i] * (1.0 - f_prev[i]);
    }
    solve_tridiagonal(&sys)
}

/// Interior residual `-c F' - kappa F'' - alpha F (1 - F)` and boundary mismatches.
pub fn kpp_residual(f: &[f64], c: f64, g: &Grid, p: &ModelParams) -> Result<Vec<f64>> {
    g.check_len(f)?;
    let n = g.len();
    let h = g.h();
    let mut r = vec![0.0; n];
    r[0] = f[0] - 1.0;
    r[n - 1] = f[n - 1] - relaxed_right_bc(c, g, p)?;
    for i in 1..n - 1 {
        r[i] = -c * (f[i + 1] - f[i - 1]) / (2.0 * h)
            - p.kappa * (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h)
            - p.alpha * f[i] * (1.0 - f[i]);
    }
    Ok(r)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Newton's method for the fixed-speed problem started from the supersolution
/// `F = 1`. The reaction is concave, so the iterates decrease monotonically to
/// the maximal solution. Returns the profile and the iteration count.
pub fn kpp_fixed_speed(
    c: f64,
    g: &Grid,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, usize)> {
    let n = g.len();
    let h = g.h();
    let k = p.kappa / (h * h);
    let mut f = vec![1.0; n];
    f[n - 1] = relaxed_right_bc(c, g, p)?;
    let mut res = f64::INFINITY;
    let mut history = Vec::new();
    for it in 0..cfg.max_inner {
        let r = kpp_residual(&f, c, g, p)?;
        res = sup_norm(&r);
        history.push(res);
        if res <= NEWTON_RES_TOL {
            return Ok((f, it));
        }
        let mut sys = TridiagonalSystem::zeros(n);
        sys.diag[0] = 1.0;
        sys.diag[n - 1] = 1.0;
        for i in 1..n - 1 {
            sys.sub[i] = -k + c / (2.0 * h);
            sys.diag[i] = 2.0 * k - p.alpha * (1.0 - 2.0 * f[i]);
            sys.sup[i] = -k - c / (2.0 * h);
        }
        for i in 0..n {
            sys.rhs[i] = -r[i];
        }
        let step = solve_tridiagonal(&sys)?;
        for (fi, d) in f.iter_mut().zip(&step) {
            *fi += d;
        }
        if sup_norm(&step) <= NEWTON_STEP_TOL {
            return Ok((f, it + 1));
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_inner,
        residual: res,
        history,
        last: None,
    })
}

/// Finds `c` with `F_c(0) = 1/2`, where `inner(c)` returns the profile for speed `c`.
///
/// The bracket `[1e-3, 2 sqrt(kappa alpha) + 1]` is checked first; without a
/// sign change, 64 evenly spaced speeds are scanned for one. Inside a verified
/// bracket, Illinois-modified secant steps are used, with a bisection whenever
/// the bracket fails to halve.
pub fn solve_speed_normalized<I>(
    mut inner: I,
    g: &Grid,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Result<WaveProfile>
where
    I: FnMut(f64) -> Result<Vec<f64>>,
{
    let mid = g.center();
    let mut eval = |c: f64| -> Result<(f64, Vec<f64>)> {
        let f = inner(c)?;
        Ok((f[mid] - 0.5, f))
    };
    let tol = cfg.tol_speed * 1e-3;

    let mut lo = SPEED_LO;
    let mut hi = p.kpp_speed() + 1.0;
    let (mut r_lo, f_lo) = eval(lo)?;
    let (mut r_hi, f_hi) = eval(hi)?;
    if r_lo.abs() <= tol {
        return Ok(WaveProfile { f: f_lo, c: lo });
    }
    if r_hi.abs() <= tol {
        return Ok(WaveProfile { f: f_hi, c: hi });
    }
    if r_lo.signum() == r_hi.signum() {
        let (end_lo, end_hi) = (r_lo, r_hi);
        let mut prev = (lo, r_lo);
        let mut found = None;
        for j in 1..SCAN_POINTS {
            let c = lo + (hi - lo) * j as f64 / (SCAN_POINTS - 1) as f64;
            let Ok((r, _)) = eval(c) else { continue };
            if r.signum() != prev.1.signum() {
                found = Some((prev, (c, r)));
                break;
            }
            prev = (c, r);
        }
        let Some(((a, ra), (b, rb))) = found else {
            return Err(Error::NoWave(format!(
                "F(0) - 1/2 has no sign change on [{lo}, {hi}]: {end_lo:e} at the lower end, {end_hi:e} at the upper end"
            )));
        };
        lo = a;
        r_lo = ra;
        hi = b;
        r_hi = rb;
    }

    let mut side = 0i8;
    let mut width = hi - lo;
    let mut best: Option<WaveProfile> = None;
    let mut history = Vec::new();
    for it in 0..cfg.max_speed_iters {
        let secant = hi - r_hi * (hi - lo) / (r_hi - r_lo);
        let c = if it % 3 == 2 && hi - lo > 0.5 * width || !(secant > lo && secant < hi) {
            0.5 * (lo + hi)
        } else {
            secant
        };
        if it % 3 == 2 {
            width = hi - lo;
        }
        let (r, f) = eval(c)?;
        history.push(r.abs());
        if r.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * c.abs() {
            return Ok(WaveProfile { f, c });
        }
        if r.signum() == r_lo.signum() {
            lo = c;
            r_lo = r;
            if side == -1 {
                r_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = c;
            r_hi = r;
            if side == 1 {
                r_lo *= 0.5;
            }
            side = 1;
        }
        best = Some(WaveProfile { f, c });
    }
    let residual = history.last().copied().unwrap_or(f64::NAN);
    if let Some(b) = &best {
        if (b.f[mid] - 0.5).abs() <= cfg.tol_speed {
            return Ok(best.unwrap());
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_speed_iters,
        residual,
        history,
        last: None,
    })
}

/// Pure reaction-diffusion front, normalized by `F(0) = 1/2`.
pub fn solve_kpp(g: &Grid, p: &ModelParams, cfg: &SolverConfig) -> Result<WaveProfile> {
    p.validate_kpp()?;
    cfg.validate()?;
    solve_speed_normalized(|c| kpp_fixed_speed(c, g, p, cfg).map(|r| r.0), g, p, cfg)
}
