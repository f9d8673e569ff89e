//! The front equation `-c F' - kappa F'' = alpha F M[F]` with `F(0) = 1/2`,
//! solved jointly for the profile and the speed.

use crate::coupling::{mass_profile, Transition};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kpp::{beta_derivative, beta_of_c, relaxed_right_bc};
use crate::params::ModelParams;
use crate::tridiag::{solve_tridiagonal, BlockTridiagonal, TridiagonalSystem};

/// Residual tolerance of the pinned Newton iteration.
pub const PINNED_RES_TOL: f64 = 1e-10;
const STEP_TOL: f64 = 1e-13;

/// Reaction mass `M[F]` multiplying `alpha F`.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    /// `M = 1 - F`.
    Logistic,
    /// Accumulated `int s* (-F')` for a fixed benefit `r` with derivative `dr`.
    Coupled {
        r: &'a [f64],
        dr: &'a [f64],
        transition: Transition,
    },
}

impl Source<'_> {
    /// `(M, S, first)` as in [`mass_profile`].
    fn mass(&self, f: &[f64], g: &Grid) -> (Vec<f64>, Vec<f64>, usize) {
        match self {
            Source::Logistic => (
                f.iter().map(|v| 1.0 - v).collect(),
                vec![0.0; f.len()],
                f.len(),
            ),
            Source::Coupled { r, dr, transition } => mass_profile(f, r, dr, transition, g),
        }
    }
}

/// Residual of every front row; boundary rows hold the Dirichlet mismatch.
pub fn front_residual(
    f: &[f64],
    c: f64,
    src: &Source,
    g: &Grid,
    p: &ModelParams,
) -> Result<Vec<f64>> {
    g.check_len(f)?;
    let n = g.len();
    let h = g.h();
    let (m, _, _) = src.mass(f, g);
    let mut r = vec![0.0; n];
    r[0] = f[0] - 1.0;
    r[n - 1] = f[n - 1] - relaxed_right_bc(c, g, p)?;
    for i in 1..n - 1 {
        r[i] = -c * (f[i + 1] - f[i - 1]) / (2.0 * h)
            - p.kappa * (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h)
            - p.alpha * f[i] * m[i];
    }
    Ok(r)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Outcome of [`pinned_newton`].
#[derive(Debug, Clone)]
pub struct PinnedSolve {
    pub f: Vec<f64>,
    pub c: f64,
    pub iterations: usize,
    /// Mass `M` at the right end, i.e. the reaction mass seen by the tail.
    pub tail_mass: f64,
}

/// Newton's method on the discrete front equations and `F(0) = 1/2`, jointly in
/// `(F, c)`. The accumulated integral `S` is carried as a second unknown per node
/// so the Jacobian stays block tridiagonal; the speed column is handled by
/// bordering. Returns the input unchanged when it already satisfies the
/// tolerances.
pub fn pinned_newton(
    f0: &[f64],
    c0: f64,
    src: &Source,
    g: &Grid,
    p: &ModelParams,
    max_iter: usize,
    tol_pin: f64,
) -> Result<PinnedSolve> {
    g.check_len(f0)?;
    let n = g.len();
    let h = g.h();
    let k = p.kappa / (h * h);
    let mid = g.center();
    let a = g.a();
    let mut f = f0.to_vec();
    let mut c = c0;
    let mut history = Vec::new();
    for it in 0..=max_iter {
        let (mass, _, first) = src.mass(&f, g);
        let res = front_residual(&f, c, src, g, p)?;
        let pin = f[mid] - 0.5;
        let norm = sup_norm(&res);
        history.push(norm.max(pin.abs()));
        if !(norm.is_finite() && c.is_finite()) {
            break;
        }
        if norm <= PINNED_RES_TOL && pin.abs() <= tol_pin {
            return Ok(PinnedSolve {
                f,
                c,
                iterations: it,
                tail_mass: mass[n - 1],
            });
        }
        if it == max_iter || c <= 0.0 {
            break;
        }

        let mut jac = BlockTridiagonal::zeros(n);
        let mut rhs = vec![[[0.0; 2]; 2]; n];
        for i in 0..n {
            rhs[i][0][0] = -res[i];
        }
        jac.diag[0][0][0] = 1.0;
        jac.diag[n - 1][0][0] = 1.0;
        rhs[n - 1][1][0] = 0.5 * a * beta_derivative(c, p) * (-beta_of_c(c, p)? * a).exp();
        for i in 1..n - 1 {
            jac.lower[i][0][0] = -k + c / (2.0 * h);
            jac.upper[i][0][0] = -k - c / (2.0 * h);
            rhs[i][1][0] = -(f[i + 1] - f[i - 1]) / (2.0 * h);
        }
        match src {
            Source::Logistic => {
                for i in 1..n - 1 {
                    jac.diag[i][0][0] = 2.0 * k - p.alpha * (1.0 - 2.0 * f[i]);
                }
                for b in jac.diag.iter_mut() {
                    b[1][1] = 1.0;
                }
            }
            Source::Coupled { r, dr, transition } => {
                for i in 1..n - 1 {
                    if i < first {
                        jac.diag[i][0][0] = 2.0 * k - p.alpha * (1.0 - 2.0 * f[i]);
                    } else {
                        jac.diag[i][0][0] = 2.0 * k - p.alpha * mass[i] + p.alpha * f[i] * r[i];
                        jac.diag[i][0][1] = -p.alpha * f[i];
                    }
                }
                for i in 0..n {
                    jac.diag[i][1][1] = 1.0;
                    if i < first {
                        continue;
                    }
                    if i == first {
                        if let Transition::Interior { m, theta, .. } = *transition {
                            let w = 0.5 * (1.0 - theta) * h;
                            jac.lower[i][1][0] = -w * (1.0 - theta) * dr[m];
                            jac.diag[i][1][0] = -w * (1.0 + theta) * dr[m + 1];
                        }
                    } else {
                        jac.lower[i][1][1] = -1.0;
                        jac.lower[i][1][0] = -0.5 * h * dr[i - 1];
                        jac.diag[i][1][0] = -0.5 * h * dr[i];
                    }
                }
            }
        }
        let y = jac.solve(&rhs)?;
        let denom = y[mid][1][0];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Singular { row: 2 * mid });
        }
        let dc = (y[mid][0][0] + pin) / denom;
        let mut step = 0.0f64;
        for i in 0..n {
            let d = y[i][0][0] - dc * y[i][1][0];
            f[i] += d;
            step = step.max(d.abs());
        }
        c += dc;
        if step <= STEP_TOL && dc.abs() <= STEP_TOL {
            let (mass, _, _) = src.mass(&f, g);
            return Ok(PinnedSolve {
                f,
                c,
                iterations: it + 1,
                tail_mass: mass[n - 1],
            });
        }
    }
    let residual = history.last().copied().unwrap_or(f64::NAN);
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
        history,
        last: None,
    })
}

/// One semi-implicit sweep of the coupled front equation at fixed speed: the
/// term `-alpha F_prev R F` sits on the diagonal, the accumulated integral is
/// lagged at `F_prev`, and nodes left of the transition use the explicit
/// logistic source.
pub fn coupled_f_inner(
    f_prev: &[f64],
    src: &Source,
    c: f64,
    g: &Grid,
    p: &ModelParams,
) -> Result<Vec<f64>> {
    g.check_len(f_prev)?;
    let n = g.len();
    let h = g.h();
    let k = p.kappa / (h * h);
    let (_, s, first) = src.mass(f_prev, g);
    let r: &[f64] = match src {
        Source::Coupled { r, .. } => r,
        Source::Logistic => &[],
    };
    let mut sys = TridiagonalSystem::zeros(n);
    sys.diag[0] = 1.0;
    sys.rhs[0] = 1.0;
    sys.diag[n - 1] = 1.0;
    sys.rhs[n - 1] = relaxed_right_bc(c, g, p)?;
    for i in 1..n - 1 {
        sys.sub[i] = -k + c / (2.0 * h);
        sys.diag[i] = 2.0 * k;
        sys.sup[i] = -k - c / (2.0 * h);
        if i < first {
            sys.rhs[i] = p.alpha * f_prev[i] * (1.0 - f_prev[i]);
        } else {
            sys.diag[i] += p.alpha * f_prev[i] * r[i];
            sys.rhs[i] = p.alpha * f_prev[i] * s[i];
        }
    }
    solve_tridiagonal(&sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::locate_transition;
    use crate::grid::central_first_derivative;
    use crate::kpp::kpp_inner_solve;

    fn setup() -> (Grid, ModelParams) {
        (
            Grid::new(10.0, 0.05).unwrap(),
            ModelParams::new(1.0, 2.0, 10.0).unwrap(),
        )
    }

    #[test]
    fn all_searching_sweep_is_the_logistic_sweep() {
        let (g, p) = setup();
        let f: Vec<f64> = g.map(|x| 1.0 / (1.0 + x.exp()));
        let r = vec![1.0; g.len()];
        let dr = vec![0.0; g.len()];
        let src = Source::Coupled {
            r: &r,
            dr: &dr,
            transition: locate_transition(&r, &g),
        };
        let a = coupled_f_inner(&f, &src, 2.5, &g, &p).unwrap();
        let b = kpp_inner_solve(&f, 2.5, &g, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pinned_newton_solves_logistic_front() {
        let (g, p) = setup();
        let f0: Vec<f64> = g.map(|x| 1.0 / (1.0 + (x * 1.2).exp()));
        let s = pinned_newton(&f0, 2.7, &Source::Logistic, &g, &p, 100, 1e-12).unwrap();
        let res = front_residual(&s.f, s.c, &Source::Logistic, &g, &p).unwrap();
        assert!(sup_norm(&res) <= PINNED_RES_TOL);
        assert!((s.f[g.center()] - 0.5).abs() <= 1e-12);
        assert!(s.c > 2.0 && s.c < 2.0 * 2f64.sqrt());
        // A converged input comes back untouched.
        let again = pinned_newton(&s.f, s.c, &Source::Logistic, &g, &p, 100, 1e-12).unwrap();
        assert_eq!(again.iterations, 0);
        assert_eq!(again.f, s.f);
        assert_eq!(again.c, s.c);
    }

    #[test]
    fn pinned_newton_coupled_source_converges() {
        let (g, p) = setup();
        let f0: Vec<f64> = g.map(|x| 1.0 / (1.0 + (x * 1.2).exp()));
        let r: Vec<f64> = g.map(|x| (0.5 - x).exp());
        let dr = central_first_derivative(&r, &g).unwrap();
        let src = Source::Coupled {
            r: &r,
            dr: &dr,
            transition: locate_transition(&r, &g),
        };
        let s = pinned_newton(&f0, 2.5, &src, &g, &p, 100, 1e-12).unwrap();
        let res = front_residual(&s.f, s.c, &src, &g, &p).unwrap();
        assert!(sup_norm(&res) <= PINNED_RES_TOL);
        assert!(s.tail_mass > 0.0 && s.tail_mass < 1.0);
    }
}
