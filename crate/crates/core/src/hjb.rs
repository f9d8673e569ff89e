//! Value function: the rescaled equation for `Qtilde = g Q`, recovery of `Q`
//! and `Q'`, the Hamiltonian envelope and the optimal search policy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::ModelParams;
use crate::rescaling::RescaleTables;
use crate::tridiag::{solve_tridiagonal, TridiagonalSystem};

/// `2r` for `r > 1`, `1 + r^2` on `[0, 1]`, `1` for `r < 0`.
pub fn hamiltonian_h(r: f64) -> f64 {
    if r > 1.0 {
        2.0 * r
    } else if r >= 0.0 {
        1.0 + r * r
    } else {
        1.0
    }
}

/// `dH/dr`.
pub fn hamiltonian_dh(r: f64) -> f64 {
    if r > 1.0 {
        2.0
    } else if r >= 0.0 {
        2.0 * r
    } else {
        0.0
    }
}

/// Optimal search intensity `clamp(r, 0, 1)`.
pub fn policy_s(r: f64) -> f64 {
    r.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueProfile {
    pub qtilde: Vec<f64>,
    pub q: Vec<f64>,
    pub qprime: Vec<f64>,
    /// Whether the assembled system was weakly diagonally dominant.
    pub diagonally_dominant: bool,
}

/// Inhomogeneous boundary data: `Qt'(-a) - (g1/g)(-a) Qt(-a) = left`, `Qt'(a) = right`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RobinData {
    pub left: f64,
    pub right: f64,
}

/// First node where `phi1 <= 0`, with its value.
pub fn phi1_violation(t: &RescaleTables) -> Option<(usize, f64)> {
    t.phi1
        .iter()
        .position(|v| *v <= 0.0)
        .map(|i| (i, t.phi1[i]))
}

/// Solves `phi1 Qt + phi2 Qt' - kappa Qt'' = src` with ghost-point elimination
/// of the boundary conditions, then recovers `Q = Qt/g` and `Q' = Qt'/g - g1 Qt/g^2`.
pub fn solve_rescaled(
    src: &[f64],
    g: &Grid,
    p: &ModelParams,
    t: &RescaleTables,
    bc: RobinData,
) -> Result<ValueProfile> {
    g.check_len(src)?;
    g.check_len(&t.phi1)?;
    let n = g.len();
    let h = g.h();
    let k = p.kappa / (h * h);
    let sigma = t.g1[0] / t.g[0];
    let mut sys = TridiagonalSystem::zeros(n);
    for i in 1..n - 1 {
        sys.sub[i] = -k - t.phi2[i] / (2.0 * h);
        sys.diag[i] = t.phi1[i] + 2.0 * k;
        sys.sup[i] = -k + t.phi2[i] / (2.0 * h);
        sys.rhs[i] = src[i];
    }
    sys.diag[0] = t.phi1[0] + 2.0 * k + t.phi2[0] * sigma + 2.0 * p.kappa * sigma / h;
    sys.sup[0] = -2.0 * k;
    sys.rhs[0] = src[0] - t.phi2[0] * bc.left - 2.0 * p.kappa * bc.left / h;
    sys.sub[n - 1] = -2.0 * k;
    sys.diag[n - 1] = t.phi1[n - 1] + 2.0 * k;
    sys.rhs[n - 1] = src[n - 1] - t.phi2[n - 1] * bc.right + 2.0 * p.kappa * bc.right / h;
    let diagonally_dominant = sys.is_diagonally_dominant();
    let qtilde = solve_tridiagonal(&sys)?;

    let mut dqt = vec![0.0; n];
    for i in 1..n - 1 {
        dqt[i] = (qtilde[i + 1] - qtilde[i - 1]) / (2.0 * h);
    }
    dqt[0] = sigma * qtilde[0] + bc.left;
    dqt[n - 1] = bc.right;
    let q = qtilde.iter().zip(&t.g).map(|(v, g)| v / g).collect();
    let qprime = (0..n)
        .map(|i| dqt[i] / t.g[i] - t.g1[i] / (t.g[i] * t.g[i]) * qtilde[i])
        .collect();
    Ok(ValueProfile {
        qtilde,
        q,
        qprime,
        diagonally_dominant,
    })
}

/// Source `g e^x H(R)` of the rescaled equation.
pub fn rescaled_source(r: &[f64], g: &Grid, t: &RescaleTables) -> Vec<f64> {
    r.iter()
        .enumerate()
        .map(|(i, v)| t.g[i] * g.x(i).exp() * hamiltonian_h(*v))
        .collect()
}

/// Value function for a given benefit `R`, with `Q'(-a) = 0` and `Q'(a) = Q(a)`.
/// Fails with a regime error when `phi1 <= 0` at some node.
pub fn solve_qtilde(
    r: &[f64],
    g: &Grid,
    p: &ModelParams,
    t: &RescaleTables,
) -> Result<ValueProfile> {
    if let Some((i, v)) = phi1_violation(t) {
        return Err(Error::Regime(format!(
            "phi1 = {v:e} <= 0 at x = {}",
            g.x(i)
        )));
    }
    solve_qtilde_unchecked(r, g, p, t)
}

/// As [`solve_qtilde`] without the sign check on `phi1`.
pub fn solve_qtilde_unchecked(
    r: &[f64],
    g: &Grid,
    p: &ModelParams,
    t: &RescaleTables,
) -> Result<ValueProfile> {
    g.check_len(r)?;
    solve_rescaled(&rescaled_source(r, g, t), g, p, t, RobinData::default())
}

/// Exponents `(lambda1, lambda2)` of the homogeneous equation
/// `(rho - c) u + c u' - kappa u'' = 0`, solutions `e^{lambda1 x}`, `e^{-lambda2 x}`.
pub fn analytic_exponents(c: f64, p: &ModelParams) -> Result<(f64, f64)> {
    if p.rho <= c {
        return Err(Error::Parameter(format!(
            "need rho > c, got rho = {}, c = {c}",
            p.rho
        )));
    }
    let s = (c * c + 4.0 * p.kappa * (p.rho - c)).sqrt();
    Ok(((c + s) / (2.0 * p.kappa), (-c + s) / (2.0 * p.kappa)))
}

/// Coefficients `(z1, z2)` returned as natural logarithms, so that the closed
/// form is `exp(ln z1 + lambda1 x) + exp(ln z2 - lambda2 x) + e^x/(rho - kappa)`.
pub fn analytic_log_coefficients(c: f64, a: f64, p: &ModelParams) -> Result<(f64, f64)> {
    let (l1, l2) = analytic_exponents(c, p)?;
    if p.rho <= p.kappa || l1 <= 1.0 {
        return Err(Error::Parameter(format!(
            "closed form needs rho > kappa and lambda1 > 1 (lambda1 = {l1})"
        )));
    }
    let decay = (-2.0 * (l1 + l2) * a).exp();
    let b1 = l2 * (l1 - 1.0) / (l2 + 1.0) - l1 * decay;
    let b2 = l2 - l1 * (l2 + 1.0) / (l1 - 1.0) * decay;
    if b1 <= 0.0 || b2 <= 0.0 {
        return Err(Error::Parameter(
            "closed-form coefficients are not positive".into(),
        ));
    }
    let base = -a - (p.rho - p.kappa).ln();
    Ok((
        base - (l1 + 2.0 * l2) * a - b1.ln(),
        base - l2 * a - b2.ln(),
    ))
}

/// Closed-form solution of `(rho - c) u + c u' - kappa u'' = e^x` with
/// `u'(-a) = 0`, `u'(a) = u(a)`.
pub fn analytic_g_solution(c: f64, g: &Grid, p: &ModelParams) -> Result<Vec<f64>> {
    let (l1, l2) = analytic_exponents(c, p)?;
    let (lz1, lz2) = analytic_log_coefficients(c, g.a(), p)?;
    Ok(g.map(|x| (lz1 + l1 * x).exp() + (lz2 - l2 * x).exp() + x.exp() / (p.rho - p.kappa)))
}
