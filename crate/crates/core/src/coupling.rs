//! Nonlocal terms linking the front and the value function: the expected
//! benefit `R`, the policy `s*`, the transition point, and the reaction mass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{central_first_derivative, trapezoid, trapezoid_from_right, Grid};
use crate::hjb::policy_s;
use crate::params::ModelParams;

/// Position of the point where `R` crosses 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transition {
    /// `R(x_m) >= 1 > R(x_{m+1})`, crossing at `x_m + theta h`.
    Interior { m: usize, theta: f64, x0: f64 },
    /// `R < 1` at every node.
    LeftOfGrid,
    /// `R >= 1` at every node.
    RightOfGrid,
}

impl Transition {
    pub fn x0(&self) -> Option<f64> {
        match self {
            Transition::Interior { x0, .. } => Some(*x0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingState {
    pub rtilde: Vec<f64>,
    pub r: Vec<f64>,
    pub s_star: Vec<f64>,
    pub transition: Transition,
    pub gamma: f64,
}

impl CouplingState {
    pub fn x0(&self) -> Option<f64> {
        self.transition.x0()
    }
}

/// `Rt(x_i) = (alpha/2) int_{x_i}^a Q' F`, accumulated from the right by the
/// trapezoid rule, and `R = e^{-x} Rt`.
pub fn compute_rtilde(
    qprime: &[f64],
    f: &[f64],
    g: &Grid,
    p: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    g.check_len(qprime)?;
    g.check_len(f)?;
    let u: Vec<f64> = qprime.iter().zip(f).map(|(q, f)| q * f).collect();
    let mut rt = trapezoid_from_right(&u, g)?;
    for v in rt.iter_mut() {
        *v *= 0.5 * p.alpha;
    }
    let r = rt
        .iter()
        .enumerate()
        .map(|(i, v)| (-g.x(i)).exp() * v)
        .collect();
    Ok((rt, r))
}

/// Linear-interpolation crossing of `R = 1` after the last node with `R >= 1`.
pub fn locate_transition(r: &[f64], g: &Grid) -> Transition {
    let n = r.len();
    match r.iter().rposition(|v| *v >= 1.0) {
        None => Transition::LeftOfGrid,
        Some(m) if m + 1 == n => Transition::RightOfGrid,
        Some(m) => {
            let theta = (r[m] - 1.0) / (r[m] - r[m + 1]);
            Transition::Interior {
                m,
                theta,
                x0: g.x(m) + theta * g.h(),
            }
        }
    }
}

/// `int s* (-F')`, with `F'` by central differences, clamped to `[0, 1 + 1e-6]`.
pub fn compute_gamma(s_star: &[f64], f: &[f64], g: &Grid) -> Result<f64> {
    g.check_len(s_star)?;
    let df = central_first_derivative(f, g)?;
    let u: Vec<f64> = s_star.iter().zip(&df).map(|(s, d)| -s * d).collect();
    Ok(trapezoid(&u, g, 0, g.len() - 1)?.clamp(0.0, 1.0 + 1e-6))
}

/// Accumulated mass at node `i` in integrated-by-parts form anchored at node `m`:
/// `1 - F_i R_i + sum_{j=m}^{i-1} h (R'_j F_j + R'_{j+1} F_{j+1}) / 2`, and
/// `1 - F_i` for `i < m`.
pub fn source_mass(f: &[f64], r: &[f64], m: usize, i: usize, g: &Grid) -> Result<f64> {
    g.check_len(f)?;
    g.check_len(r)?;
    if m >= g.len() || i >= g.len() {
        return Err(Error::Index {
            what: format!("anchor {m}, node {i} on {} nodes", g.len()),
        });
    }
    if i < m {
        return Ok(1.0 - f[i]);
    }
    let dr = central_first_derivative(r, g)?;
    let u: Vec<f64> = dr.iter().zip(f).map(|(d, f)| d * f).collect();
    Ok(1.0 - f[i] * r[i] + trapezoid(&u, g, m, i)?)
}

/// Mass at every node, anchored at the interpolated transition point.
///
/// Returns `(M, S, first)`: nodes `i < first` use `M_i = 1 - F_i`; the rest use
/// `M_i = S_i - F_i R_i` where `S` carries the anchor constant plus the
/// accumulated integral of `R' F`.
pub(crate) fn mass_profile(
    f: &[f64],
    r: &[f64],
    dr: &[f64],
    tr: &Transition,
    g: &Grid,
) -> (Vec<f64>, Vec<f64>, usize) {
    let n = f.len();
    let h = g.h();
    let mut s = vec![0.0; n];
    let first = match *tr {
        Transition::RightOfGrid => n,
        Transition::LeftOfGrid => {
            s[0] = r[0];
            0
        }
        Transition::Interior { m, theta, .. } => {
            let w = 0.5 * (1.0 - theta) * h;
            s[m + 1] =
                1.0 + w * ((1.0 - theta) * dr[m] * f[m] + (1.0 + theta) * dr[m + 1] * f[m + 1]);
            m + 1
        }
    };
    for i in first.max(1)..n {
        if i > first {
            s[i] = s[i - 1] + 0.5 * h * (dr[i - 1] * f[i - 1] + dr[i] * f[i]);
        }
    }
    let m = (0..n)
        .map(|i| {
            if i < first {
                1.0 - f[i]
            } else {
                s[i] - f[i] * r[i]
            }
        })
        .collect();
    (m, s, first)
}

/// Builds `R`, `s*`, the transition and `gamma` from `Q'` and `F`.
pub fn coupling_state(
    qprime: &[f64],
    f: &[f64],
    g: &Grid,
    p: &ModelParams,
) -> Result<CouplingState> {
    let (rtilde, r) = compute_rtilde(qprime, f, g, p)?;
    state_from_r(rtilde, r, f, g)
}

pub(crate) fn state_from_r(
    rtilde: Vec<f64>,
    r: Vec<f64>,
    f: &[f64],
    g: &Grid,
) -> Result<CouplingState> {
    let s_star: Vec<f64> = r.iter().map(|v| policy_s(*v)).collect();
    let transition = locate_transition(&r, g);
    let gamma = compute_gamma(&s_star, f, g)?;
    Ok(CouplingState {
        rtilde,
        r,
        s_star,
        transition,
        gamma,
    })
}
