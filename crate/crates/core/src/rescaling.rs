//! The weight `g` with `Qtilde = g Q`, and the coefficients of the rescaled
//! value equation `phi1 Qt + phi2 Qt' - kappa Qt'' = g e^x H(R)`.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::ModelParams;

/// Weight and its analytic derivatives at a point.
///
/// Left branch `1 + 2 atan(1) - 2 atan(x + 1)`, right branch `e^{-x}`.
/// The right branch is used at `x = 0`.
pub fn g_point(x: f64) -> (f64, f64, f64) {
    if x < 0.0 {
        let y = x + 1.0;
        let q = 1.0 + y * y;
        (
            1.0 + 2.0 * 1f64.atan() - 2.0 * y.atan(),
            -2.0 / q,
            4.0 * y / (q * q),
        )
    } else {
        let e = (-x).exp();
        (e, -e, e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GTables {
    pub g: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
}

pub fn build_g_tables(grid: &Grid) -> GTables {
    let n = grid.len();
    let mut t = GTables {
        g: Vec::with_capacity(n),
        g1: Vec::with_capacity(n),
        g2: Vec::with_capacity(n),
    };
    for x in grid.nodes() {
        let (g, g1, g2) = g_point(x);
        t.g.push(g);
        t.g1.push(g1);
        t.g2.push(g2);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescaleTables {
    pub g: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
}

/// `phi1 = rho - c - c g1/g - kappa (2 g1^2 - g g2)/g^2`, `phi2 = c + 2 kappa g1/g`.
pub fn phi_point(g: f64, g1: f64, g2: f64, c: f64, p: &ModelParams) -> (f64, f64) {
    let s = g1 / g;
    let phi1 = p.rho - c - c * s - p.kappa * (2.0 * s * s - g2 / g);
    let phi2 = c + 2.0 * p.kappa * s;
    (phi1, phi2)
}

pub fn build_phi_tables(t: &GTables, c: f64, p: &ModelParams) -> Result<RescaleTables> {
    if !c.is_finite() {
        return Err(Error::Parameter(format!("speed must be finite, got {c}")));
    }
    if p.rho <= p.kappa {
        return Err(Error::Parameter(format!(
            "rho = {} must exceed kappa = {}",
            p.rho, p.kappa
        )));
    }
    let n = t.g.len();
    let mut phi1 = Vec::with_capacity(n);
    let mut phi2 = Vec::with_capacity(n);
    for i in 0..n {
        // On the right branch g1/g = -1 and g2/g = 1 exactly.
        let (a, b) = if t.g1[i] == -t.g[i] && t.g2[i] == t.g[i] {
            (p.rho - p.kappa, c - 2.0 * p.kappa)
        } else {
            phi_point(t.g[i], t.g1[i], t.g2[i], c, p)
        };
        phi1.push(a);
        phi2.push(b);
    }
    Ok(RescaleTables {
        g: t.g.clone(),
        g1: t.g1.clone(),
        g2: t.g2.clone(),
        phi1,
        phi2,
    })
}
