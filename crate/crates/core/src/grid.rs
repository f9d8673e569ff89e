//! Uniform grid on `[-a, a]` and the discrete calculus built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on `2a/h` being an even integer.
const SNAP_TOL: f64 = 1e-9;

/// Uniform discretization of `[-a, a]` with step `h`; the origin is always a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    a: f64,
    h: f64,
    n: usize,
}

impl Grid {
    pub fn new(a: f64, h: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Grid(format!(
                "half-width must be positive, got a = {a}"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Grid(format!("step must be positive, got h = {h}")));
        }
        let cells = 2.0 * a / h;
        let rounded = cells.round();
        if (cells - rounded).abs() > SNAP_TOL * cells.max(1.0) {
            return Err(Error::Grid(format!(
                "2a/h = {cells} is not an integer (a = {a}, h = {h})"
            )));
        }
        let cells = rounded as usize;
        if !cells.is_multiple_of(2) {
            return Err(Error::Grid(format!(
                "2a/h = {cells} is odd, so x = 0 would not be a node"
            )));
        }
        let n = cells + 1;
        if n < 5 {
            return Err(Error::Grid(format!("need at least 5 points, got {n}")));
        }
        Ok(Self { a, h, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Index of the node at `x = 0`.
    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Node abscissa. Nodes are placed symmetrically about the center so that
    /// `x(center) == 0.0` exactly.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.center() as f64) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Evaluates `f` at every node.
    pub fn map<F: FnMut(f64) -> f64>(&self, mut f: F) -> Vec<f64> {
        (0..self.n).map(|i| f(self.x(i))).collect()
    }

    pub(crate) fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: u.len(),
            });
        }
        Ok(())
    }
}

/// Central differences in the interior, one-sided three-point stencils at
/// both ends. Second-order accurate everywhere.
pub fn central_first_derivative(u: &[f64], g: &Grid) -> Result<Vec<f64>> {
    g.check_len(u)?;
    let n = u.len();
    let inv2h = 0.5 / g.h();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (u[i + 1] - u[i - 1]) * inv2h;
    }
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2h;
    d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv2h;
    Ok(d)
}

/// Composite trapezoid rule over nodes `i_from..=i_to`.
pub fn trapezoid(u: &[f64], g: &Grid, i_from: usize, i_to: usize) -> Result<f64> {
    g.check_len(u)?;
    if i_from > i_to || i_to >= g.len() {
        return Err(Error::Index {
            what: format!("trapezoid range {i_from}..={i_to} on {} nodes", g.len()),
        });
    }
    let h = g.h();
    Ok((i_from..i_to).map(|j| 0.5 * h * (u[j] + u[j + 1])).sum())
}

/// `out[i] = trapezoid(u, i, n-1)`, accumulated from the right end.
pub fn trapezoid_from_right(u: &[f64], g: &Grid) -> Result<Vec<f64>> {
    g.check_len(u)?;
    let n = u.len();
    let h = g.h();
    let mut out = vec![0.0; n];
    for i in (0..n - 1).rev() {
        out[i] = out[i + 1] + 0.5 * h * (u[i] + u[i + 1]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_rejects_odd_cell_count() {
        assert!(Grid::new(1.0, 2.0 / 3.0).is_err());
        assert!(Grid::new(1.0, 0.3).is_err());
        assert!(Grid::new(1.0, 0.5).is_ok());
        assert!(Grid::new(1.0, 1.0).is_err(), "only 3 points");
        assert!(Grid::new(-1.0, 0.1).is_err());
    }

    #[test]
    fn grid_endpoints_and_origin() {
        let g = Grid::new(40.0, 0.02).unwrap();
        assert_eq!(g.len(), 4001);
        assert_eq!(g.x(g.center()), 0.0);
        assert_abs_diff_eq!(g.x(0), -40.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.x(g.len() - 1), 40.0, epsilon = 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = Grid::new(3.0, 0.25).unwrap();
        let d = central_first_derivative(&vec![5.0; g.len()], &g).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn derivative_exact_on_linears() {
        let g = Grid::new(1.0, 0.5).unwrap();
        let d = central_first_derivative(&g.nodes(), &g).unwrap();
        for v in d {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn derivative_exact_on_quadratics() {
        // (x+h)^2 - (x-h)^2 = 4xh, so the central quotient is exactly 2x;
        // the one-sided stencils are exact on quadratics as well.
        let g = Grid::new(1.0, 0.1).unwrap();
        let u = g.map(|x| x * x);
        let d = central_first_derivative(&u, &g).unwrap();
        for (i, v) in d.iter().enumerate() {
            assert_abs_diff_eq!(*v, 2.0 * g.x(i), epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_length_mismatch() {
        let g = Grid::new(1.0, 0.5).unwrap();
        assert!(matches!(
            central_first_derivative(&[1.0, 2.0], &g),
            Err(Error::Dimension {
                expected: 5,
                got: 2
            })
        ));
    }

    #[test]
    fn trapezoid_constant_and_empty() {
        let g = Grid::new(2.5, 0.1).unwrap();
        let one = vec![1.0; g.len()];
        assert_abs_diff_eq!(
            trapezoid(&one, &g, 0, g.len() - 1).unwrap(),
            5.0,
            epsilon = 1e-12
        );
        assert_eq!(trapezoid(&one, &g, 7, 7).unwrap(), 0.0);
        assert!(trapezoid(&one, &g, 3, g.len()).is_err());
        assert!(trapezoid(&one, &g, 4, 3).is_err());
    }

    #[test]
    fn trapezoid_exponential_on_unit_interval() {
        // Integrate e^x over [0, 1] using the right half of a grid on [-1, 1].
        // Error bound (h^2/12) * e * 1 ~ 2.3e-5.
        let g = Grid::new(1.0, 0.01).unwrap();
        let u = g.map(f64::exp);
        let v = trapezoid(&u, &g, g.center(), g.len() - 1).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::E - 1.0, epsilon = 2e-5);
    }

    #[test]
    fn right_accumulation_matches_direct_sums() {
        let g = Grid::new(2.0, 0.25).unwrap();
        let u = g.map(|x| x.sin() + 0.3 * x);
        let acc = trapezoid_from_right(&u, &g).unwrap();
        for i in 0..g.len() {
            let direct = trapezoid(&u, &g, i, g.len() - 1).unwrap();
            assert_abs_diff_eq!(acc[i], direct, epsilon = 1e-13);
        }
    }
}
