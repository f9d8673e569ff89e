//! Banded linear solvers: scalar tridiagonal (Thomas) and 2x2 block tridiagonal.

use crate::error::{Error, Result};

/// `sub[i] u[i-1] + diag[i] u[i] + sup[i] u[i+1] = rhs[i]`.
///
/// `sub[0]` and `sup[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn zeros(n: usize) -> Self {
        Self {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn check(&self) -> Result<()> {
        let n = self.diag.len();
        for len in [self.sub.len(), self.sup.len(), self.rhs.len()] {
            if len != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: len,
                });
            }
        }
        Ok(())
    }

    /// Matrix-vector product with the assembled operator.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check()?;
        let n = self.len();
        if u.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: u.len(),
            });
        }
        Ok((0..n)
            .map(|i| {
                let mut v = self.diag[i] * u[i];
                if i > 0 {
                    v += self.sub[i] * u[i - 1];
                }
                if i + 1 < n {
                    v += self.sup[i] * u[i + 1];
                }
                v
            })
            .collect())
    }

    /// Rows where `|diag| < |sub| + |sup|`. Empty means weakly dominant.
    pub fn dominance_violations(&self) -> Vec<usize> {
        let n = self.len();
        (0..n)
            .filter(|&i| {
                let off = if i > 0 { self.sub[i].abs() } else { 0.0 }
                    + if i + 1 < n { self.sup[i].abs() } else { 0.0 };
                self.diag[i].abs() < off
            })
            .collect()
    }

    pub fn is_diagonally_dominant(&self) -> bool {
        self.dominance_violations().is_empty()
    }
}

/// Thomas elimination without pivoting.
pub fn solve_tridiagonal(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    sys.check()?;
    let n = sys.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = sys.diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::Singular { row: 0 });
    }
    c[0] = sys.sup[0] / pivot;
    d[0] = sys.rhs[0] / pivot;
    for i in 1..n {
        pivot = sys.diag[i] - sys.sub[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Singular { row: i });
        }
        c[i] = if i + 1 < n { sys.sup[i] / pivot } else { 0.0 };
        d[i] = (sys.rhs[i] - sys.sub[i] * d[i - 1]) / pivot;
    }
    let mut u = d;
    for i in (0..n - 1).rev() {
        u[i] -= c[i] * u[i + 1];
    }
    Ok(u)
}

pub(crate) type Mat2 = [[f64; 2]; 2];
pub(crate) type Vec2 = [f64; 2];

pub(crate) const ZERO2: Mat2 = [[0.0; 2]; 2];

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = ZERO2;
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

fn mulv(a: &Mat2, v: &Vec2) -> Vec2 {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

fn inv(a: &Mat2, row: usize) -> Result<Mat2> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Singular { row });
    }
    Ok([
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ])
}

/// Block tridiagonal system with 2x2 blocks, solved for several right-hand
/// sides at once by block elimination without pivoting.
#[derive(Debug, Clone)]
pub(crate) struct BlockTridiagonal {
    pub lower: Vec<Mat2>,
    pub diag: Vec<Mat2>,
    pub upper: Vec<Mat2>,
}

impl BlockTridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![ZERO2; n],
            diag: vec![ZERO2; n],
            upper: vec![ZERO2; n],
        }
    }

    pub fn solve<const K: usize>(&self, rhs: &[[Vec2; K]]) -> Result<Vec<[Vec2; K]>> {
        let n = self.diag.len();
        if rhs.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: rhs.len(),
            });
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        // Forward sweep stores D'^{-1} U and D'^{-1} r.
        let mut cu: Vec<Mat2> = vec![ZERO2; n];
        let mut dr: Vec<[Vec2; K]> = vec![[[0.0; 2]; K]; n];
        let mut prev_inv = inv(&self.diag[0], 0)?;
        cu[0] = mul(&prev_inv, &self.upper[0]);
        for k in 0..K {
            dr[0][k] = mulv(&prev_inv, &rhs[0][k]);
        }
        for i in 1..n {
            let l = &self.lower[i];
            let lc = mul(l, &cu[i - 1]);
            let mut d = self.diag[i];
            for r in 0..2 {
                for c in 0..2 {
                    d[r][c] -= lc[r][c];
                }
            }
            prev_inv = inv(&d, 2 * i)?;
            cu[i] = mul(&prev_inv, &self.upper[i]);
            for k in 0..K {
                let ld = mulv(l, &dr[i - 1][k]);
                let r = [rhs[i][k][0] - ld[0], rhs[i][k][1] - ld[1]];
                dr[i][k] = mulv(&prev_inv, &r);
            }
        }
        let mut y = dr;
        for i in (0..n - 1).rev() {
            for k in 0..K {
                let cy = mulv(&cu[i], &y[i + 1][k]);
                y[i][k][0] -= cy[0];
                y[i][k][1] -= cy[1];
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_system() {
        let mut s = TridiagonalSystem::zeros(3);
        s.diag = vec![1.0; 3];
        s.rhs = vec![1.0, 2.0, 3.0];
        assert_eq!(solve_tridiagonal(&s).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn harmonic_interpolant() {
        let n = 11;
        let mut s = TridiagonalSystem::zeros(n);
        for i in 1..n - 1 {
            s.sub[i] = -1.0;
            s.diag[i] = 2.0;
            s.sup[i] = -1.0;
        }
        s.diag[0] = 1.0;
        s.rhs[0] = 1.0;
        s.diag[n - 1] = 1.0;
        let u = solve_tridiagonal(&s).unwrap();
        for (i, v) in u.iter().enumerate() {
            assert_abs_diff_eq!(*v, 1.0 - i as f64 / 10.0, epsilon = 1e-14);
        }
        assert!(s.is_diagonally_dominant());
    }

    #[test]
    fn zero_pivot_names_row() {
        let mut s = TridiagonalSystem::zeros(3);
        s.diag = vec![1.0, 1.0, 1.0];
        s.sub[1] = 1.0;
        s.sup[0] = 1.0;
        assert!(matches!(
            solve_tridiagonal(&s),
            Err(Error::Singular { row: 1 })
        ));
    }

    #[test]
    fn dominance_report() {
        let mut s = TridiagonalSystem::zeros(3);
        s.diag = vec![1.0, 1.0, 1.0];
        s.sub[1] = 0.5;
        s.sup[1] = 0.5;
        assert!(s.is_diagonally_dominant());
        s.diag[1] = 0.9;
        s.sup[1] = 0.6;
        assert_eq!(s.dominance_violations(), vec![1]);
    }

    #[test]
    fn length_mismatch() {
        let mut s = TridiagonalSystem::zeros(3);
        s.rhs.pop();
        assert!(matches!(
            solve_tridiagonal(&s),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn block_solver_matches_scalar_on_decoupled_blocks() {
        let n = 6;
        let mut b = BlockTridiagonal::zeros(n);
        let mut s = TridiagonalSystem::zeros(n);
        let mut rhs = vec![[[0.0; 2]; 1]; n];
        for i in 0..n {
            s.diag[i] = 4.0 + i as f64;
            s.sub[i] = -1.0;
            s.sup[i] = 1.5;
            s.rhs[i] = (i as f64).sin();
            b.diag[i] = [[s.diag[i], 0.0], [0.0, 2.0]];
            b.lower[i] = [[-1.0, 0.0], [0.0, 0.0]];
            b.upper[i] = [[1.5, 0.0], [0.0, 0.0]];
            rhs[i][0] = [s.rhs[i], 2.0 * i as f64];
        }
        let u = solve_tridiagonal(&s).unwrap();
        let y = b.solve(&rhs).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(y[i][0][0], u[i], epsilon = 1e-14);
            assert_abs_diff_eq!(y[i][0][1], i as f64, epsilon = 1e-14);
        }
    }
}
