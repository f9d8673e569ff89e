#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

use std::sync::OnceLock;

use mfwave::wave::{solve_coupled, CoupledSolution};
use mfwave::{Grid, ModelParams, SolverConfig};

pub fn reference_grid() -> Grid {
    Grid::new(40.0, 0.02).unwrap()
}

/// Coupled solution at `kappa = 1, alpha = 2, rho = 10, a = 40, h = 0.02`.
pub fn reference() -> &'static CoupledSolution {
    static SOL: OnceLock<CoupledSolution> = OnceLock::new();
    SOL.get_or_init(|| {
        solve_coupled(
            &reference_grid(),
            &ModelParams::default(),
            &SolverConfig::default(),
        )
        .unwrap()
    })
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        m.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let l = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= l * m[k][j];
            }
            b[i] -= l * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / m[i][i];
    }
    x
}
