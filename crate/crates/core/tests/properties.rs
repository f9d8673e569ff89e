#![allow(clippy::needless_range_loop)]

mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use mfwave::coupling::locate_transition;
use mfwave::grid::{central_first_derivative, trapezoid, trapezoid_from_right};
use mfwave::hjb::{hamiltonian_dh, hamiltonian_h, policy_s};
use mfwave::kpp::beta_of_c;
use mfwave::rescaling::{build_g_tables, g_point};
use mfwave::tridiag::{solve_tridiagonal, TridiagonalSystem};
use mfwave::{Grid, ModelParams};

use common::dense_solve;

fn dominant_system(n: usize) -> impl Strategy<Value = TridiagonalSystem> {
    (
        prop::collection::vec(-1.0f64..1.0, n),
        prop::collection::vec(-1.0f64..1.0, n),
        prop::collection::vec(0.05f64..2.0, n),
        prop::collection::vec(-10.0f64..10.0, n),
        prop::collection::vec(any::<bool>(), n),
    )
        .prop_map(move |(sub, sup, extra, rhs, neg)| {
            let mut s = TridiagonalSystem::zeros(n);
            for i in 0..n {
                s.sub[i] = if i > 0 { sub[i] } else { 0.0 };
                s.sup[i] = if i + 1 < n { sup[i] } else { 0.0 };
                let d = s.sub[i].abs() + s.sup[i].abs() + extra[i];
                s.diag[i] = if neg[i] { -d } else { d };
                s.rhs[i] = rhs[i];
            }
            s
        })
}

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (2usize..40, prop::sample::select(vec![0.5, 0.25, 0.1, 0.05]))
        .prop_map(|(k, h)| Grid::new(k as f64 * h, h).unwrap())
}

fn dense(s: &TridiagonalSystem) -> Vec<Vec<f64>> {
    let n = s.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = s.diag[i];
        if i > 0 {
            m[i][i - 1] = s.sub[i];
        }
        if i + 1 < n {
            m[i][i + 1] = s.sup[i];
        }
    }
    m
}

proptest! {
    #[test]
    fn thomas_matches_dense_elimination(s in dominant_system(12)) {
        prop_assert!(s.is_diagonally_dominant());
        let u = solve_tridiagonal(&s).unwrap();
        let v = dense_solve(dense(&s), s.rhs.clone());
        for (a, b) in u.iter().zip(&v) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn thomas_reproduces_rhs(s in (2usize..400).prop_flat_map(dominant_system)) {
        let u = solve_tridiagonal(&s).unwrap();
        let back = s.apply(&u).unwrap();
        let scale = s.rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in back.iter().zip(&s.rhs) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn trapezoid_is_additive(
        g in grid_strategy(),
        vals in prop::collection::vec(-1.0f64..1.0, 1601),
        cuts in prop::collection::vec(any::<prop::sample::Index>(), 3),
    ) {
        let u = &vals[..g.len()];
        let mut idx: Vec<usize> = cuts.iter().map(|c| c.index(g.len())).collect();
        idx.sort();
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        let whole = trapezoid(u, &g, i, k).unwrap();
        let parts = trapezoid(u, &g, i, j).unwrap() + trapezoid(u, &g, j, k).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12);
        prop_assert_eq!(trapezoid(u, &g, j, j).unwrap(), 0.0);
    }

    #[test]
    fn right_accumulation_matches_trapezoid(
        g in grid_strategy(),
        vals in prop::collection::vec(-1.0f64..1.0, 1601),
    ) {
        let u = &vals[..g.len()];
        let acc = trapezoid_from_right(u, &g).unwrap();
        for i in (0..g.len()).step_by(7) {
            prop_assert!((acc[i] - trapezoid(u, &g, i, g.len() - 1).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn derivative_is_linear(
        g in grid_strategy(),
        u in prop::collection::vec(-5.0f64..5.0, 1601),
        v in prop::collection::vec(-5.0f64..5.0, 1601),
        s in -3.0f64..3.0,
        t in -3.0f64..3.0,
    ) {
        let n = g.len();
        let w: Vec<f64> = (0..n).map(|i| s * u[i] + t * v[i]).collect();
        let du = central_first_derivative(&u[..n], &g).unwrap();
        let dv = central_first_derivative(&v[..n], &g).unwrap();
        let dw = central_first_derivative(&w, &g).unwrap();
        let scale = 30.0 / g.h();
        for i in 0..n {
            prop_assert!((dw[i] - (s * du[i] + t * dv[i])).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn derivative_exact_on_quadratics(g in grid_strategy(), a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
        let u = g.map(|x| a * x * x + b * x + c);
        let du = central_first_derivative(&u, &g).unwrap();
        for i in 0..g.len() {
            let exact = 2.0 * a * g.x(i) + b;
            prop_assert!((du[i] - exact).abs() <= 1e-9 * (1.0 + g.a() * g.a()) / g.h());
        }
    }

    #[test]
    fn hamiltonian_is_envelope(r in -5.0f64..5.0) {
        // H(r) = max over s in [0,1] of 1 + 2 r s - s^2 for r <= 1, linear beyond.
        let s = policy_s(r);
        prop_assert!((0.0..=1.0).contains(&s));
        if r <= 1.0 {
            let best = (0..=1000).map(|k| {
                let s = k as f64 / 1000.0;
                1.0 + 2.0 * r * s - s * s
            }).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((hamiltonian_h(r) - best).abs() <= 1e-5);
        }
        let e = 1e-6;
        let fd = (hamiltonian_h(r + e) - hamiltonian_h(r - e)) / (2.0 * e);
        if (r - 1.0).abs() > 1e-3 && r.abs() > 1e-3 {
            prop_assert!((fd - hamiltonian_dh(r)).abs() <= 1e-6);
        }
        prop_assert!(hamiltonian_h(r) >= 1.0);
    }

    #[test]
    fn beta_solves_tail_equation(c in 0.05f64..8.0, kappa in 0.2f64..3.0, alpha in 0.2f64..3.0) {
        let p = ModelParams { kappa, alpha, rho: 10.0 * kappa };
        let b = beta_of_c(c, &p).unwrap();
        prop_assert!(b > 0.0);
        if c * c - 4.0 * kappa * alpha > 1e-9 {
            prop_assert!((kappa * b * b - c * b + alpha).abs() <= 1e-9 * (1.0 + c * c));
        } else {
            prop_assert!((b - c / (2.0 * kappa)).abs() <= 1e-4);
        }
    }

    #[test]
    fn rescaling_is_positive_and_smooth(x in -200.0f64..200.0) {
        let (g, g1, g2) = g_point(x);
        prop_assert!(g > 0.0 && g1 < 0.0);
        prop_assert!(g2.is_finite());
    }

    #[test]
    fn transition_brackets_the_crossing(vals in prop::collection::vec(0.0f64..3.0, 41)) {
        let mut r = vals;
        r.sort_by(|a, b| b.total_cmp(a));
        let g = Grid::new(2.0, 0.1).unwrap();
        if let Some(x0) = locate_transition(&r, &g).x0() {
            let m = ((x0 + 2.0) / 0.1).floor() as usize;
            let m = m.min(39);
            prop_assert!(r[m] >= 1.0 - 1e-12 || r[m + 1] < 1.0);
            prop_assert!(x0 >= g.x(0) && x0 <= g.x(40));
        }
    }
}

#[test]
fn rescaling_matches_left_and_right_branches() {
    let (g, g1, _) = g_point(0.0);
    assert_abs_diff_eq!(g, 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(g1, -1.0, epsilon = 1e-15);
    let gl = g_point(-1e-9);
    assert_abs_diff_eq!(gl.0, 1.0, epsilon = 1e-8);
    assert_abs_diff_eq!(gl.1, -1.0, epsilon = 1e-8);
    let t = build_g_tables(&Grid::new(40.0, 0.02).unwrap());
    assert!(t
        .g
        .iter()
        .all(|v| *v > 0.0 && *v < 1.0 + 1.5 * std::f64::consts::PI));
}
