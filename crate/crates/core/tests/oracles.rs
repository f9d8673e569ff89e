mod common;

use mfwave::coupling::locate_transition;
use mfwave::front::{coupled_f_inner, Source};
use mfwave::grid::{central_first_derivative, trapezoid};
use mfwave::hjb::{analytic_g_solution, solve_qtilde, solve_rescaled, RobinData};
use mfwave::kpp::solve_kpp;
use mfwave::rescaling::{build_g_tables, build_phi_tables, g_point, phi_point};
use mfwave::wave::{solve_coupled_with, SolveOptions};
use mfwave::{Grid, ModelParams, SolverConfig};

use common::{reference, reference_grid, sup_diff};

#[test]
fn value_solve_matches_closed_form() {
    let g = reference_grid();
    let p = ModelParams::default();
    let c = 2.4325;
    let t = build_phi_tables(&build_g_tables(&g), c, &p).unwrap();
    // R = 0 gives H = 1, so the source is e^x.
    let v = solve_qtilde(&vec![0.0; g.len()], &g, &p, &t).unwrap();
    let exact = analytic_g_solution(c, &g, &p).unwrap();
    let exact_tilde: Vec<f64> = exact.iter().zip(&t.g).map(|(u, w)| u * w).collect();
    let err = sup_diff(&v.qtilde, &exact_tilde);
    assert!(err <= 1e-4, "sup error {err}");
    assert!(v.diagonally_dominant);
}

fn mms_error(h: f64) -> f64 {
    let g = Grid::new(4.0, h).unwrap();
    let p = ModelParams::default();
    let c = 2.5;
    let t = build_phi_tables(&build_g_tables(&g), c, &p).unwrap();
    let u = |x: f64| x.sin() + 2.0 + 0.1 * x * x;
    let du = |x: f64| x.cos() + 0.2 * x;
    let d2u = |x: f64| -x.sin() + 0.2;
    let src: Vec<f64> = g
        .nodes()
        .into_iter()
        .map(|x| {
            let (w, w1, w2) = g_point(x);
            let (phi1, phi2) = phi_point(w, w1, w2, c, &p);
            phi1 * u(x) + phi2 * du(x) - p.kappa * d2u(x)
        })
        .collect();
    let a = g.a();
    let sigma = t.g1[0] / t.g[0];
    let bc = RobinData {
        left: du(-a) - sigma * u(-a),
        right: du(a),
    };
    let v = solve_rescaled(&src, &g, &p, &t, bc).unwrap();
    sup_diff(&v.qtilde, &g.map(u))
}

#[test]
fn manufactured_solution_is_second_order() {
    let e: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|h| mms_error(*h)).collect();
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "errors {e:?}, order {order}");
    }
}

#[test]
fn kpp_speed_near_linear_speed() {
    let g = reference_grid();
    let p = ModelParams::default();
    let w = solve_kpp(&g, &p, &SolverConfig::default()).unwrap();
    assert!((w.c - 2.0 * 2f64.sqrt()).abs() <= 0.05, "c = {}", w.c);
    assert!((w.f[g.center()] - 0.5).abs() <= 1e-8);
    assert!(w.f.windows(2).all(|s| s[1] <= s[0]));
}

#[test]
fn frozen_policy_reproduces_kpp_exactly() {
    let g = Grid::new(30.0, 0.02).unwrap();
    let p = ModelParams::default();
    let cfg = SolverConfig::default();
    let kpp = solve_kpp(&g, &p, &cfg).unwrap();
    let opts = SolveOptions {
        freeze_policy: true,
        ..Default::default()
    };
    let frozen = solve_coupled_with(&g, &p, &cfg, &opts).unwrap();
    assert_eq!(frozen.profile.c.to_bits(), kpp.c.to_bits());
    assert!(frozen
        .profile
        .f
        .iter()
        .zip(&kpp.f)
        .all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn one_more_sweep_is_a_fixed_point() {
    let s = reference();
    let g = &s.grid;
    let p = &s.params;
    let r = &s.coupling.r;
    let dr = central_first_derivative(r, g).unwrap();
    let src = Source::Coupled {
        r,
        dr: &dr,
        transition: locate_transition(r, g),
    };
    let next = coupled_f_inner(&s.profile.f, &src, s.profile.c, g, p).unwrap();
    let d = sup_diff(&next, &s.profile.f);
    assert!(
        d <= SolverConfig::default().tol_profile,
        "sweep moved F by {d}"
    );
}

#[test]
fn summed_front_equation_balances() {
    // Summing h times the interior rows telescopes to
    // c (F(-a) - F(a)) + kappa (F'(-a) - F'(a)) = alpha int F M.
    let s = reference();
    let g = &s.grid;
    let f = &s.profile.f;
    let c = s.profile.c;
    let p = &s.params;
    let n = g.len();
    let df = central_first_derivative(f, g).unwrap();
    let flux: Vec<f64> = df
        .iter()
        .zip(&s.coupling.s_star)
        .map(|(d, w)| -d * w)
        .collect();
    let mut mass = vec![0.0; n];
    for i in 1..n {
        mass[i] = mass[i - 1] + 0.5 * g.h() * (flux[i - 1] + flux[i]);
    }
    let fm: Vec<f64> = f.iter().zip(&mass).map(|(a, b)| a * b).collect();
    let lhs = c * (f[0] - f[n - 1]) + p.kappa * (df[0] - df[n - 1]);
    let rhs = p.alpha * trapezoid(&fm, g, 0, n - 1).unwrap();
    assert!((lhs - rhs).abs() <= g.h(), "{lhs} vs {rhs}");
}
