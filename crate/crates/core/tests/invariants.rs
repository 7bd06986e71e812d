use std::f64::consts::PI;

use brflow::bench::{self, builtin_case, CASE_IDS};
use brflow::fespace::{bdm_interpolate, FeField, Space};
use brflow::forms::{bernoulli, eafe_local, EafeDiagonal};
use brflow::mesh::{uniform_rectangle_mesh, Pattern};
use brflow::quadrature::QuadratureRule;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bernoulli_shift_identity(s in -700.0f64..700.0) {
        let (a, b) = (bernoulli(s).unwrap(), bernoulli(-s).unwrap());
        prop_assert!(a > 0.0 && b > 0.0);
        prop_assert!((b - a - s).abs() <= 1e-12 * (1.0 + b.abs()));
    }

    #[test]
    fn bdm_interpolant_preserves_cell_divergence(
        nx in 1usize..4,
        ny in 1usize..4,
        crisscross in any::<bool>(),
        seed in proptest::collection::vec(-1.0f64..1.0, 64),
    ) {
        let pattern = if crisscross { Pattern::Crisscross } else { Pattern::RightDiagonal };
        let m = uniform_rectangle_mesh((0.0, 2.0), (-1.0, 0.5), nx, ny, pattern).unwrap();
        let n = Space::BrFull.len(&m);
        let v = FeField::new(&m, Space::BrFull, (0..n).map(|i| seed[i % seed.len()] * (1.0 + i as f64).sqrt()).collect()).unwrap();
        let pv = bdm_interpolate(&v).unwrap();
        let rule = QuadratureRule::degree4(2);
        for c in 0..m.n_cells() {
            let mean: f64 = rule.iter().map(|(b, w)| w * v.evaluate(c, b).unwrap().divergence()).sum();
            prop_assert!((pv.cell_divergence(c) - mean).abs() <= 1e-10 * (1.0 + mean.abs()));
        }
    }

    #[test]
    fn eafe_rows_annihilate_constants(
        bx in -50.0f64..50.0,
        by in -50.0f64..50.0,
        log_eps in -8.0f64..0.0,
        cell in 0usize..18,
    ) {
        let m = uniform_rectangle_mesh((0.0, 1.0), (0.0, 1.0), 3, 3, Pattern::RightDiagonal).unwrap();
        let eps = 10f64.powf(log_eps);
        let l = eafe_local(&m, cell, &[bx, by, 0.0], eps, EafeDiagonal::RowSum).unwrap();
        for i in 0..3 {
            let scale: f64 = (0..3).map(|j| l[i][j].abs()).sum::<f64>().max(f64::MIN_POSITIVE);
            prop_assert!((0..3).map(|j| l[i][j]).sum::<f64>().abs() <= 1e-12 * scale);
            for j in (0..3).filter(|&j| j != i) {
                prop_assert!(l[i][j] <= 0.0);
            }
        }
    }
}

#[test]
fn kovasznay_satisfies_the_equations_analytically() {
    for nu in [1.0, 1e-1, 1e-3, 1e-4] {
        let e = bench::kovasznay(nu);
        let l = bench::kovasznay_lambda(nu);
        let k = l * l - 4.0 * PI * PI;
        for &(x, y) in &[(-0.5, 0.0), (0.1, 0.3), (0.7, 1.2), (1.5, 2.0), (1.3, 0.77)] {
            let p = [x, y, 0.0];
            let u = (e.velocity)(&p, 0.0);
            let g = (e.gradient)(&p, 0.0);
            let ex = (l * x).exp();
            let lap = [-ex * (2.0 * PI * y).cos() * k, l / (2.0 * PI) * ex * (2.0 * PI * y).sin() * k];
            let grad_p = [-l * (2.0 * l * x).exp(), 0.0];
            for c in 0..2 {
                let conv = g[c][0] * u[0] + g[c][1] * u[1];
                let r = -nu * lap[c] + conv + grad_p[c];
                let scale = 1.0 + (nu * lap[c]).abs() + conv.abs() + grad_p[c].abs();
                assert!(r.abs() <= 1e-6 * scale, "nu {nu}, ({x}, {y}), component {c}: residual {r:e}");
            }
            assert!((g[0][0] + g[1][1]).abs() <= 1e-12 * (1.0 + u[0].abs()));
        }
    }
}

#[test]
fn convergence_tables_are_reproducible() {
    let case = builtin_case("kovasznay").unwrap();
    let opts = case.scheme_options();
    let table = || {
        let rows = bench::run_convergence(&case, "eafe", 1e-2, 1..=2, &opts, None).unwrap();
        let mut out = Vec::new();
        bench::write_csv(&mut out, &rows).unwrap();
        out
    };
    let a = table();
    assert_eq!(a, table());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.split(',').count() == 13));
}

#[test]
fn every_case_declares_consistent_data() {
    for id in CASE_IDS {
        let case = builtin_case(id).unwrap();
        assert_eq!(case.id, *id);
        assert!(case.nus.contains(&case.default_nu), "{id}");
        assert!(case.schemes.contains(&case.default_scheme()), "{id}");
        for s in &case.schemes {
            bench::validate_scheme(&case, s).unwrap();
        }
        let m = case.mesh.build(1).unwrap();
        assert!((m.total_measure() - case.mesh.measure()).abs() <= 1e-12 * case.mesh.measure(), "{id}");
        assert_eq!(m.dim(), case.mesh.dim());
        case.problem(case.default_nu).unwrap();
        if let Some(t) = &case.time {
            assert!(t.report_times.iter().all(|&r| r > 0.0 && r <= t.t_end + 1e-12));
        }
    }
}
