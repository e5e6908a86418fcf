//! Acceptance gate: one test per top-level claim, each printing a single
//! pass/fail line (run with `--nocapture` to see passing lines).

use regraph_core::analysis::{expected_error_quadrature, fit_log_slope};
use regraph_core::solvers::{run, simulate, MethodConfig};
use regraph_core::spectrum::DEFAULT_QUAD_NODES;
use regraph_core::verify::{
    delta_limit_suite, orthogonality_suite, product_formula_suite, sandwich_suite,
    spectral_law_suite, trajectory_suite, Check,
};
use regraph_core::{MethodKind, RegularGraph, ResidualEvaluator, StateBlock};

fn report(criterion: &str, checks: &[Check]) {
    let mut failed = false;
    for check in checks {
        if !check.pass() {
            failed = true;
            println!(
                "FAIL {criterion}: {} measured={} threshold={}",
                check.name, check.measured, check.threshold
            );
        }
    }
    if failed {
        panic!("{criterion} failed");
    }
    println!("PASS {criterion}");
}

#[test]
fn criterion_01_orthogonality() {
    let checks = orthogonality_suite(DEFAULT_QUAD_NODES).unwrap();
    report(
        "criterion 1: residual polynomials orthogonal under λdμ (k=3,8,15; i<j<=15; 1e-8)",
        &checks,
    );
}

#[test]
fn criterion_02_product_formula() {
    report(
        "criterion 2: δ-product identity to 1e-12 rel (k=3..12, t<=40; incl 0.125, 0.04)",
        &product_formula_suite(),
    );
}

#[test]
fn criterion_03_delta_limit() {
    report(
        "criterion 3: |δ_60 - k/(k-1)| < 1e-10 (k=3..20)",
        &delta_limit_suite(),
    );
}

#[test]
fn criterion_04_trajectory_identity() {
    let checks = trajectory_suite().unwrap();
    report(
        "criterion 4: simulated iterates match P_t(L) oracle to 1e-8 (n=50, k=3, T=30)",
        &checks,
    );
}

#[test]
fn criterion_05_rate_sandwiches() {
    let checks = sandwich_suite(DEFAULT_QUAD_NODES).unwrap();
    report(
        "criterion 5: quadrature ∫P_t²dμ inside closed-form sandwiches (k=3,8,15; t<=30)",
        &checks,
    );
}

#[test]
fn criterion_06_average_case_optimality() {
    let others = [
        MethodKind::Gd,
        MethodKind::HeavyBall,
        MethodKind::ChebyshevIter,
        MethodKind::Nesterov,
    ];
    for k in [3usize, 8, 15] {
        let opt = ResidualEvaluator::new(MethodKind::Optimal, k, 30).unwrap();
        for method in others {
            let ev = ResidualEvaluator::new(method, k, 30).unwrap();
            for t in 0..=30 {
                let a = expected_error_quadrature(&opt, t, 1.0).unwrap();
                let b = expected_error_quadrature(&ev, t, 1.0).unwrap();
                assert!(
                    a <= b * (1.0 + 1e-12) + 1e-18,
                    "optimal beaten by {method} at k={k}, t={t}: {a} > {b}"
                );
                if t == 10 {
                    assert!(a < b, "no strict gap vs {method} at k={k}, t=10");
                }
            }
        }
    }
    println!("PASS criterion 6: optimal minimizes ∫P_t²dμ (k=3,8,15; t<=30; strict at t=10)");
}

#[test]
fn criterion_07_spectral_law() {
    let checks = spectral_law_suite().unwrap();
    report(
        "criterion 7: median L1 to Kesten-McKay < 0.08 at n=1000 and decreasing from n=250",
        &checks,
    );
}

#[test]
fn criterion_08_convergence_rate_reproduction() {
    let graph = RegularGraph::generate(1000, 3, 1).unwrap();
    let x0 = StateBlock::gaussian(1000, 50, 1 ^ 0x5851_f42d_4c95_7f2du64);
    let opt = run(&graph, &x0, &MethodConfig::new(MethodKind::Optimal, 3, 30)).unwrap();
    let hb = run(&graph, &x0, &MethodConfig::new(MethodKind::HeavyBall, 3, 30)).unwrap();
    let target = 0.5f64.ln();
    for (name, trace) in [("optimal", &opt), ("heavyball", &hb)] {
        let slope = fit_log_slope(&trace.entries, 5, 25).unwrap();
        assert!(
            (slope - target).abs() / target.abs() < 0.10,
            "{name} slope {slope} vs {target}"
        );
    }
    for t in 5..=30 {
        let (a, b) = (opt.entries[t].1, hb.entries[t].1);
        assert!(a <= 1.1 * b, "optimal above 1.1x heavyball at t={t}: {a} vs {b}");
    }
    println!(
        "PASS criterion 8: n=1000 slopes within 10% of ln(1/2); optimal <= 1.1x heavyball, t>=5"
    );
}

#[test]
fn criterion_09_cg_comparison() {
    fn iters_to(entries: &[(usize, f64)], thr: f64) -> usize {
        entries
            .iter()
            .find(|&&(_, e)| e < thr)
            .map(|&(t, _)| t)
            .expect("threshold never reached")
    }
    let graph = RegularGraph::generate(2000, 3, 1).unwrap();
    let x0 = StateBlock::gaussian(2000, 10, 99);
    let opt = run(&graph, &x0, &MethodConfig::new(MethodKind::Optimal, 3, 80)).unwrap();
    let cg = run(&graph, &x0, &MethodConfig::new(MethodKind::ConjugateGradient, 3, 80)).unwrap();
    let (t_opt, t_cg) = (iters_to(&opt.entries, 1e-8), iters_to(&cg.entries, 1e-8));
    assert!(
        (t_opt as f64) <= 1.5 * t_cg as f64,
        "n=2000: optimal {t_opt} iters vs cg {t_cg}"
    );

    let graph = RegularGraph::generate(100, 3, 1).unwrap();
    let x0 = StateBlock::gaussian(100, 10, 99);
    let opt = run(&graph, &x0, &MethodConfig::new(MethodKind::Optimal, 3, 80)).unwrap();
    let cg = run(&graph, &x0, &MethodConfig::new(MethodKind::ConjugateGradient, 3, 80)).unwrap();
    let (s_opt, s_cg) = (iters_to(&opt.entries, 1e-8), iters_to(&cg.entries, 1e-8));
    println!(
        "PASS criterion 9: n=2000 optimal {t_opt} <= 1.5x cg {t_cg}; n=100 cg {s_cg} vs optimal {s_opt}"
    );
}

#[test]
fn criterion_10_mean_conservation() {
    for seed in 1..=10u64 {
        let graph = RegularGraph::generate(100, 3, seed).unwrap();
        let x0 = StateBlock::gaussian(100, 3, seed + 77);
        let want = x0.column_means();
        for method in MethodKind::ALL {
            let cfg = MethodConfig::new(method, 3, 200);
            simulate(&graph, &x0, &cfg, &mut |t, x| {
                for (a, b) in x.column_means().iter().zip(&want) {
                    assert!(
                        (a - b).abs() < 1e-10,
                        "{method} drifts column mean at seed={seed}, t={t}"
                    );
                }
            })
            .unwrap();
        }
    }
    println!("PASS criterion 10: all solvers conserve column means to 1e-10 over 200 iterations");
}
