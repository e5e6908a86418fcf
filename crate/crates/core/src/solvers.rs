//! The six first-order consensus methods, run matrix-free on a gossip
//! operator, plus the trajectory-vs-residual-polynomial oracle.

use nalgebra::DMatrix;

use crate::csvio::fmt_g17;
use crate::error::{Error, Result};
use crate::graph::{GossipOperator, RegularGraph, DENSE_EIGEN_CAP};
use crate::poly::{polyak_parameters, DeltaSequence, MethodKind, ResidualEvaluator};
use crate::spectrum::support_bounds;
use crate::state::StateBlock;

/// Any iterate entry beyond this magnitude aborts the run with a divergence
/// flag instead of overflowing.
const DIVERGENCE_GUARD: f64 = 1e150;

/// Configuration for one solver run.
#[derive(Debug, Clone, Copy)]
pub struct MethodConfig {
    pub method: MethodKind,
    /// Graph degree; supplies λ_min/λ_max and δ_t for the
    /// spectrum-parameterized methods.
    pub k: usize,
    pub iterations: usize,
    pub record_every: usize,
}

impl MethodConfig {
    pub fn new(method: MethodKind, k: usize, iterations: usize) -> Self {
        Self {
            method,
            k,
            iterations,
            record_every: 1,
        }
    }

    fn validate(&self, graph: &RegularGraph, x0: &StateBlock) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be >= 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be >= 1".into()));
        }
        if self.k != graph.k() {
            return Err(Error::InvalidParameter(format!(
                "config k={} does not match graph degree {}",
                self.k,
                graph.k()
            )));
        }
        if x0.n() != graph.n() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} rows, graph has {} vertices",
                x0.n(),
                graph.n()
            )));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidParameter("x0 has non-finite entries".into()));
        }
        Ok(())
    }
}

/// Per-iteration normalized consensus error for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub method: MethodKind,
    /// `(t, ‖x_t - x̄_0‖² / ‖x_0 - x̄_0‖²)` at recorded iterations.
    pub entries: Vec<(usize, f64)>,
    pub diverged: bool,
}

impl ConvergenceTrace {
    /// CSV with header `iter,error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,error\n");
        for &(t, e) in &self.entries {
            out.push_str(&format!("{t},{}\n", fmt_g17(e)));
        }
        out
    }
}

/// `‖x - x̄_0‖²_F / ‖x_0 - x̄_0‖²_F` where `x̄_0` broadcasts the column means
/// of `x0`. An already-consensus `x0` reports 0 (the denominator guard).
pub fn consensus_error(x: &StateBlock, x0: &StateBlock) -> f64 {
    debug_assert_eq!(x.n(), x0.n());
    debug_assert_eq!(x.d(), x0.d());
    let means = x0.column_means();
    let denom = x0.squared_deviation_from(&means);
    if denom < 1e-300 {
        return 0.0;
    }
    x.squared_deviation_from(&means) / denom
}

/// Runs the configured method for `cfg.iterations` steps and records the
/// normalized consensus error. `x0` is unmodified.
pub fn run(graph: &RegularGraph, x0: &StateBlock, cfg: &MethodConfig) -> Result<ConvergenceTrace> {
    let mut entries = Vec::new();
    let last = cfg.iterations;
    let diverged = simulate(graph, x0, cfg, &mut |t, x| {
        if t % cfg.record_every == 0 || t == last {
            entries.push((t, consensus_error(x, x0)));
        }
    })?;
    Ok(ConvergenceTrace {
        method: cfg.method,
        entries,
        diverged,
    })
}

/// Drives the update rules, calling `observe(t, x_t)` for `t = 0..=T` (or
/// until the divergence guard trips). Returns whether the run diverged.
pub fn simulate(
    graph: &RegularGraph,
    x0: &StateBlock,
    cfg: &MethodConfig,
    observe: &mut dyn FnMut(usize, &StateBlock),
) -> Result<bool> {
    cfg.validate(graph, x0)?;
    let op = GossipOperator::new(graph);
    let t_max = cfg.iterations;
    let (lo, hi) = support_bounds(cfg.k);
    let gd_step = 2.0 / (hi + lo);
    observe(0, x0);

    match cfg.method {
        MethodKind::Gd => {
            let mut x = x0.clone();
            for t in 1..=t_max {
                let lx = op.apply(&x)?;
                x.axpy(-gd_step, &lx);
                if guard(&x, t, observe) {
                    return Ok(true);
                }
            }
        }
        MethodKind::HeavyBall => {
            let (m, h) = polyak_parameters(cfg.k);
            let mut prev = x0.clone();
            let mut cur = x0.clone();
            let lx = op.apply(&cur)?;
            cur.axpy(-gd_step, &lx);
            if guard(&cur, 1, observe) {
                return Ok(true);
            }
            for t in 2..=t_max {
                let lx = op.apply(&cur)?;
                let next = momentum_step(&cur, &prev, &lx, m, h);
                prev = cur;
                cur = next;
                if guard(&cur, t, observe) {
                    return Ok(true);
                }
            }
        }
        MethodKind::ChebyshevIter => {
            let rho = (hi - lo) / (hi + lo);
            let mut omega = 2.0;
            let mut prev = x0.clone();
            let mut cur = x0.clone();
            let lx = op.apply(&cur)?;
            cur.axpy(-gd_step, &lx);
            if guard(&cur, 1, observe) {
                return Ok(true);
            }
            for t in 2..=t_max {
                omega = 1.0 / (1.0 - rho * rho / 4.0 * omega);
                let lx = op.apply(&cur)?;
                let next = momentum_step(&cur, &prev, &lx, omega - 1.0, omega * gd_step);
                prev = cur;
                cur = next;
                if guard(&cur, t, observe) {
                    return Ok(true);
                }
            }
        }
        MethodKind::Nesterov => {
            let alpha = 1.0 / hi;
            let beta = (hi.sqrt() - lo.sqrt()) / (hi.sqrt() + lo.sqrt());
            let mut x = x0.clone();
            let mut y = x0.clone();
            for t in 1..=t_max {
                let ly = op.apply(&y)?;
                let mut x_next = y.clone();
                x_next.axpy(-alpha, &ly);
                // y_{t+1} = x_{t+1} + β (x_{t+1} - x_t)
                let mut y_next = x_next.clone();
                y_next.axpy(beta, &x_next);
                y_next.axpy(-beta, &x);
                x = x_next;
                y = y_next;
                if guard(&x, t, observe) {
                    return Ok(true);
                }
            }
        }
        MethodKind::Optimal => {
            let delta = DeltaSequence::new(cfg.k, t_max);
            let mut prev = x0.clone();
            let mut cur = x0.clone();
            let lx = op.apply(&cur)?;
            cur.axpy(-delta.get(0), &lx);
            if guard(&cur, 1, observe) {
                return Ok(true);
            }
            for t in 2..=t_max {
                let dt = delta.get(t - 1);
                let lx = op.apply(&cur)?;
                let next = momentum_step(&cur, &prev, &lx, dt - 1.0, dt);
                prev = cur;
                cur = next;
                if guard(&cur, t, observe) {
                    return Ok(true);
                }
            }
        }
        MethodKind::ConjugateGradient => {
            return conjugate_gradient(graph, x0, t_max, observe);
        }
    }
    Ok(false)
}

/// `cur + m·(cur - prev) - h·lx`, elementwise.
fn momentum_step(cur: &StateBlock, prev: &StateBlock, lx: &StateBlock, m: f64, h: f64) -> StateBlock {
    let mut next = cur.clone();
    next.axpy(m, cur);
    next.axpy(-m, prev);
    next.axpy(-h, lx);
    next
}

fn guard(x: &StateBlock, t: usize, observe: &mut dyn FnMut(usize, &StateBlock)) -> bool {
    if x.max_abs() > DIVERGENCE_GUARD {
        return true;
    }
    observe(t, x);
    false
}

/// Standard CG on `f(x) = ½ xᵀLx`, run independently per column with a
/// shared iteration schedule. Columns that reach zero residual are frozen.
fn conjugate_gradient(
    graph: &RegularGraph,
    x0: &StateBlock,
    t_max: usize,
    observe: &mut dyn FnMut(usize, &StateBlock),
) -> Result<bool> {
    let op = GossipOperator::new(graph);
    let d = x0.d();
    let n = x0.n();
    let mut x = x0.clone();
    let lx = op.apply(&x)?;
    // r = -∇f = -Lx
    let mut r = StateBlock::zeros(n, d);
    r.axpy(-1.0, &lx);
    let mut p = r.clone();
    let mut rs: Vec<f64> = column_squared_norms(&r);
    // Columns whose residual has shrunk past this factor are frozen;
    // iterating past machine zero lets rounding noise re-grow the error.
    let floors: Vec<f64> = rs.iter().map(|&v| v * 1e-28).collect();

    for t in 1..=t_max {
        let lp = op.apply(&p)?;
        let mut pap = vec![0.0f64; d];
        for i in 0..n {
            let pr = p.row(i);
            let lr = lp.row(i);
            for c in 0..d {
                pap[c] += pr[c] * lr[c];
            }
        }
        let alphas: Vec<f64> = (0..d)
            .map(|c| {
                if rs[c] <= floors[c] || pap[c] <= 0.0 {
                    0.0
                } else {
                    rs[c] / pap[c]
                }
            })
            .collect();
        for i in 0..n {
            let pr = p.row(i).to_vec();
            let lr = lp.row(i).to_vec();
            let xr = x.row_mut(i);
            for c in 0..d {
                xr[c] += alphas[c] * pr[c];
            }
            let rr = r.row_mut(i);
            for c in 0..d {
                rr[c] -= alphas[c] * lr[c];
            }
        }
        let rs_new = column_squared_norms(&r);
        let betas: Vec<f64> = (0..d)
            .map(|c| if rs[c] <= floors[c] { 0.0 } else { rs_new[c] / rs[c] })
            .collect();
        for i in 0..n {
            let rr = r.row(i).to_vec();
            let pr = p.row_mut(i);
            for c in 0..d {
                pr[c] = rr[c] + betas[c] * pr[c];
            }
        }
        rs = rs_new;
        if guard(&x, t, observe) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn column_squared_norms(x: &StateBlock) -> Vec<f64> {
    let mut out = vec![0.0f64; x.d()];
    for i in 0..x.n() {
        for (acc, &v) in out.iter_mut().zip(x.row(i)) {
            *acc += v * v;
        }
    }
    out
}

/// Compares the simulated trajectory against `x* + P_t(L)(x_0 - x*)`
/// evaluated through the dense eigendecomposition. Returns the maximum over
/// `t <= cfg.iterations` of `‖x_t^sim - x_t^poly‖_F / ‖x_0 - x*‖_F`.
///
/// Conjugate gradient is not an oblivious method and has no predetermined
/// polynomial; requesting it is an error.
pub fn trajectory_polynomial_check(
    graph: &RegularGraph,
    x0: &StateBlock,
    cfg: &MethodConfig,
) -> Result<f64> {
    if cfg.method == MethodKind::ConjugateGradient {
        return Err(Error::UnsupportedMethod(
            "conjugate gradient has no predetermined residual polynomial".into(),
        ));
    }
    if graph.n() > DENSE_EIGEN_CAP {
        return Err(Error::DenseCapExceeded {
            n: graph.n(),
            cap: DENSE_EIGEN_CAP,
        });
    }
    let evaluator = ResidualEvaluator::new(cfg.method, cfg.k, cfg.iterations)?;

    let mut iterates: Vec<Vec<f64>> = Vec::with_capacity(cfg.iterations + 1);
    simulate(graph, x0, cfg, &mut |_, x| iterates.push(x.values().to_vec()))?;

    let n = graph.n();
    let d = x0.d();
    let eig = graph.dense_gossip_matrix().symmetric_eigen();
    let means = x0.column_means();
    let e0 = DMatrix::from_fn(n, d, |i, c| x0.row(i)[c] - means[c]);
    let e0_norm = e0.norm();
    if e0_norm < 1e-300 {
        // Already at consensus: every residual polynomial fixes x0.
        return Ok(0.0);
    }
    let coeffs = eig.eigenvectors.transpose() * &e0;

    let mut max_rel: f64 = 0.0;
    for (t, sim) in iterates.iter().enumerate() {
        if t == 0 {
            continue; // P_0 = 1: the reconstruction is x0 by definition
        }
        let mut scaled = coeffs.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            let w = evaluator.eval(t, eig.eigenvalues[i])?;
            row *= w;
        }
        let recon = &eig.eigenvectors * scaled;
        let mut diff_sq = 0.0;
        for i in 0..n {
            for c in 0..d {
                let poly_val = recon[(i, c)] + means[c];
                let e = sim[i * d + c] - poly_val;
                diff_sq += e * e;
            }
        }
        max_rel = max_rel.max(diff_sq.sqrt() / e0_norm);
    }
    Ok(max_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::momentum_residual;
    use crate::poly::nesterov_residual;

    fn k4() -> RegularGraph {
        RegularGraph::generate(4, 3, 1).unwrap()
    }

    #[test]
    fn consensus_error_definition() {
        let x0 = StateBlock::from_fn(4, 1, |i, _| if i == 3 { 3.0 } else { 1.0 });
        assert_eq!(consensus_error(&x0, &x0), 1.0);
        let consensus = StateBlock::constant(4, 1, 1.5);
        assert_eq!(consensus_error(&consensus, &x0), 0.0);
    }

    #[test]
    fn consensus_start_yields_zero_trace() {
        let g = k4();
        let x0 = StateBlock::constant(4, 2, 3.7);
        for method in MethodKind::ALL {
            let cfg = MethodConfig::new(method, 3, 5);
            let trace = run(&g, &x0, &cfg).unwrap();
            assert!(!trace.diverged);
            for &(_, e) in &trace.entries {
                assert_eq!(e, 0.0, "{method}");
            }
        }
    }

    #[test]
    fn cg_solves_k4_in_one_iteration() {
        let g = k4();
        let x0 = StateBlock::gaussian(4, 1, 3);
        let cfg = MethodConfig::new(MethodKind::ConjugateGradient, 3, 3);
        let trace = run(&g, &x0, &cfg).unwrap();
        assert_eq!(trace.entries[0], (0, 1.0));
        assert!(trace.entries[1].1 < 1e-20, "error {}", trace.entries[1].1);
    }

    #[test]
    fn heavyball_on_k4_matches_single_mode_residual() {
        // L on ker⊥ of K_4 has the single eigenvalue 4/3, so the normalized
        // error is exactly P_t(4/3)².
        let g = k4();
        let x0 = StateBlock::gaussian(4, 1, 9);
        let cfg = MethodConfig::new(MethodKind::HeavyBall, 3, 20);
        let trace = run(&g, &x0, &cfg).unwrap();
        let (m, h) = polyak_parameters(3);
        for &(t, e) in &trace.entries {
            let p = momentum_residual(m, h, t, 4.0 / 3.0);
            assert!((e - p * p).abs() < 1e-8, "t={t}: {e} vs {}", p * p);
        }
    }

    #[test]
    fn nesterov_on_k4_matches_single_mode_residual() {
        let g = k4();
        let x0 = StateBlock::gaussian(4, 1, 12);
        let cfg = MethodConfig::new(MethodKind::Nesterov, 3, 20);
        let trace = run(&g, &x0, &cfg).unwrap();
        for &(t, e) in &trace.entries {
            let p = nesterov_residual(3, t, 4.0 / 3.0).unwrap();
            assert!((e - p * p).abs() < 1e-8, "t={t}: {e} vs {}", p * p);
        }
    }

    #[test]
    fn all_methods_preserve_column_means() {
        let g = RegularGraph::generate(60, 3, 21).unwrap();
        let x0 = StateBlock::gaussian(60, 3, 5);
        let want = x0.column_means();
        for method in MethodKind::ALL {
            let cfg = MethodConfig::new(method, 3, 50);
            simulate(&g, &x0, &cfg, &mut |_, x| {
                let got = x.column_means();
                for (a, b) in got.iter().zip(&want) {
                    assert!((a - b).abs() < 1e-10, "{method}");
                }
            })
            .unwrap();
        }
    }

    #[test]
    fn all_methods_converge() {
        let g = RegularGraph::generate(200, 3, 2).unwrap();
        let x0 = StateBlock::gaussian(200, 2, 7);
        for method in MethodKind::ALL {
            let cfg = MethodConfig::new(method, 3, 200);
            let trace = run(&g, &x0, &cfg).unwrap();
            assert!(!trace.diverged, "{method}");
            let last = trace.entries.last().unwrap().1;
            assert!(last < 1e-6, "{method}: final error {last}");
        }
    }

    #[test]
    fn traces_start_at_one_and_stay_finite() {
        let g = RegularGraph::generate(30, 4, 6).unwrap();
        let x0 = StateBlock::gaussian(30, 2, 8);
        for method in MethodKind::ALL {
            let cfg = MethodConfig::new(method, 4, 30);
            let trace = run(&g, &x0, &cfg).unwrap();
            assert_eq!(trace.entries[0], (0, 1.0), "{method}");
            for &(_, e) in &trace.entries {
                assert!(e.is_finite() && e >= 0.0, "{method}");
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let g = RegularGraph::generate(50, 3, 4).unwrap();
        let x0 = StateBlock::gaussian(50, 2, 11);
        let cfg = MethodConfig::new(MethodKind::Optimal, 3, 40);
        let a = run(&g, &x0, &cfg).unwrap();
        let b = run(&g, &x0, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn record_every_thins_the_trace() {
        let g = k4();
        let x0 = StateBlock::gaussian(4, 1, 1);
        let mut cfg = MethodConfig::new(MethodKind::Gd, 3, 10);
        cfg.record_every = 4;
        let trace = run(&g, &x0, &cfg).unwrap();
        let iters: Vec<usize> = trace.entries.iter().map(|&(t, _)| t).collect();
        assert_eq!(iters, vec![0, 4, 8, 10]);
    }

    #[test]
    fn config_validation() {
        let g = k4();
        let x0 = StateBlock::gaussian(4, 1, 1);
        let cfg = MethodConfig::new(MethodKind::Gd, 4, 10);
        assert!(run(&g, &x0, &cfg).is_err());
        let cfg = MethodConfig::new(MethodKind::Gd, 3, 10);
        let bad = StateBlock::gaussian(5, 1, 1);
        assert!(matches!(
            run(&g, &bad, &cfg),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn trajectory_check_gd_small() {
        let g = RegularGraph::generate(20, 3, 7).unwrap();
        let x0 = StateBlock::gaussian(20, 2, 3);
        let cfg = MethodConfig::new(MethodKind::Gd, 3, 20);
        let err = trajectory_polynomial_check(&g, &x0, &cfg).unwrap();
        assert!(err < 1e-10, "discrepancy {err}");
    }

    #[test]
    fn trajectory_check_optimal_n50() {
        let g = RegularGraph::generate(50, 3, 13).unwrap();
        let x0 = StateBlock::gaussian(50, 2, 4);
        let cfg = MethodConfig::new(MethodKind::Optimal, 3, 30);
        let err = trajectory_polynomial_check(&g, &x0, &cfg).unwrap();
        assert!(err < 1e-8, "discrepancy {err}");
    }

    #[test]
    fn trajectory_check_rejects_cg() {
        let g = k4();
        let x0 = StateBlock::gaussian(4, 1, 1);
        let cfg = MethodConfig::new(MethodKind::ConjugateGradient, 3, 5);
        assert!(matches!(
            trajectory_polynomial_check(&g, &x0, &cfg),
            Err(Error::UnsupportedMethod(_))
        ));
    }

    #[test]
    fn trace_csv_round_trips() {
        let g = k4();
        let x0 = StateBlock::gaussian(4, 1, 2);
        let cfg = MethodConfig::new(MethodKind::Gd, 3, 5);
        let trace = run(&g, &x0, &cfg).unwrap();
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("iter,error"));
        for (line, &(t, e)) in lines.zip(&trace.entries) {
            let mut parts = line.split(',');
            assert_eq!(parts.next().unwrap().parse::<usize>().unwrap(), t);
            assert_eq!(parts.next().unwrap().parse::<f64>().unwrap(), e);
        }
    }
}
