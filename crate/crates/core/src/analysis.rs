//! Expected-error computation by quadrature against the Kesten-McKay law,
//! closed-form rate sandwiches, and Monte Carlo estimates.

use crate::csvio::fmt_g17;
use crate::error::{Error, Result};
use crate::graph::RegularGraph;
use crate::poly::{product_formula, MethodKind, ResidualEvaluator};
use crate::solvers::{simulate, MethodConfig};
use crate::spectrum::SpectralMeasure;
use crate::state::StateBlock;

/// `R² · ∫ P_t² dμ` for the evaluator's method and degree.
pub fn expected_error_quadrature(ev: &ResidualEvaluator, t: usize, r: f64) -> Result<f64> {
    expected_error_quadrature_with_nodes(ev, t, r, crate::spectrum::DEFAULT_QUAD_NODES)
}

pub fn expected_error_quadrature_with_nodes(
    ev: &ResidualEvaluator,
    t: usize,
    r: f64,
    nodes: usize,
) -> Result<f64> {
    let mu = SpectralMeasure::theoretical(ev.k());
    let integral = mu.integrate_with_nodes(
        |lambda| {
            let p = ev.eval(t, lambda).unwrap_or(f64::NAN);
            p * p
        },
        nodes,
    )?;
    Ok(r * r * integral)
}

/// Sandwich for the optimal method's expected error at `R = 1`:
/// `lower = Π((√(k-1)/k)·δ_i)²`, `upper = (1 + 2/(k-2))² · lower`.
pub fn optimal_rate_closed_form(k: usize, t: usize) -> (f64, f64) {
    let (_, rhs) = product_formula(k, t);
    let factor = 1.0 + 2.0 / (k as f64 - 2.0);
    (rhs, factor * factor * rhs)
}

/// Sandwich for Heavy Ball's expected error:
/// `R²·(q³+q)/k³·m^t <= E <= R²·(q³+q)/(k(k-2)²)·m^t` with `q = k-1`,
/// `m = 1/(k-1)`.
pub fn heavyball_rate_bounds(k: usize, t: usize, r: f64) -> (f64, f64) {
    let kf = k as f64;
    let q = kf - 1.0;
    let m_pow = (1.0 / q).powi(t as i32);
    let num = q * q * q + q;
    let lower = r * r * num / (kf * kf * kf) * m_pow;
    let upper = r * r * num / (kf * (kf - 2.0) * (kf - 2.0)) * m_pow;
    (lower, upper)
}

/// Per-iteration Monte Carlo means of the unnormalized error
/// `‖x_t - x_*‖²`, with the graph and `x_0 ~ N(0, I)` resampled per seed.
#[derive(Debug, Clone)]
pub struct MonteCarloStats {
    pub means: Vec<f64>,
    pub sems: Vec<f64>,
    pub seeds: usize,
}

pub fn monte_carlo_expected_error(
    k: usize,
    n: usize,
    d: usize,
    method: MethodKind,
    t_max: usize,
    seeds: &[u64],
) -> Result<MonteCarloStats> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("need at least one seed".into()));
    }
    let mut sums = vec![0.0f64; t_max + 1];
    let mut sq_sums = vec![0.0f64; t_max + 1];
    for &seed in seeds {
        let graph = RegularGraph::generate(n, k, seed)?;
        let x0 = StateBlock::gaussian(n, d, seed ^ 0x5851_f42d_4c95_7f2d);
        let means = x0.column_means();
        let cfg = MethodConfig::new(method, k, t_max);
        simulate(&graph, &x0, &cfg, &mut |t, x| {
            let err = x.squared_deviation_from(&means);
            sums[t] += err;
            sq_sums[t] += err * err;
        })?;
    }
    let s = seeds.len() as f64;
    let means: Vec<f64> = sums.iter().map(|v| v / s).collect();
    let sems = sq_sums
        .iter()
        .zip(&means)
        .map(|(&sq, &m)| {
            if seeds.len() < 2 {
                0.0
            } else {
                let var = (sq / s - m * m).max(0.0) * s / (s - 1.0);
                (var / s).sqrt()
            }
        })
        .collect();
    Ok(MonteCarloStats {
        means,
        sems,
        seeds: seeds.len(),
    })
}

/// Least-squares slope of `ln error` over iterations in `[t_lo, t_hi]`.
/// Returns `None` with fewer than two positive samples in the window.
pub fn fit_log_slope(entries: &[(usize, f64)], t_lo: usize, t_hi: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = entries
        .iter()
        .filter(|&&(t, e)| t >= t_lo && t <= t_hi && e > 0.0)
        .map(|&(t, e)| (t as f64, e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in &pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    (den > 0.0).then(|| num / den)
}

/// Per-t expected-error table for one method: quadrature value, closed-form
/// sandwich, and optional Monte Carlo estimate.
#[derive(Debug, Clone)]
pub struct RateReport {
    pub k: usize,
    pub method: MethodKind,
    pub r: f64,
    pub rows: Vec<RateRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct RateRow {
    pub t: usize,
    pub quadrature: f64,
    pub closed_lower: f64,
    pub closed_upper: f64,
    pub mc_mean: Option<f64>,
    pub mc_sem: Option<f64>,
}

impl RateReport {
    /// CSV with header `t,quadrature,closed_lower,closed_upper,mc_mean,mc_sem`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,quadrature,closed_lower,closed_upper,mc_mean,mc_sem\n");
        for row in &self.rows {
            let mc_mean = row.mc_mean.map(fmt_g17).unwrap_or_default();
            let mc_sem = row.mc_sem.map(fmt_g17).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{mc_mean},{mc_sem}\n",
                row.t,
                fmt_g17(row.quadrature),
                fmt_g17(row.closed_lower),
                fmt_g17(row.closed_upper),
            ));
        }
        out
    }
}

/// Builds the rate report for the optimal or Heavy Ball method. Monte Carlo
/// columns are filled when `mc` supplies `(n, d, seeds)`.
pub fn rate_report(
    k: usize,
    method: MethodKind,
    t_max: usize,
    r: f64,
    quad_nodes: usize,
    mc: Option<(usize, usize, &[u64])>,
) -> Result<RateReport> {
    let ev = ResidualEvaluator::new(method, k, t_max)?;
    let closed: Box<dyn Fn(usize) -> (f64, f64)> = match method {
        MethodKind::Optimal => Box::new(move |t| {
            let (lo, hi) = optimal_rate_closed_form(k, t);
            (r * r * lo, r * r * hi)
        }),
        MethodKind::HeavyBall => Box::new(move |t| heavyball_rate_bounds(k, t, r)),
        other => {
            return Err(Error::InvalidParameter(format!(
                "no closed-form rate for method `{other}`"
            )))
        }
    };
    let stats = match mc {
        Some((n, d, seeds)) => Some(monte_carlo_expected_error(k, n, d, method, t_max, seeds)?),
        None => None,
    };
    let mut rows = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let quadrature = expected_error_quadrature_with_nodes(&ev, t, r, quad_nodes)?;
        let (closed_lower, closed_upper) = closed(t);
        rows.push(RateRow {
            t,
            quadrature,
            closed_lower,
            closed_upper,
            mc_mean: stats.as_ref().map(|s| s.means[t]),
            mc_sem: stats.as_ref().map(|s| s.sems[t]),
        });
    }
    Ok(RateReport {
        k,
        method,
        r,
        rows,
    })
}
