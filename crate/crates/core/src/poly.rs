//! Chebyshev polynomials, per-method residual polynomials, and the
//! orthogonal-polynomial machinery behind the optimal average-case method.
//!
//! All evaluation goes through forward three-term recurrences; expanded
//! monomial coefficients overflow around degree 40 and are never used.

use crate::error::{Error, Result};
use crate::spectrum::support_bounds;

/// Chebyshev polynomial of the first kind, `T_t(x)`, by forward recurrence.
///
/// Stable on `[-1, 1]`; outside, the value grows like
/// `(|x| + sqrt(x² - 1))^t`.
pub fn chebyshev_t(t: usize, x: f64) -> f64 {
    match t {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 1..t {
                (prev, cur) = (cur, 2.0 * x * cur - prev);
            }
            cur
        }
    }
}

/// Chebyshev polynomial of the second kind, `U_t(x)`.
pub fn chebyshev_u(t: usize, x: f64) -> f64 {
    match t {
        0 => 1.0,
        1 => 2.0 * x,
        _ => {
            let (mut prev, mut cur) = (1.0, 2.0 * x);
            for _ in 1..t {
                (prev, cur) = (cur, 2.0 * x * cur - prev);
            }
            cur
        }
    }
}

/// The optimal method's step/momentum coefficients:
/// `δ_0 = k/(k+1)`, `δ_t = (1 - ((k-1)/k²)·δ_{t-1})⁻¹`, increasing to
/// `k/(k-1)`.
#[derive(Debug, Clone)]
pub struct DeltaSequence {
    k: usize,
    values: Vec<f64>,
}

impl DeltaSequence {
    /// Computes `δ_0 ..= δ_t_max`.
    pub fn new(k: usize, t_max: usize) -> Self {
        let kf = k as f64;
        let ratio = (kf - 1.0) / (kf * kf);
        let mut values = Vec::with_capacity(t_max + 1);
        values.push(kf / (kf + 1.0));
        for t in 1..=t_max {
            let next = 1.0 / (1.0 - ratio * values[t - 1]);
            values.push(next);
        }
        Self { k, values }
    }

    /// Test hook: a sequence with `δ_0` replaced, recursion unchanged.
    pub fn with_initial(k: usize, delta0: f64, t_max: usize) -> Self {
        let kf = k as f64;
        let ratio = (kf - 1.0) / (kf * kf);
        let mut values = Vec::with_capacity(t_max + 1);
        values.push(delta0);
        for t in 1..=t_max {
            let next = 1.0 / (1.0 - ratio * values[t - 1]);
            values.push(next);
        }
        Self { k, values }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, t: usize) -> f64 {
        self.values[t]
    }

    /// The fixed point `k/(k-1)`.
    pub fn limit(&self) -> f64 {
        self.k as f64 / (self.k as f64 - 1.0)
    }
}

/// `Q_t(λ)` via the δ-recursion `Q_{t+1} = δ_t(1-λ)Q_t + (1-δ_t)Q_{t-1}`,
/// `Q_0 = 1`, `Q_1 = 1 - δ_0·λ`.
pub fn optimal_residual_recurrence(k: usize, t: usize, lambda: f64) -> f64 {
    let delta = DeltaSequence::new(k, t.saturating_sub(1));
    optimal_residual_with_delta(&delta, t, lambda)
}

/// Same recursion, with a caller-supplied δ-sequence (must cover `δ_{t-1}`).
pub fn optimal_residual_with_delta(delta: &DeltaSequence, t: usize, lambda: f64) -> f64 {
    if t == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 - delta.get(0) * lambda;
    for s in 1..t {
        let ds = delta.get(s);
        (prev, cur) = (cur, ds * (1.0 - lambda) * cur + (1.0 - ds) * prev);
    }
    cur
}

/// Unnormalized orthogonal polynomial
/// `P_t(λ) = √q·U_t(σ) + U_{t-1}(σ)` with `σ(λ) = k(1-λ)/(2√q)`, `q = k-1`;
/// `P_0 = √q`.
pub fn optimal_orthogonal_chebyshev_form(k: usize, t: usize, lambda: f64) -> f64 {
    let q = (k - 1) as f64;
    let sigma = k as f64 * (1.0 - lambda) / (2.0 * q.sqrt());
    if t == 0 {
        return q.sqrt();
    }
    q.sqrt() * chebyshev_u(t, sigma) + chebyshev_u(t - 1, sigma)
}

/// Residual normalization of the Chebyshev form: `P_t(λ)/P_t(0)`.
pub fn optimal_residual_chebyshev(k: usize, t: usize, lambda: f64) -> f64 {
    optimal_orthogonal_chebyshev_form(k, t, lambda) / optimal_orthogonal_chebyshev_form(k, t, 0.0)
}

/// Gradient descent residual `(1 - 2λ/(λ_max+λ_min))^t`; on regular graphs
/// `λ_max + λ_min = 2`, so this is `(1-λ)^t`.
pub fn gd_residual(k: usize, t: usize, lambda: f64) -> f64 {
    let (lo, hi) = support_bounds(k);
    (1.0 - 2.0 * lambda / (hi + lo)).powi(t as i32)
}

/// Momentum residual
/// `m^{t/2}·((2m/(1+m))·T_t(σ) + ((1-m)/(1+m))·U_t(σ))` with
/// `σ(λ) = (1+m-hλ)/(2√m)`.
pub fn momentum_residual(m: f64, h: f64, t: usize, lambda: f64) -> f64 {
    let sigma = (1.0 + m - h * lambda) / (2.0 * m.sqrt());
    let wt = 2.0 * m / (1.0 + m);
    let wu = (1.0 - m) / (1.0 + m);
    m.powf(t as f64 / 2.0) * (wt * chebyshev_t(t, sigma) + wu * chebyshev_u(t, sigma))
}

/// Polyak (Heavy Ball) momentum and step-size from the regular-graph
/// spectrum edges; `m = 1/(k-1)`, `h = k/(k-1)` in closed form.
pub fn polyak_parameters(k: usize) -> (f64, f64) {
    let (lo, hi) = support_bounds(k);
    let (sl, sh) = (lo.sqrt(), hi.sqrt());
    let m = ((sh - sl) / (sh + sl)).powi(2);
    let h = (2.0 / (sh + sl)).powi(2);
    (m, h)
}

/// Shifted-Chebyshev residual `T_t(σ(λ))/T_t(σ(0))` with the affine map
/// `σ(λ) = (λ_max + λ_min - 2λ)/(λ_max - λ_min)` sending the spectrum onto
/// `[-1, 1]`. Evaluated in log space for large `t`, where `T_t(σ(0))`
/// overflows.
pub fn chebyshev_iter_residual(k: usize, t: usize, lambda: f64) -> f64 {
    let (lo, hi) = support_bounds(k);
    let sigma = (hi + lo - 2.0 * lambda) / (hi - lo);
    let sigma0 = (hi + lo) / (hi - lo);
    if t <= 200 {
        return chebyshev_t(t, sigma) / chebyshev_t(t, sigma0);
    }
    // log T_t(x) = ln cosh(t·arccosh x) for x >= 1
    let log_denom = ln_cosh(t as f64 * sigma0.acosh());
    if sigma.abs() <= 1.0 {
        (t as f64 * sigma.acos()).cos() * (-log_denom).exp()
    } else {
        let sign = if sigma < 0.0 && t % 2 == 1 { -1.0 } else { 1.0 };
        sign * (ln_cosh(t as f64 * sigma.abs().acosh()) - log_denom).exp()
    }
}

fn ln_cosh(y: f64) -> f64 {
    y + (-2.0 * y).exp().ln_1p() - std::f64::consts::LN_2
}

/// Nesterov residual
/// `(β(1-αλ))^{t/2}·((2β/(1+β))·T_t(σ) + ((1-β)/(1+β))·U_t(σ))` with
/// `σ(λ) = (1+β)√(1-αλ)/(2√β)`, `α = 1/λ_max`,
/// `β = (√λ_max - √λ_min)/(√λ_max + √λ_min)`.
pub fn nesterov_residual(k: usize, t: usize, lambda: f64) -> Result<f64> {
    let (lo, hi) = support_bounds(k);
    let alpha = 1.0 / hi;
    let beta = (hi.sqrt() - lo.sqrt()) / (hi.sqrt() + lo.sqrt());
    let radicand = 1.0 - alpha * lambda;
    if radicand < 0.0 {
        return Err(Error::Domain(format!(
            "nesterov residual undefined for λ={lambda} > λ_max={hi}"
        )));
    }
    let s = radicand.sqrt();
    let sigma = (1.0 + beta) * s / (2.0 * beta.sqrt());
    let wt = 2.0 * beta / (1.0 + beta);
    let wu = (1.0 - beta) / (1.0 + beta);
    let scale = (beta.sqrt() * s).powi(t as i32);
    Ok(scale * (wt * chebyshev_t(t, sigma) + wu * chebyshev_u(t, sigma)))
}

/// Both sides of the δ-product identity:
/// `Π_{i<t} ((√(k-1)/k)·δ_i)²` and its closed form
/// `(1/(k-1))^t · (1 + (2/(k-2))(1 - (k-1)^{-t}))^{-2}`.
pub fn product_formula(k: usize, t: usize) -> (f64, f64) {
    let q = (k - 1) as f64;
    let scale = q.sqrt() / k as f64;
    let delta = DeltaSequence::new(k, t.saturating_sub(1));
    let mut lhs = 1.0;
    for i in 0..t {
        let w = scale * delta.get(i);
        lhs *= w * w;
    }
    let denom = 1.0 + 2.0 / (k as f64 - 2.0) * (1.0 - q.powi(-(t as i32)));
    let rhs = q.powi(-(t as i32)) / (denom * denom);
    (lhs, rhs)
}

/// The six methods of the suite. All but conjugate gradient are oblivious:
/// their coefficients are fixed in advance, so each has a predetermined
/// residual polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    Gd,
    HeavyBall,
    ChebyshevIter,
    Nesterov,
    Optimal,
    ConjugateGradient,
}

impl MethodKind {
    pub const ALL: [MethodKind; 6] = [
        MethodKind::Gd,
        MethodKind::HeavyBall,
        MethodKind::ChebyshevIter,
        MethodKind::Nesterov,
        MethodKind::Optimal,
        MethodKind::ConjugateGradient,
    ];

    pub const OBLIVIOUS: [MethodKind; 5] = [
        MethodKind::Gd,
        MethodKind::HeavyBall,
        MethodKind::ChebyshevIter,
        MethodKind::Nesterov,
        MethodKind::Optimal,
    ];

    pub fn is_oblivious(self) -> bool {
        self != MethodKind::ConjugateGradient
    }

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Gd => "gd",
            MethodKind::HeavyBall => "heavyball",
            MethodKind::ChebyshevIter => "chebyshev",
            MethodKind::Nesterov => "nesterov",
            MethodKind::Optimal => "optimal",
            MethodKind::ConjugateGradient => "cg",
        }
    }
}

impl std::fmt::Display for MethodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(MethodKind::Gd),
            "heavyball" => Ok(MethodKind::HeavyBall),
            "chebyshev" => Ok(MethodKind::ChebyshevIter),
            "nesterov" => Ok(MethodKind::Nesterov),
            "optimal" => Ok(MethodKind::Optimal),
            "cg" => Ok(MethodKind::ConjugateGradient),
            _ => Err(Error::UnsupportedMethod(s.to_string())),
        }
    }
}

/// Per-method residual polynomial `P_t(λ)` with `P_t(0) = 1`, backed by the
/// recurrences above. The optimal evaluator caches its δ-sequence.
#[derive(Debug, Clone)]
pub struct ResidualEvaluator {
    kind: MethodKind,
    k: usize,
    delta: Option<DeltaSequence>,
}

impl ResidualEvaluator {
    /// `t_max` sizes the cached δ-sequence for the optimal method; other
    /// methods ignore it.
    pub fn new(kind: MethodKind, k: usize, t_max: usize) -> Result<Self> {
        if kind == MethodKind::ConjugateGradient {
            return Err(Error::UnsupportedMethod(
                "conjugate gradient has no predetermined residual polynomial".into(),
            ));
        }
        if k < 3 {
            return Err(Error::InvalidParameter(format!("k={k} must be >= 3")));
        }
        let delta = (kind == MethodKind::Optimal).then(|| DeltaSequence::new(k, t_max));
        Ok(Self { kind, k, delta })
    }

    pub fn kind(&self) -> MethodKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn eval(&self, t: usize, lambda: f64) -> Result<f64> {
        match self.kind {
            MethodKind::Gd => Ok(gd_residual(self.k, t, lambda)),
            MethodKind::HeavyBall => {
                let (m, h) = polyak_parameters(self.k);
                Ok(momentum_residual(m, h, t, lambda))
            }
            MethodKind::ChebyshevIter => Ok(chebyshev_iter_residual(self.k, t, lambda)),
            MethodKind::Nesterov => nesterov_residual(self.k, t, lambda),
            MethodKind::Optimal => {
                let delta = self.delta.as_ref().expect("optimal evaluator has deltas");
                if t == 0 || t - 1 < delta.len() {
                    Ok(optimal_residual_with_delta(delta, t, lambda))
                } else {
                    Ok(optimal_residual_recurrence(self.k, t, lambda))
                }
            }
            MethodKind::ConjugateGradient => unreachable!("rejected at construction"),
        }
    }
}
