//! The Kesten-McKay spectral law of `L = I - A/k` on random k-regular graphs,
//! empirical spectra, and quadrature against the theoretical measure.
//!
//! The density is
//! `dμ(λ) = (k/2π) · sqrt(4(k-1)/k² - (1-λ)²) / (1 - (1-λ)²) dλ`,
//! supported on `[1 - 2√(k-1)/k, 1 + 2√(k-1)/k]`. Quadrature uses the
//! substitution `λ = 1 - (2√(k-1)/k)·cos θ`, which removes the square-root
//! endpoint singularity exactly; the transformed integrand is smooth and
//! periodic in θ, so the composite midpoint rule converges spectrally.

use std::f64::consts::PI;

use crate::csvio::fmt_g17;
use crate::error::{Error, Result};

/// Default number of θ-nodes for quadrature over `[0, π]`.
pub const DEFAULT_QUAD_NODES: usize = 4096;

/// `(λ_min, λ_max) = (1 - 2√(k-1)/k, 1 + 2√(k-1)/k)`.
pub fn support_bounds(k: usize) -> (f64, f64) {
    let r = support_radius(k);
    (1.0 - r, 1.0 + r)
}

/// Half-width `2√(k-1)/k` of the support, centered at 1.
pub fn support_radius(k: usize) -> f64 {
    2.0 * ((k - 1) as f64).sqrt() / k as f64
}

/// Kesten-McKay density of the gossip law at `λ`; zero outside the open
/// support and at its endpoints (the formula's limit).
pub fn kesten_mckay_density(k: usize, lambda: f64) -> f64 {
    let kf = k as f64;
    let s = 1.0 - lambda;
    let radicand = 4.0 * (kf - 1.0) / (kf * kf) - s * s;
    if radicand <= 0.0 {
        return 0.0;
    }
    kf / (2.0 * PI) * radicand.sqrt() / (1.0 - s * s)
}

/// Theoretical Kesten-McKay law for degree `k`, or a finite empirical
/// spectrum (sorted ascending).
#[derive(Debug, Clone)]
pub enum SpectralMeasure {
    Theoretical { k: usize },
    Empirical { eigenvalues: Vec<f64> },
}

impl SpectralMeasure {
    pub fn theoretical(k: usize) -> Self {
        SpectralMeasure::Theoretical { k }
    }

    pub fn empirical(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| a.total_cmp(b));
        SpectralMeasure::Empirical { eigenvalues }
    }

    /// `∫ f dμ` with the default node count.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        self.integrate_with_nodes(f, DEFAULT_QUAD_NODES)
    }

    pub fn integrate_with_nodes(&self, f: impl Fn(f64) -> f64, nodes: usize) -> Result<f64> {
        match self {
            SpectralMeasure::Theoretical { k } => {
                let mut acc = 0.0;
                for j in 0..nodes {
                    let theta = (j as f64 + 0.5) * PI / nodes as f64;
                    let sample = f(lambda_of_theta(*k, theta));
                    if !sample.is_finite() {
                        return Err(Error::Numerical(format!(
                            "integrand is non-finite at θ={theta}"
                        )));
                    }
                    acc += theta_weight(*k, theta) * sample;
                }
                Ok(acc * PI / nodes as f64)
            }
            SpectralMeasure::Empirical { eigenvalues } => {
                if eigenvalues.is_empty() {
                    return Err(Error::Numerical("empty empirical spectrum".into()));
                }
                let mut acc = 0.0;
                for &e in eigenvalues {
                    let sample = f(e);
                    if !sample.is_finite() {
                        return Err(Error::Numerical(format!(
                            "integrand is non-finite at λ={e}"
                        )));
                    }
                    acc += sample;
                }
                Ok(acc / eigenvalues.len() as f64)
            }
        }
    }
}

fn lambda_of_theta(k: usize, theta: f64) -> f64 {
    1.0 - support_radius(k) * theta.cos()
}

/// Weight of the θ-substituted measure: `(2(k-1)/(kπ)) sin²θ / (1 - M cos²θ)`
/// with `M = 4(k-1)/k²`.
fn theta_weight(k: usize, theta: f64) -> f64 {
    let kf = k as f64;
    let q = kf - 1.0;
    let m = 4.0 * q / (kf * kf);
    let s = theta.sin();
    let c = theta.cos();
    2.0 * q / (kf * PI) * s * s / (1.0 - m * c * c)
}

/// Theoretical mass of `[lo, hi]` under the Kesten-McKay law, by midpoint
/// quadrature in θ over the matching sub-arc.
pub fn theoretical_mass(k: usize, lo: f64, hi: f64) -> f64 {
    let r = support_radius(k);
    let to_theta = |lambda: f64| ((1.0 - lambda) / r).clamp(-1.0, 1.0).acos();
    let (t0, t1) = (to_theta(lo), to_theta(hi));
    if t1 <= t0 {
        return 0.0;
    }
    let nodes = 512;
    let h = (t1 - t0) / nodes as f64;
    let mut acc = 0.0;
    for j in 0..nodes {
        let theta = t0 + (j as f64 + 0.5) * h;
        acc += theta_weight(k, theta);
    }
    acc * h
}

/// Density-normalized histogram over the theoretical support. Eigenvalues
/// below `λ_min` (the kernel mode of finite graphs, in particular) land in an
/// explicit underflow bucket; values at or above `λ_max` are clamped into the
/// last bin.
#[derive(Debug, Clone)]
pub struct Histogram {
    k: usize,
    lo: f64,
    hi: f64,
    densities: Vec<f64>,
    underflow: f64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let w = self.bin_width();
        (self.lo + i as f64 * w, self.lo + (i + 1) as f64 * w)
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    /// Mass fraction below the support, counted separately from the bins.
    pub fn underflow_mass(&self) -> f64 {
        self.underflow
    }

    pub fn total_mass(&self) -> f64 {
        let w = self.bin_width();
        self.underflow + self.densities.iter().map(|d| d * w).sum::<f64>()
    }

    /// CSV with a theoretical-overlay column (bin-averaged density) and one
    /// trailing underflow row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,empirical_density,theoretical_density\n");
        let w = self.bin_width();
        for (i, &d) in self.densities.iter().enumerate() {
            let (lo, hi) = self.bin_edges(i);
            let theo = theoretical_mass(self.k, lo, hi) / w;
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_g17(lo),
                fmt_g17(hi),
                fmt_g17(d),
                fmt_g17(theo)
            ));
        }
        out.push_str(&format!("underflow,{},,\n", fmt_g17(self.underflow)));
        out
    }
}

/// Bins a sorted eigenvalue list against the degree-k support.
pub fn empirical_histogram(eigs: &[f64], bins: usize, k: usize) -> Result<Histogram> {
    if eigs.is_empty() {
        return Err(Error::InvalidParameter("empty eigenvalue list".into()));
    }
    if bins < 10 {
        return Err(Error::InvalidParameter(format!(
            "bins={bins} must be >= 10"
        )));
    }
    let (lo, hi) = support_bounds(k);
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut under = 0usize;
    for &e in eigs {
        if e < lo {
            under += 1;
        } else {
            let idx = (((e - lo) / w) as usize).min(bins - 1);
            counts[idx] += 1;
        }
    }
    let total = eigs.len() as f64;
    let densities = counts.iter().map(|&c| c as f64 / (total * w)).collect();
    Ok(Histogram {
        k,
        lo,
        hi,
        densities,
        underflow: under as f64 / total,
    })
}

/// L1 distance between a histogram and the bin-averaged theoretical density;
/// the underflow bucket counts in full (the limit law has no mass there).
pub fn l1_density_distance(h: &Histogram, k: usize) -> f64 {
    let w = h.bin_width();
    let mut acc = h.underflow_mass();
    for (i, &d) in h.densities().iter().enumerate() {
        let (lo, hi) = h.bin_edges(i);
        let theo = theoretical_mass(k, lo, hi) / w;
        acc += (d - theo).abs() * w;
    }
    acc
}
