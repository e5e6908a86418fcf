//! The iterate `x_t` as an n×d block, one d-vector per agent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Row-major n×d real matrix; row `i` is agent `i`'s vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBlock {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl StateBlock {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            values: vec![0.0; n * d],
        }
    }

    pub fn constant(n: usize, d: usize, value: f64) -> Self {
        Self {
            n,
            d,
            values: vec![value; n * d],
        }
    }

    pub fn from_fn(n: usize, d: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut block = Self::zeros(n, d);
        for i in 0..n {
            for c in 0..d {
                block.values[i * d + c] = f(i, c);
            }
        }
        block
    }

    /// I.i.d. standard normal entries; deterministic for a fixed seed.
    pub fn gaussian(n: usize, d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = StandardNormal;
        let values = (0..n * d).map(|_| normal.sample(&mut rng)).collect();
        Self { n, d, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Column means, i.e. the consensus target broadcast per coordinate.
    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0f64; self.d];
        for i in 0..self.n {
            for (m, &v) in means.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= self.n as f64;
        }
        means
    }

    /// Squared Frobenius distance to the row-wise broadcast of `means`.
    pub fn squared_deviation_from(&self, means: &[f64]) -> f64 {
        debug_assert_eq!(means.len(), self.d);
        let mut acc = 0.0;
        for i in 0..self.n {
            for (&v, &m) in self.row(i).iter().zip(means) {
                let e = v - m;
                acc += e * e;
            }
        }
        acc
    }

    /// `self + a * other`, elementwise.
    pub fn axpy(&mut self, a: f64, other: &StateBlock) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (x, &y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_is_deterministic() {
        let a = StateBlock::gaussian(10, 3, 42);
        let b = StateBlock::gaussian(10, 3, 42);
        assert_eq!(a, b);
        assert!(a.is_finite());
        assert_ne!(a, StateBlock::gaussian(10, 3, 43));
    }

    #[test]
    fn column_means_and_deviation() {
        let x = StateBlock::from_fn(4, 1, |i, _| if i == 3 { 3.0 } else { 1.0 });
        let means = x.column_means();
        assert_eq!(means, vec![1.5]);
        // (1-1.5)^2 * 3 + (3-1.5)^2 = 0.75 + 2.25
        assert!((x.squared_deviation_from(&means) - 3.0).abs() < 1e-14);
    }
}
