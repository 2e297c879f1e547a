//! Brownian paths for the stochastic forcing.
//!
//! Increments come from a counter-based (stateless) generator keyed by
//! `(seed, level, index)`: Monte Carlo workers can build sample k without
//! replaying samples 0..k-1, and bridge refinement never perturbs the coarse
//! increments. A path is constructed top-down through the dyadic bridge tree,
//! so `refine(sample_path(seed, t, n))` and `sample_path(seed, t, 2n)` are
//! the same object.
//!
//! Every increment is kept on a per-path lattice: an integer multiple of a
//! power-of-two quantum sized from `t_final`. On the lattice, splitting a
//! coarse increment into its two bridge halves and summing increments are
//! exact floating-point operations (integer arithmetic far below the mantissa
//! capacity), so refined pairs reproduce coarse increments bit-for-bit and
//! cumulative sums are refinement-invariant. The quantization dithers each
//! Gaussian variate at relative scale ~1e-9 or below, orders of magnitude
//! under any statistical resolution of the experiments.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats::dyadic_prefix_sum;

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn key(seed: u64, level: u32, index: u64) -> u64 {
    let h = mix64(seed ^ 0xA0761D6478BD642Fu64.wrapping_mul(level as u64 + 1));
    mix64(h ^ index.wrapping_mul(0xE7037ED1A0B428DB))
}

/// Standard Gaussian variate at counter `(seed, level, index)`, computed in
/// f64 by the Box-Muller transform of two hashed uniforms.
pub fn standard_gaussian(seed: u64, level: u32, index: u64) -> f64 {
    let a = key(seed, level, index);
    let b = mix64(a ^ 0x8EBC6AF09C88C6E3);
    let u1 = ((a >> 11) as f64 + 1.0) * (1.0 / 9007199254740992.0); // (0, 1]
    let u2 = (b >> 11) as f64 * (1.0 / 9007199254740992.0); // [0, 1)
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Derives the path seed of ensemble sample `k` from a master seed.
pub fn sample_seed(master_seed: u64, k: u64) -> u64 {
    mix64(master_seed ^ mix64(k ^ 0x589965CC75374CC3))
}

/// Uniform variate in [0, 1) at counter `(seed, level, index)`.
pub fn uniform(seed: u64, level: u32, index: u64) -> f64 {
    (key(seed, level, index) >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Discretised Brownian path on [0, t_final] with a power-of-two number of
/// increments of variance dt = t_final / n_steps.
#[derive(Debug, Clone)]
pub struct NoisePath<T> {
    seed: u64,
    t_final: T,
    level: u32,
    /// Lattice quantum: every increment is an integer multiple of this.
    quantum: T,
    increments: Vec<T>,
}

impl<T: Real> NoisePath<T> {
    /// Builds the path at `(seed, t_final, n_steps)`; `n_steps` must be a
    /// power of two. Deterministic: same arguments, bit-identical increments.
    pub fn sample(seed: u64, t_final: T, n_steps: usize) -> Result<Self> {
        if n_steps == 0 || !n_steps.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "n_steps must be a power of two, got {n_steps}"
            )));
        }
        if !(t_final > T::zero() && t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_final must be positive, got {t_final}"
            )));
        }
        // Quantum: power of two with integer capacity 2/eps covering Brownian
        // excursions up to ~64 sqrt(t_final).
        let scale = t_final.sqrt();
        let quantum = scale.log2().floor().exp2() * T::epsilon() * T::lit(64.0);
        let top = quantize(scale * T::lit(standard_gaussian(seed, 0, 0)), quantum);
        let mut path = Self {
            seed,
            t_final,
            level: 0,
            quantum,
            increments: vec![top],
        };
        while path.increments.len() < n_steps {
            path = path.refine();
        }
        Ok(path)
    }

    /// Bridge-refines to twice the resolution. Coarse increments are exactly
    /// the sums of their refined pairs; the inserted midpoint displacement is
    /// keyed by `(seed, level + 1, index)` with conditional variance
    /// dt_coarse / 4.
    pub fn refine(&self) -> Self {
        let n = self.increments.len();
        let next_level = self.level + 1;
        let bridge_std = (self.t_final / T::of_usize(n)).sqrt() * T::lit(0.5);
        let mut increments = Vec::with_capacity(2 * n);
        for (i, &dw) in self.increments.iter().enumerate() {
            let z = bridge_std * T::lit(standard_gaussian(self.seed, next_level, i as u64));
            let d1 = quantize(T::lit(0.5) * dw + z, self.quantum);
            increments.push(d1);
            increments.push(dw - d1); // exact: both are lattice points
        }
        Self {
            seed: self.seed,
            t_final: self.t_final,
            level: next_level,
            quantum: self.quantum,
            increments,
        }
    }

    /// Refines until the step size is at most `dt_max`.
    pub fn refine_to(&self, dt_max: T) -> Self {
        let mut path = self.clone();
        while path.dt() > dt_max {
            path = path.refine();
        }
        path
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn t_final(&self) -> T {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.increments.len()
    }

    pub fn dt(&self) -> T {
        self.t_final / T::of_usize(self.n_steps())
    }

    pub fn increments(&self) -> &[T] {
        &self.increments
    }

    /// W(t_k): cumulative sum of the first `k` increments over the dyadic
    /// tree (exact on the lattice, so refinement-invariant).
    pub fn brownian_at(&self, k: usize) -> T {
        dyadic_prefix_sum(&self.increments, k)
    }
}

/// Nearest lattice point `round(x / quantum) * quantum`; exact because the
/// quantum is a power of two and the integer stays far below mantissa range.
fn quantize<T: Real>(x: T, quantum: T) -> T {
    (x / quantum).round() * quantum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, std_error};

    #[test]
    fn determinism_and_validation() {
        let a: NoisePath<f64> = NoisePath::sample(7, 1.0, 64).unwrap();
        let b: NoisePath<f64> = NoisePath::sample(7, 1.0, 64).unwrap();
        assert_eq!(a.increments(), b.increments());
        assert!(NoisePath::<f64>::sample(7, 1.0, 48).is_err());
        assert!(NoisePath::<f64>::sample(7, 0.0, 64).is_err());
    }

    #[test]
    fn refine_chain_matches_direct_sampling() {
        let coarse: NoisePath<f64> = NoisePath::sample(99, 2.0, 32).unwrap();
        let direct: NoisePath<f64> = NoisePath::sample(99, 2.0, 64).unwrap();
        assert_eq!(coarse.refine().increments(), direct.increments());
    }

    #[test]
    fn refined_pairs_sum_exactly() {
        let coarse: NoisePath<f64> = NoisePath::sample(3, 0.7, 256).unwrap();
        let fine = coarse.refine();
        for (i, &dw) in coarse.increments().iter().enumerate() {
            let pair = fine.increments()[2 * i] + fine.increments()[2 * i + 1];
            assert_eq!(pair, dw, "pair {i}");
        }
    }

    #[test]
    fn cumulative_sums_survive_double_refinement() {
        let coarse: NoisePath<f64> = NoisePath::sample(11, 1.0, 128).unwrap();
        let fine = coarse.refine().refine();
        for k in 0..=coarse.n_steps() {
            assert_eq!(coarse.brownian_at(k), fine.brownian_at(4 * k), "k = {k}");
        }
    }

    #[test]
    fn increment_moments() {
        // mean and variance of 2^20 increments against CLT / chi-square bands
        let path: NoisePath<f64> = NoisePath::sample(2024, 1.0, 1 << 20).unwrap();
        let n = path.n_steps();
        let dt = path.dt();
        let m = mean(path.increments());
        let se_mean = (dt / n as f64).sqrt();
        assert!(m.abs() < 4.0 * se_mean, "mean {m} vs band {se_mean}");
        let sq: Vec<f64> = path.increments().iter().map(|&x| x * x).collect();
        let var = mean(&sq);
        let se_var = dt * (2.0 / n as f64).sqrt();
        assert!((var - dt).abs() < 4.0 * se_var, "var {var} dt {dt}");
    }

    #[test]
    fn bridge_midpoint_conditional_variance() {
        // Z = d1 - dW/2 recovered over an ensemble; Var Z = dt_coarse / 4.
        let n_paths = 20000;
        let mut zs = Vec::with_capacity(n_paths);
        for k in 0..n_paths {
            let p: NoisePath<f64> = NoisePath::sample(sample_seed(5, k as u64), 1.0, 1).unwrap();
            let dw = p.increments()[0];
            let f = p.refine();
            zs.push(f.increments()[0] - 0.5 * dw);
        }
        let sq: Vec<f64> = zs.iter().map(|&z| z * z).collect();
        let var = mean(&sq);
        let se = 0.25 * (2.0 / n_paths as f64).sqrt();
        assert!((var - 0.25).abs() < 4.0 * se, "var {var}");
    }

    #[test]
    fn distinct_samples_uncorrelated() {
        let a: NoisePath<f64> = NoisePath::sample(sample_seed(42, 0), 1.0, 4096).unwrap();
        let b: NoisePath<f64> = NoisePath::sample(sample_seed(42, 1), 1.0, 4096).unwrap();
        let dt = a.dt();
        let prods: Vec<f64> = a
            .increments()
            .iter()
            .zip(b.increments())
            .map(|(&x, &y)| x * y / dt)
            .collect();
        let corr = mean(&prods);
        let band = 4.0 * std_error(&prods);
        assert!(corr.abs() < band.max(4.0 / (4096f64).sqrt()), "corr {corr}");
    }

    #[test]
    fn quantization_dither_is_subliminal() {
        let path: NoisePath<f64> = NoisePath::sample(1, 1.0, 1 << 12).unwrap();
        let sigma = path.dt().sqrt();
        // quantum far below the increment scale
        let q = path.quantum;
        assert!(q < 1e-9 * sigma, "quantum {q} vs sigma {sigma}");
    }

    #[test]
    fn works_in_single_precision() {
        let coarse: NoisePath<f32> = NoisePath::sample(17, 1.0, 64).unwrap();
        let fine = coarse.refine();
        for (i, &dw) in coarse.increments().iter().enumerate() {
            assert_eq!(fine.increments()[2 * i] + fine.increments()[2 * i + 1], dw);
        }
        for k in 0..=64 {
            assert_eq!(coarse.brownian_at(k), fine.brownian_at(2 * k));
        }
    }
}
