//! Deterministic aggregation and log-log regression.
//!
//! Every ensemble reduction in the crate goes through [`pairwise_sum`], which
//! sums over a fixed dyadic index tree. The result is independent of worker
//! scheduling, and dyadic blocks of a refined noise path reduce to exactly
//! the same floating-point operations as the coarse blocks they came from.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sum over the dyadic tree: split at the largest power of two below `len`.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mut half = n.next_power_of_two() / 2;
            if half == n {
                half = n / 2;
            }
            pairwise_sum(&xs[..half]) + pairwise_sum(&xs[half..])
        }
    }
}

/// Prefix sum of the first `k` entries, folded over the dyadic blocks of the
/// binary decomposition of `k` (most significant block first). When each
/// refined block sums exactly to its coarse parent, these prefixes agree
/// bit-for-bit across refinement levels.
pub fn dyadic_prefix_sum<T: Real>(xs: &[T], k: usize) -> T {
    assert!(k <= xs.len());
    let mut acc = T::zero();
    let mut start = 0usize;
    let mut remaining = k;
    while remaining > 0 {
        let block = prev_power_of_two(remaining);
        acc += pairwise_sum(&xs[start..start + block]);
        start += block;
        remaining -= block;
    }
    acc
}

fn prev_power_of_two(n: usize) -> usize {
    debug_assert!(n > 0);
    let npot = n.next_power_of_two();
    if npot == n {
        n
    } else {
        npot / 2
    }
}

/// Sample mean with the deterministic pairwise reduction.
pub fn mean<T: Real>(xs: &[T]) -> T {
    pairwise_sum(xs) / T::of_usize(xs.len())
}

/// Standard error of the sample mean.
pub fn std_error<T: Real>(xs: &[T]) -> T {
    let n = xs.len();
    if n < 2 {
        return T::zero();
    }
    let m = mean(xs);
    let sq: Vec<T> = xs.iter().map(|&x| (x - m) * (x - m)).collect();
    (pairwise_sum(&sq) / T::of_usize(n - 1) / T::of_usize(n)).sqrt()
}

/// Result of a least-squares power-law fit `value = prefactor * scale^exponent`.
#[derive(Debug, Clone)]
pub struct RateFit<T> {
    pub exponent: T,
    pub prefactor: T,
    pub r_squared: T,
    /// Standard error of the fitted exponent (from the log-log residuals).
    pub exponent_stderr: T,
    /// The (scale, value) points the fit was made from.
    pub points: Vec<(T, T)>,
}

/// Least squares on (log scale, log value). Needs at least three strictly
/// positive points.
pub fn fit_power_law<T: Real>(points: &[(T, T)]) -> Result<RateFit<T>> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(s, v)| !(s > T::zero()) || !(v > T::zero()))
    {
        return Err(Error::InvalidParameter(
            "power-law fit needs strictly positive scales and values".into(),
        ));
    }
    let n = T::of_usize(points.len());
    let logs: Vec<(T, T)> = points.iter().map(|&(s, v)| (s.ln(), v.ln())).collect();
    let sx = pairwise_sum(&logs.iter().map(|p| p.0).collect::<Vec<_>>());
    let sy = pairwise_sum(&logs.iter().map(|p| p.1).collect::<Vec<_>>());
    let mx = sx / n;
    let my = sy / n;
    let sxx = pairwise_sum(
        &logs
            .iter()
            .map(|p| (p.0 - mx) * (p.0 - mx))
            .collect::<Vec<_>>(),
    );
    let sxy = pairwise_sum(
        &logs
            .iter()
            .map(|p| (p.0 - mx) * (p.1 - my))
            .collect::<Vec<_>>(),
    );
    let syy = pairwise_sum(
        &logs
            .iter()
            .map(|p| (p.1 - my) * (p.1 - my))
            .collect::<Vec<_>>(),
    );
    if !(sxx > T::zero()) {
        return Err(Error::InvalidParameter(
            "power-law fit needs at least two distinct scales".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: Vec<T> = logs
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .collect();
    let ss_res = pairwise_sum(&ss_res);
    let r_squared = if syy > T::zero() {
        (T::one() - ss_res / syy).max(T::zero())
    } else {
        T::one() // all values equal: the zero-slope line explains everything
    };
    let dof = points.len().saturating_sub(2);
    let exponent_stderr = if dof > 0 && ss_res >= T::zero() {
        (ss_res / T::of_usize(dof) / sxx).sqrt()
    } else {
        T::zero()
    };
    Ok(RateFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
        exponent_stderr,
        points: points.to_vec(),
    })
}

/// Result of a least-squares exponential fit `value = amplitude * exp(rate t)`.
#[derive(Debug, Clone)]
pub struct ExpFit<T> {
    pub rate: T,
    pub amplitude: T,
    pub r_squared: T,
    pub rate_stderr: T,
}

/// Least squares of `ln value` on `t`. Needs at least three strictly
/// positive values.
pub fn fit_exponential<T: Real>(points: &[(T, T)]) -> Result<ExpFit<T>> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "exponential fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(_, v)| !(v > T::zero())) {
        return Err(Error::InvalidParameter(
            "exponential fit needs positive values".into(),
        ));
    }
    let n = T::of_usize(points.len());
    let logs: Vec<(T, T)> = points.iter().map(|&(t, v)| (t, v.ln())).collect();
    let mx = pairwise_sum(&logs.iter().map(|p| p.0).collect::<Vec<_>>()) / n;
    let my = pairwise_sum(&logs.iter().map(|p| p.1).collect::<Vec<_>>()) / n;
    let sxx = pairwise_sum(
        &logs
            .iter()
            .map(|p| (p.0 - mx) * (p.0 - mx))
            .collect::<Vec<_>>(),
    );
    let sxy = pairwise_sum(
        &logs
            .iter()
            .map(|p| (p.0 - mx) * (p.1 - my))
            .collect::<Vec<_>>(),
    );
    let syy = pairwise_sum(
        &logs
            .iter()
            .map(|p| (p.1 - my) * (p.1 - my))
            .collect::<Vec<_>>(),
    );
    if !(sxx > T::zero()) {
        return Err(Error::InvalidParameter(
            "exponential fit needs distinct times".into(),
        ));
    }
    let rate = sxy / sxx;
    let intercept = my - rate * mx;
    let ss_res: Vec<T> = logs
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + rate * x);
            r * r
        })
        .collect();
    let ss_res = pairwise_sum(&ss_res);
    let r_squared = if syy > T::zero() {
        (T::one() - ss_res / syy).max(T::zero())
    } else {
        T::one()
    };
    let dof = points.len().saturating_sub(2);
    let rate_stderr = if dof > 0 {
        (ss_res / T::of_usize(dof) / sxx).sqrt()
    } else {
        T::zero()
    };
    Ok(ExpFit {
        rate,
        amplitude: intercept.exp(),
        r_squared,
        rate_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_fit_recovers_rate() {
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|j| {
                let t = j as f64 * 0.1;
                (t, 2.0 * (1.7 * t).exp())
            })
            .collect();
        let fit = fit_exponential(&pts).unwrap();
        assert_abs_diff_eq!(fit.rate, 1.7, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.amplitude, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..97).map(|i| (i as f64 * 0.37).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert_abs_diff_eq!(pairwise_sum(&xs), naive, epsilon = 1e-12);
    }

    #[test]
    fn dyadic_prefix_consistency() {
        let xs: Vec<f64> = (0..64).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        assert_eq!(dyadic_prefix_sum(&xs, 0), 0.0);
        assert_abs_diff_eq!(
            dyadic_prefix_sum(&xs, 13),
            xs[..13].iter().sum::<f64>(),
            epsilon = 1e-13
        );
        assert_eq!(dyadic_prefix_sum(&xs, 64), pairwise_sum(&xs));
    }

    #[test]
    fn power_law_exact_quadratic() {
        let fit = fit_power_law(&[(1.0, 1.0), (2.0, 4.0), (4.0, 16.0)]).unwrap();
        assert_abs_diff_eq!(fit.exponent, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.prefactor, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn power_law_constant_series() {
        let c = 3.7;
        let fit = fit_power_law(&[(1.0, c), (2.0, c), (4.0, c)]).unwrap();
        assert_abs_diff_eq!(fit.exponent, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.prefactor, c, epsilon = 1e-10);
    }

    #[test]
    fn power_law_noisy_recovery() {
        // y = 3 x^{1.5} with 1% deterministic multiplicative perturbation
        let pts: Vec<(f64, f64)> = (1..=12)
            .map(|i| {
                let x = 1.5f64.powi(i);
                let noise = 1.0 + 0.01 * ((i as f64) * 2.399963).sin();
                (x, 3.0 * x.powf(1.5) * noise)
            })
            .collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!(
            (fit.exponent - 1.5).abs() < 0.05,
            "exponent {}",
            fit.exponent
        );
    }

    #[test]
    fn power_law_rejections() {
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, -2.0), (3.0, 1.0)]).is_err());
        assert!(fit_power_law(&[(0.0, 1.0), (2.0, 2.0), (3.0, 1.0)]).is_err());
    }
}
