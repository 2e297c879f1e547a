//! Cell-averaged periodic fields on the 1-D unit torus, with the discrete
//! norms and semi-norms the estimates are stated in.
//!
//! A field holds `n_cells` cell averages of u(x) on [0, 1); cell `i` covers
//! [i dx, (i+1) dx) with dx = 1/n_cells and indexing wraps periodically.

use crate::bump;
use crate::error::{Error, Result};
use crate::quad;
use crate::scalar::Real;
use crate::stats::pairwise_sum;

/// Cell-averaged field on the unit torus.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField<T> {
    values: Vec<T>,
}

impl<T: Real> TorusField<T> {
    /// Wraps raw cell averages; rejects empty or non-finite data.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "field needs at least one cell".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField);
        }
        Ok(Self { values })
    }

    /// Constant field.
    pub fn constant(n_cells: usize, c: T) -> Self {
        Self {
            values: vec![c; n_cells],
        }
    }

    /// Samples `f` at cell centers x_i = (i + 1/2) dx.
    pub fn from_fn(n_cells: usize, f: impl Fn(T) -> T) -> Self {
        let dx = T::one() / T::of_usize(n_cells);
        let half = T::lit(0.5);
        let values = (0..n_cells)
            .map(|i| f((T::of_usize(i) + half) * dx))
            .collect();
        Self { values }
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    pub fn dx(&self) -> T {
        T::one() / T::of_usize(self.n_cells())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Cell center coordinate of cell `i`.
    pub fn cell_center(&self, i: usize) -> T {
        (T::of_usize(i) + T::lit(0.5)) * self.dx()
    }

    /// Periodic access: index is reduced modulo `n_cells`.
    pub fn get(&self, i: i64) -> T {
        let n = self.values.len() as i64;
        self.values[i.rem_euclid(n) as usize]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        check_same_resolution(self, other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self { values })
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Mean value (= total mass, since the torus has measure one).
    pub fn mean(&self) -> T {
        pairwise_sum(&self.values) / T::of_usize(self.n_cells())
    }

    /// Discrete L^p norm `(dx sum |u_i|^p)^(1/p)`, p >= 1.
    pub fn lp_norm(&self, p: T) -> Result<T> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lp_norm needs finite p >= 1, got {p}"
            )));
        }
        let powers: Vec<T> = self.values.iter().map(|v| v.abs().powf(p)).collect();
        Ok((self.dx() * pairwise_sum(&powers)).powf(p.recip()))
    }

    /// Total variation `sum_i |u_{i+1} - u_i|` with periodic wrap.
    pub fn bv_seminorm(&self) -> T {
        let n = self.values.len();
        let diffs: Vec<T> = (0..n)
            .map(|i| (self.get(i as i64 + 1) - self.values[i]).abs())
            .collect();
        pairwise_sum(&diffs)
    }

    /// Shift by a whole number of cells: result_i = u_{i + k}.
    pub fn shift_cells(&self, k: i64) -> Self {
        let n = self.values.len();
        let values = (0..n).map(|i| self.get(i as i64 + k)).collect();
        Self { values }
    }

    /// Shift by `h`, which must be grid-aligned (a multiple of dx).
    pub fn shift(&self, h: T) -> Result<Self> {
        let dx = self.dx();
        let ratio = h / dx;
        let k = ratio.round();
        if (ratio - k).abs() > T::lit(1e-9) {
            return Err(Error::NonAlignedShift {
                h: h.as_f64(),
                dx: dx.as_f64(),
            });
        }
        Ok(self.shift_cells(k.as_f64() as i64))
    }

    /// Discrete Nikolskii semi-norm with p = 1: the maximum over grid-aligned
    /// shifts h in {dx, 2 dx, ..., h_max} of `(dx sum |u(x+h) - u(x)|) / h^kappa`.
    ///
    /// Shifts are restricted to the grid so no interpolation error pollutes
    /// the semi-norm; this is a lower approximation of the shift supremum.
    pub fn nikolskii_seminorm(&self, kappa: T, h_max: T) -> Result<T> {
        if !(kappa > T::zero() && kappa <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "nikolskii exponent must lie in (0, 1], got {kappa}"
            )));
        }
        let dx = self.dx();
        if h_max < dx {
            return Err(Error::InvalidParameter(format!(
                "h_max = {h_max} is below the cell width {dx}"
            )));
        }
        let k_max = (h_max / dx + T::lit(1e-9)).floor().as_f64() as i64;
        let mut best = T::zero();
        for k in 1..=k_max {
            let diffs: Vec<T> = (0..self.values.len())
                .map(|i| (self.get(i as i64 + k) - self.values[i]).abs())
                .collect();
            let h = T::of_usize(k as usize) * dx;
            let val = dx * pairwise_sum(&diffs) / h.powf(kappa);
            best = best.max(val);
        }
        Ok(best)
    }

    /// Serialises as CSV with a mandatory header: one `(index, value)` row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{i},{v:e}\n"));
        }
        out
    }

    /// Parses the CSV emitted by [`TorusField::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "index,value" => {}
            _ => {
                return Err(Error::CsvParse {
                    line: 1,
                    message: "missing `index,value` header".into(),
                })
            }
        }
        let mut values = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let (i, v) = match (cols.next(), cols.next(), cols.next()) {
                (Some(i), Some(v), None) => (i, v),
                _ => {
                    return Err(Error::CsvParse {
                        line: idx + 1,
                        message: "expected two columns".into(),
                    })
                }
            };
            let i: usize = i.trim().parse().map_err(|_| Error::CsvParse {
                line: idx + 1,
                message: format!("bad index `{i}`"),
            })?;
            if i != values.len() {
                return Err(Error::CsvParse {
                    line: idx + 1,
                    message: format!("out-of-order index {i}"),
                });
            }
            let v: f64 = v.trim().parse().map_err(|_| Error::CsvParse {
                line: idx + 1,
                message: format!("bad value `{v}`"),
            })?;
            values.push(T::lit(v));
        }
        Self::new(values)
    }
}

fn check_same_resolution<T: Real>(u: &TorusField<T>, v: &TorusField<T>) -> Result<()> {
    if u.n_cells() != v.n_cells() {
        return Err(Error::ResolutionMismatch {
            left: u.n_cells(),
            right: v.n_cells(),
        });
    }
    Ok(())
}

/// `dx sum max(v_i - u_i, 0)`: the positive-part distance the stability
/// estimates are stated in.
pub fn positive_part_l1<T: Real>(u: &TorusField<T>, v: &TorusField<T>) -> Result<T> {
    check_same_resolution(u, v)?;
    let parts: Vec<T> = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(&a, &b)| (b - a).max(T::zero()))
        .collect();
    Ok(u.dx() * pairwise_sum(&parts))
}

/// `dx sum |u_i - v_i|`.
pub fn l1_distance<T: Real>(u: &TorusField<T>, v: &TorusField<T>) -> Result<T> {
    check_same_resolution(u, v)?;
    let parts: Vec<T> = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(&a, &b)| (b - a).abs())
        .collect();
    Ok(u.dx() * pairwise_sum(&parts))
}

/// Friedrichs mollifier J_theta(x) = J(x/theta)/theta built from the
/// normalized even bump profile, supported on [-theta, theta].
#[derive(Debug, Clone, Copy)]
pub struct Mollifier<T> {
    theta: T,
}

impl<T: Real> Mollifier<T> {
    /// Support radius must satisfy 0 < theta <= 1/2 on the unit torus.
    pub fn new(theta: T) -> Result<Self> {
        if !(theta > T::zero() && theta <= T::lit(0.5)) {
            return Err(Error::InvalidParameter(format!(
                "mollifier support must lie in (0, 1/2], got {theta}"
            )));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// Pointwise kernel value J_theta(x).
    pub fn evaluate(&self, x: T) -> T {
        T::lit(bump::bump((x / self.theta).as_f64())) / self.theta
    }

    /// Kernel mass by independent quadrature (diagnostic; 1 up to tolerance).
    pub fn mass(&self) -> Result<T> {
        let theta = self.theta.as_f64();
        let v = quad::integrate(|x| bump::bump(x / theta) / theta, -theta, theta, 1e-12)?;
        Ok(T::lit(v))
    }
}

/// Periodic convolution `J_theta * u` on cell averages.
///
/// Kernel weights are sampled at cell offsets and renormalised to unit sum,
/// so the convolution preserves the mean and is total-variation
/// non-expansive. Requires theta >= 2 dx so the kernel is resolved.
pub fn mollify<T: Real>(f: &TorusField<T>, j: &Mollifier<T>) -> Result<TorusField<T>> {
    let dx = f.dx();
    if j.theta < T::lit(2.0) * dx {
        return Err(Error::UnderResolvedMollifier {
            theta: j.theta.as_f64(),
            dx: dx.as_f64(),
        });
    }
    let reach = (j.theta / dx).as_f64().ceil() as i64;
    let mut weights = Vec::with_capacity((2 * reach + 1) as usize);
    for k in -reach..=reach {
        weights.push(j.evaluate(T::lit(k as f64) * dx) * dx);
    }
    let total = pairwise_sum(&weights);
    let n = f.n_cells();
    let mut out = vec![T::zero(); n];
    let mut terms = vec![T::zero(); weights.len()];
    for (i, slot) in out.iter_mut().enumerate() {
        for (w_idx, k) in (-reach..=reach).enumerate() {
            terms[w_idx] = weights[w_idx] * f.get(i as i64 + k);
        }
        *slot = pairwise_sum(&terms) / total;
    }
    TorusField::new(out)
}

/// Canned initial-data profiles used by the experiments and the CLI.
pub mod profiles {
    use super::TorusField;
    use crate::scalar::Real;

    /// `mean + amp sin(2 pi x)` sampled at cell centers.
    pub fn sine<T: Real>(n_cells: usize, amp: T, mean: T) -> TorusField<T> {
        TorusField::from_fn(n_cells, |x| mean + amp * (T::TAU() * x).sin())
    }

    /// Indicator of [0, 1/2) scaled to `hi`, `lo` elsewhere. Two unit jumps
    /// when hi - lo = 1.
    pub fn step<T: Real>(n_cells: usize, lo: T, hi: T) -> TorusField<T> {
        TorusField::from_fn(n_cells, |x| if x < T::lit(0.5) { hi } else { lo })
    }

    /// Monotone ramp x on [0, 1) (variation 1 plus a unit wrap jump).
    pub fn ramp<T: Real>(n_cells: usize) -> TorusField<T> {
        TorusField::from_fn(n_cells, |x| x)
    }

    /// Sum of `modes` sines with amplitudes 1/k and fixed incommensurate
    /// phases, so every low mode is populated.
    pub fn multi_sine<T: Real>(n_cells: usize, modes: usize, amp: T) -> TorusField<T> {
        TorusField::from_fn(n_cells, |x| {
            let mut acc = T::zero();
            for k in 1..=modes {
                let kk = T::of_usize(k);
                let phase = T::lit(0.7548776662466927) * kk * kk;
                acc += amp / kk * (T::TAU() * kk * x + phase).sin();
            }
            acc
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    type F = TorusField<f64>;

    #[test]
    fn lp_norm_examples() {
        let zero = F::constant(64, 0.0);
        assert_eq!(zero.lp_norm(2.0).unwrap(), 0.0);
        let c = F::constant(64, -2.5);
        assert_abs_diff_eq!(c.lp_norm(1.0).unwrap(), 2.5, epsilon = 1e-14);
        // indicator of [0, 1/2), p = 3: (1/2)^(1/3)
        let ind = profiles::step(64, 0.0, 1.0);
        assert_abs_diff_eq!(
            ind.lp_norm(3.0).unwrap(),
            0.5f64.powf(1.0 / 3.0),
            epsilon = 1e-14
        );
        assert!(ind.lp_norm(0.5).is_err());
    }

    #[test]
    fn positive_part_examples() {
        let u = F::constant(32, 0.0);
        let v = F::constant(32, 0.7);
        assert_abs_diff_eq!(positive_part_l1(&u, &v).unwrap(), 0.7, epsilon = 1e-15);
        assert_eq!(positive_part_l1(&v, &v).unwrap(), 0.0);
        // u = indicator of [0,1/2), v = 1/2: only cells where u = 0 contribute 1/2.
        let u = profiles::step(64, 0.0, 1.0);
        let v = F::constant(64, 0.5);
        assert_abs_diff_eq!(positive_part_l1(&u, &v).unwrap(), 0.25, epsilon = 1e-14);
        let w = F::constant(16, 0.0);
        assert!(positive_part_l1(&u, &w).is_err());
    }

    #[test]
    fn shift_group_laws() {
        let f = profiles::multi_sine::<f64>(64, 5, 1.0);
        assert_eq!(f.shift(0.0).unwrap(), f);
        assert_eq!(f.shift(1.0).unwrap(), f);
        let h = 5.0 / 64.0;
        assert_eq!(f.shift(h).unwrap().shift(-h).unwrap(), f);
        assert!(f.shift(0.013).is_err());
    }

    #[test]
    fn bv_examples() {
        assert_eq!(F::constant(32, 3.0).bv_seminorm(), 0.0);
        assert_abs_diff_eq!(
            profiles::step::<f64>(64, 0.0, 1.0).bv_seminorm(),
            2.0,
            epsilon = 1e-14
        );
        // ramp: interior variation 1 - dx, wrap jump 1 - dx, sampled at centers
        let n = 128;
        let ramp = profiles::ramp::<f64>(n);
        let expected: f64 = (0..n)
            .map(|i| {
                let a = (i as f64 + 0.5) / n as f64;
                let b = ((i + 1) % n) as f64;
                let b = (b + 0.5) / n as f64;
                (b - a).abs()
            })
            .sum();
        assert_abs_diff_eq!(ramp.bv_seminorm(), expected, epsilon = 1e-13);
        assert_abs_diff_eq!(
            ramp.bv_seminorm(),
            2.0 * (1.0 - 1.0 / n as f64),
            epsilon = 1e-13
        );
    }

    #[test]
    fn nikolskii_examples() {
        let c = F::constant(64, 4.2);
        assert_eq!(c.nikolskii_seminorm(0.5, 0.25).unwrap(), 0.0);
        // indicator, kappa = 1, h_max = 1/4: every shifted L1 difference is 2h.
        let ind = profiles::step::<f64>(64, 0.0, 1.0);
        assert_abs_diff_eq!(
            ind.nikolskii_seminorm(1.0, 0.25).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert!(ind.nikolskii_seminorm(1.5, 0.25).is_err());
        assert!(ind.nikolskii_seminorm(0.0, 0.25).is_err());
    }

    #[test]
    fn nikolskii_of_sine_approaches_total_variation() {
        // |sin(2 pi .)|_BV = 4; the kappa = 1 seminorm approaches it from
        // below as h -> dx. Dense h sweep is the oracle.
        let n = 512;
        let f = profiles::sine::<f64>(n, 1.0, 0.0);
        let semi = f.nikolskii_seminorm(1.0, 0.25).unwrap();
        assert!(semi <= 4.0 + 1e-10, "semi = {semi}");
        assert!(semi > 4.0 - 4.0 * std::f64::consts::PI / n as f64 - 1e-9);
        // and is dominated by (indeed attained near) the BV semi-norm
        assert!(semi <= f.bv_seminorm() + 1e-12);
    }

    #[test]
    fn mollifier_mass_and_symmetry() {
        let j = Mollifier::new(0.1f64).unwrap();
        assert_abs_diff_eq!(j.mass().unwrap(), 1.0, epsilon = 1e-10);
        for x in [0.0, 0.03, 0.07] {
            assert_eq!(j.evaluate(x), j.evaluate(-x));
        }
        assert!(Mollifier::new(0.6f64).is_err());
        assert!(Mollifier::new(0.0f64).is_err());
    }

    #[test]
    fn mollify_constant_and_mean() {
        let j = Mollifier::new(0.1f64).unwrap();
        let c = F::constant(128, 1.7);
        let m = mollify(&c, &j).unwrap();
        for &v in m.values() {
            assert_abs_diff_eq!(v, 1.7, epsilon = 1e-13);
        }
        let f = profiles::multi_sine::<f64>(128, 9, 1.3);
        let m = mollify(&f, &j).unwrap();
        assert_abs_diff_eq!(m.mean(), f.mean(), epsilon = 1e-12);
        // under-resolved kernel rejected
        let tiny = Mollifier::new(0.01f64).unwrap();
        assert!(mollify(&F::constant(16, 0.0), &tiny).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let f = profiles::sine::<f64>(16, 0.9, 0.1);
        let back = F::from_csv(&f.to_csv()).unwrap();
        assert_eq!(f, back);
        assert!(F::from_csv("0,1.0\n").is_err());
        assert!(F::from_csv("index,value\nx,1.0\n").is_err());
    }
}
