//! Spectral fixed-point solver for the uniformly parabolic regularisation,
//! used as an independent oracle for smooth short-time regimes.
//!
//! The mild formulation on the torus reads
//!
//! ```text
//! u(t) = G(t) u0 - int_0^t G(t-s) dF(u(s))/dx ds
//!               + int_0^t G(t-s) d^2B(u(s))/dx^2 ds
//!               + int_0^t G(t-s) sigma(u(s)) dW(s)
//! ```
//!
//! with `G` the eps-heat semigroup, applied here as the exact Fourier
//! multiplier. The degenerate diffusion B(u) rides in the Duhamel source, so
//! the fixed kernel stays constant-coefficient and spectrally exact; the
//! stochastic convolution uses left-endpoint (Ito) evaluation on the path
//! grid. Picard iteration from the pure heat flow detects its own
//! contraction through the residual history.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::TorusField;
use crate::noise::NoisePath;
use crate::problem::ProblemSpec;
use crate::scalar::Real;

/// Forward/inverse transforms of a fixed size.
struct Spectral<T: Real> {
    n: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> Spectral<T> {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    fn forward(&self, values: &[T]) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse(&self, hat: &[Complex<T>]) -> Vec<T> {
        let mut buf = hat.to_vec();
        self.inv.process(&mut buf);
        let scale = T::one() / T::of_usize(self.n);
        buf.into_iter().map(|c| c.re * scale).collect()
    }

    /// Signed integer frequency of bin j.
    fn freq(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }
}

/// Applies the heat semigroup: Fourier multiplier exp(-nu 4 pi^2 k^2 t)
/// mode-wise. The zero mode is untouched, so the mean is preserved.
pub fn heat_propagate<T: Real>(f: &TorusField<T>, nu: T, t: T) -> TorusField<T> {
    if t == T::zero() {
        return f.clone();
    }
    let sp = Spectral::new(f.n_cells());
    let mut hat = sp.forward(f.values());
    for (j, h) in hat.iter_mut().enumerate() {
        let k = T::lit(sp.freq(j) as f64);
        let rate = nu * T::lit(4.0) * T::PI() * T::PI() * k * k;
        *h *= (-rate * t).exp();
    }
    TorusField::new(sp.inverse(&hat)).expect("heat propagation preserves finiteness")
}

/// Spectral spatial derivative (Nyquist mode zeroed). Serves as a derivative
/// oracle independent of finite differences.
pub fn spectral_derivative<T: Real>(f: &TorusField<T>) -> TorusField<T> {
    let sp = Spectral::new(f.n_cells());
    let n = f.n_cells();
    let mut hat = sp.forward(f.values());
    for (j, h) in hat.iter_mut().enumerate() {
        if 2 * j == n {
            *h = Complex::new(T::zero(), T::zero());
        } else {
            let k = T::TAU() * T::lit(sp.freq(j) as f64);
            *h = Complex::new(-h.im * k, h.re * k);
        }
    }
    TorusField::new(sp.inverse(&hat)).expect("derivative of finite field is finite")
}

/// |u_hat_k| for k = 0..=n/2, normalised so a unit sine has magnitude 1/2.
pub fn mode_magnitudes<T: Real>(f: &TorusField<T>) -> Vec<T> {
    let sp = Spectral::new(f.n_cells());
    let hat = sp.forward(f.values());
    let scale = T::one() / T::of_usize(f.n_cells());
    (0..=f.n_cells() / 2)
        .map(|k| hat[k].norm() * scale)
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct DuhamelConfig<T> {
    /// Fourier resolution; must match the field resolution.
    pub n_modes: usize,
    /// Uniform parabolicity constant, strictly positive.
    pub epsilon: T,
    /// Minimum number of quadrature substeps on [0, t_final].
    pub n_time: usize,
    /// Fixed-point tolerance in L^p.
    pub tol: T,
    pub max_iters: usize,
    /// Integrability exponent for the residual norm, >= 2.
    pub p: T,
}

impl<T: Real> DuhamelConfig<T> {
    pub fn new(n_modes: usize, epsilon: T) -> Self {
        Self {
            n_modes,
            epsilon,
            n_time: 128,
            tol: T::lit(1e-8),
            max_iters: 50,
            p: T::lit(2.0),
        }
    }

    pub fn with_n_time(mut self, n_time: usize) -> Self {
        self.n_time = n_time;
        self
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }
}

/// Result of a Picard solve: iterates on the path grid plus the residual
/// history that certifies (or refutes) the contraction.
#[derive(Debug, Clone)]
pub struct PicardSolution<T> {
    pub times: Vec<T>,
    pub states: Vec<TorusField<T>>,
    pub iterations: usize,
    pub residuals: Vec<T>,
}

impl<T: Real> PicardSolution<T> {
    pub fn final_state(&self) -> &TorusField<T> {
        self.states.last().expect("picard grid is never empty")
    }

    /// Ratios of consecutive residuals (the measured contraction factors).
    pub fn residual_ratios(&self) -> Vec<T> {
        self.residuals.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Picard iteration on the mild form over the path's grid, starting from the
/// pure heat flow. The horizon is the path's `t_final`; the path is refined
/// until it has at least `cfg.n_time` steps. Errors when the residuals stop
/// contracting or `max_iters` is exceeded.
pub fn picard_solve<T: Real>(
    spec: &ProblemSpec<T>,
    u0: &TorusField<T>,
    cfg: &DuhamelConfig<T>,
    path: &NoisePath<T>,
) -> Result<PicardSolution<T>> {
    let n = cfg.n_modes;
    if u0.n_cells() != n {
        return Err(Error::ResolutionMismatch {
            left: u0.n_cells(),
            right: n,
        });
    }
    if !(cfg.epsilon > T::zero()) {
        return Err(Error::InvalidParameter(
            "duhamel epsilon must be strictly positive".into(),
        ));
    }
    if !(cfg.p >= T::lit(2.0)) {
        return Err(Error::InvalidParameter(format!(
            "integrability exponent must be >= 2, got {}",
            cfg.p
        )));
    }
    let mut grid = path.clone();
    while grid.n_steps() < cfg.n_time {
        grid = grid.refine();
    }
    let m = grid.n_steps();
    let ds = grid.dt();
    let times: Vec<T> = (0..=m).map(|j| T::of_usize(j) * ds).collect();

    let sp = Spectral::new(n);
    let two_pi = T::TAU();
    // per-mode semigroup factor over one substep and derivative symbols
    let mut e_step = Vec::with_capacity(n);
    let mut ik = Vec::with_capacity(n);
    let mut k2 = Vec::with_capacity(n);
    for j in 0..n {
        let k = T::lit(sp.freq(j) as f64) * two_pi;
        e_step.push((-cfg.epsilon * k * k * ds).exp());
        k2.push(k * k);
        ik.push(if 2 * j == n { T::zero() } else { k });
    }

    // zeroth iterate: the heat flow of the initial data
    let mut current: Vec<TorusField<T>> = times
        .iter()
        .map(|&t| heat_propagate(u0, cfg.epsilon, t))
        .collect();

    let mut residuals: Vec<T> = Vec::new();
    for iter in 1..=cfg.max_iters {
        let mut hat = sp.forward(u0.values());
        let mut next: Vec<TorusField<T>> = Vec::with_capacity(m + 1);
        next.push(u0.clone());
        for (j, prev) in current[..m].iter().enumerate() {
            let flux_vals: Vec<T> = prev
                .values()
                .iter()
                .enumerate()
                .map(|(i, &v)| spec.flux(v, prev.cell_center(i)))
                .collect();
            let b_vals: Vec<T> = prev.values().iter().map(|&v| spec.kirchhoff_b(v)).collect();
            let sigma_vals: Vec<T> = prev.values().iter().map(|&v| spec.sigma(v)).collect();
            let flux_hat = sp.forward(&flux_vals);
            let b_hat = sp.forward(&b_vals);
            let sigma_hat = sp.forward(&sigma_vals);
            let dw = grid.increments()[j];
            for i in 0..n {
                // -d/dx F in Fourier, diffusion source, Ito left endpoint
                let transport = Complex::new(flux_hat[i].im * ik[i], -flux_hat[i].re * ik[i]);
                let source = (transport - b_hat[i] * k2[i]) * ds + sigma_hat[i] * dw;
                hat[i] = (hat[i] + source) * e_step[i];
            }
            next.push(TorusField::new(sp.inverse(&hat))?);
        }
        let mut res = T::zero();
        for (a, b) in next.iter().zip(&current) {
            let d = a.zip_map(b, |x, y| x - y)?;
            res = res.max(d.lp_norm(cfg.p)?);
        }
        residuals.push(res);
        current = next;
        if res < cfg.tol {
            return Ok(PicardSolution {
                times,
                states: current,
                iterations: iter,
                residuals,
            });
        }
        let r = residuals.len();
        if r >= 3 && residuals[r - 1] >= residuals[r - 2] && residuals[r - 2] >= residuals[r - 3] {
            return Err(Error::NonContraction {
                ratio: (residuals[r - 1] / residuals[r - 2]).as_f64(),
            });
        }
    }
    Err(Error::MaxItersExceeded {
        iters: cfg.max_iters,
        residual: residuals.last().copied().unwrap_or_else(T::zero).as_f64(),
    })
}
