//! Coefficient data for the conservation law
//! `d/dt u + d/dx F(u, x) = d^2/dx^2 B(u) + sigma(u) dW/dt`.
//!
//! A [`ProblemSpec`] carries the heterogeneous flux, the degenerate diffusion
//! with its Kirchhoff transforms, the multiplicative noise, declared Hoelder
//! exponents, and growth certificates valid on the monitored value box.
//!
//! The flux family is
//! `F(u, x) = advection u + burgers c(x) u^2/2 + x_bump sin(2 pi x)/(2 pi)`
//! with `c(x) = 1 + het_amp sin(2 pi x)`; diffusion is
//! `a(u) = constant + m |u|^(m-1)` (porous part optional); noise is
//! `sigma(u) = linear u + sqrt_shift sqrt(1 + u^2) + constant`. Each
//! perturbation axis of the continuous-dependence experiments moves exactly
//! one of these knobs.

use crate::error::{Error, Result};
use crate::quad;
use crate::scalar::Real;

/// Declared Hoelder/Lipschitz exponents of the coefficients.
#[derive(Debug, Clone, Copy)]
pub struct Smoothness<T> {
    /// Hoelder exponent of u -> F_u(u, x).
    pub kappa_f1: T,
    /// Hoelder exponent of x -> D_x F(u, x).
    pub kappa_f2: T,
    /// Hoelder exponent of the noise function, > 1/2.
    pub lambda_sigma: T,
    /// Hoelder exponent of the diffusion square root.
    pub gamma_alpha: T,
}

/// Growth certificates, valid on the monitored value box:
/// |D_x F| <= div_flux (|u|+1), |sigma| <= sigma (|u|+1), a <= diffusion (|u|^deg + 1).
#[derive(Debug, Clone, Copy)]
pub struct GrowthBounds<T> {
    pub div_flux: T,
    pub sigma: T,
    pub diffusion: T,
    pub diffusion_degree: T,
}

#[derive(Debug, Clone, Copy)]
struct FluxCoeffs<T> {
    advection: T,
    burgers: T,
    het_amp: T,
    x_bump: T,
}

#[derive(Debug, Clone, Copy)]
struct DiffusionCoeffs<T> {
    constant: T,
    /// Porous-medium exponent m (> 1) for the a(u) = m |u|^(m-1) part.
    porous_m: Option<T>,
}

#[derive(Debug, Clone, Copy)]
struct NoiseCoeffs<T> {
    linear: T,
    sqrt_shift: T,
    constant: T,
}

/// Immutable coefficient quadruple (F, A = alpha^2, sigma, smoothness data).
#[derive(Debug, Clone)]
pub struct ProblemSpec<T> {
    name: String,
    flux: FluxCoeffs<T>,
    diffusion: DiffusionCoeffs<T>,
    noise: NoiseCoeffs<T>,
    smoothness: Smoothness<T>,
    u_box: (T, T),
}

/// Default monitored value box.
const DEFAULT_U_BOX: f64 = 3.0;

impl<T: Real> ProblemSpec<T> {
    /// Builds one of the named coefficient families. Accepted keys per name:
    ///
    /// - `linear_advection`: `c`, noise keys
    /// - `het_burgers`: `eps_c`, noise keys
    /// - `viscous_burgers`: noise keys (homogeneous Burgers flux; the
    ///   viscosity itself is a solver parameter)
    /// - `porous_medium`: `m`, noise keys
    ///
    /// Noise keys on every family: `sigma_linear`, `sigma_sqrt`,
    /// `sigma_const`. The monitored box half-width is `u_box`.
    pub fn builtin(name: &str, params: &[(&str, f64)]) -> Result<Self> {
        let mut p = Params::new(params);
        let mut spec = match name {
            "linear_advection" => {
                let c = p.take("c", 1.0);
                Self::from_parts(
                    name,
                    FluxCoeffs {
                        advection: T::lit(c),
                        burgers: T::zero(),
                        het_amp: T::zero(),
                        x_bump: T::zero(),
                    },
                    DiffusionCoeffs {
                        constant: T::zero(),
                        porous_m: None,
                    },
                    p.noise(),
                    Smoothness {
                        kappa_f1: T::one(),
                        kappa_f2: T::one(),
                        lambda_sigma: T::one(),
                        gamma_alpha: T::one(),
                    },
                )
            }
            "het_burgers" => {
                let eps_c = p.take("eps_c", 0.5);
                if eps_c.abs() >= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "|eps_c| must be < 1 to keep c(x) positive, got {eps_c}"
                    )));
                }
                Self::from_parts(
                    name,
                    FluxCoeffs {
                        advection: T::zero(),
                        burgers: T::one(),
                        het_amp: T::lit(eps_c),
                        x_bump: T::zero(),
                    },
                    DiffusionCoeffs {
                        constant: T::zero(),
                        porous_m: None,
                    },
                    p.noise(),
                    Smoothness {
                        kappa_f1: T::one(),
                        kappa_f2: T::one(),
                        lambda_sigma: T::one(),
                        gamma_alpha: T::one(),
                    },
                )
            }
            "viscous_burgers" => Self::from_parts(
                name,
                FluxCoeffs {
                    advection: T::zero(),
                    burgers: T::one(),
                    het_amp: T::zero(),
                    x_bump: T::zero(),
                },
                DiffusionCoeffs {
                    constant: T::zero(),
                    porous_m: None,
                },
                p.noise(),
                Smoothness {
                    kappa_f1: T::one(),
                    kappa_f2: T::one(),
                    lambda_sigma: T::one(),
                    gamma_alpha: T::one(),
                },
            ),
            "porous_medium" => {
                let m = p.take("m", 2.0);
                if m <= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "porous-medium exponent must exceed 1, got {m}"
                    )));
                }
                Self::from_parts(
                    name,
                    FluxCoeffs {
                        advection: T::zero(),
                        burgers: T::zero(),
                        het_amp: T::zero(),
                        x_bump: T::zero(),
                    },
                    DiffusionCoeffs {
                        constant: T::zero(),
                        porous_m: Some(T::lit(m)),
                    },
                    p.noise(),
                    Smoothness {
                        kappa_f1: T::one(),
                        kappa_f2: T::one(),
                        lambda_sigma: T::one(),
                        // alpha(u) ~ |u|^((m-1)/2); m = 2 sits on the border.
                        gamma_alpha: T::lit(((m - 1.0) / 2.0).min(1.0)),
                    },
                )
            }
            other => return Err(Error::UnknownProblem(other.into())),
        };
        let half_width = p.take("u_box", DEFAULT_U_BOX);
        if half_width <= 0.0 {
            return Err(Error::InvalidParameter(
                "u_box half-width must be positive".into(),
            ));
        }
        spec.u_box = (T::lit(-half_width), T::lit(half_width));
        p.finish()?;
        Ok(spec)
    }

    fn from_parts(
        name: &str,
        flux: FluxCoeffs<T>,
        diffusion: DiffusionCoeffs<T>,
        noise: NoiseCoeffs<T>,
        smoothness: Smoothness<T>,
    ) -> Self {
        Self {
            name: name.into(),
            flux,
            diffusion,
            noise,
            smoothness,
            u_box: (T::lit(-DEFAULT_U_BOX), T::lit(DEFAULT_U_BOX)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn smoothness(&self) -> Smoothness<T> {
        self.smoothness
    }

    pub fn u_box(&self) -> (T, T) {
        self.u_box
    }

    fn c_of_x(&self, x: T) -> T {
        T::one() + self.flux.het_amp * (T::TAU() * x).sin()
    }

    /// F(u, x).
    pub fn flux(&self, u: T, x: T) -> T {
        self.flux.advection * u
            + self.flux.burgers * self.c_of_x(x) * u * u * T::lit(0.5)
            + self.flux.x_bump * (T::TAU() * x).sin() / T::TAU()
    }

    /// F_u(u, x).
    pub fn flux_u(&self, u: T, x: T) -> T {
        self.flux.advection + self.flux.burgers * self.c_of_x(x) * u
    }

    /// D_x F(u, x): the divergence of the flux in its spatial slot.
    pub fn div_flux(&self, u: T, x: T) -> T {
        let cosx = (T::TAU() * x).cos();
        self.flux.burgers * self.flux.het_amp * T::PI() * cosx * u * u + self.flux.x_bump * cosx
    }

    /// D_x F_u(u, x).
    pub fn div_flux_u(&self, u: T, x: T) -> T {
        self.flux.burgers * self.flux.het_amp * T::TAU() * (T::TAU() * x).cos() * u
    }

    /// Degenerate diffusion a(u) >= 0.
    pub fn diffusion_a(&self, u: T) -> T {
        let porous = match self.diffusion.porous_m {
            Some(m) => m * u.abs().powf(m - T::one()),
            None => T::zero(),
        };
        self.diffusion.constant + porous
    }

    /// alpha(u) = sqrt(a(u)).
    pub fn alpha(&self, u: T) -> T {
        self.diffusion_a(u).sqrt()
    }

    /// Kirchhoff transforms `(B(u), B_half(u))` with `B = integral of a` and
    /// `B_half = integral of alpha` from 0 to u. Closed forms where they
    /// exist, adaptive quadrature (tolerance 1e-10) otherwise.
    pub fn kirchhoff(&self, u: T) -> Result<(T, T)> {
        Ok((self.kirchhoff_b(u), self.kirchhoff_b_half(u)?))
    }

    /// B(u): always in closed form since a is a sum of closed-form pieces.
    pub fn kirchhoff_b(&self, u: T) -> T {
        let porous = match self.diffusion.porous_m {
            Some(m) => u.signum() * u.abs().powf(m),
            None => T::zero(),
        };
        self.diffusion.constant * u + porous
    }

    /// B_half(u) = integral of sqrt(a) from 0 to u.
    pub fn kirchhoff_b_half(&self, u: T) -> Result<T> {
        let c = self.diffusion.constant;
        match self.diffusion.porous_m {
            None => Ok(c.sqrt() * u),
            Some(m) if c == T::zero() => {
                let e = (m + T::one()) * T::lit(0.5);
                Ok(m.sqrt() * u.signum() * u.abs().powf(e) / e)
            }
            Some(m) => {
                let (cf, mf, uf) = (c.as_f64(), m.as_f64(), u.as_f64());
                let val = quad::integrate(
                    |xi| (cf + mf * xi.abs().powf(mf - 1.0)).sqrt(),
                    0.0,
                    uf,
                    1e-10,
                )?;
                Ok(T::lit(val))
            }
        }
    }

    /// Minimiser of u -> F(u, x) when the flux is strictly convex in u
    /// (where F_u crosses zero); `None` for fluxes linear in u.
    pub fn sonic_point(&self, x: T) -> Option<T> {
        if self.flux.burgers == T::zero() {
            None
        } else {
            Some(-self.flux.advection / (self.flux.burgers * self.c_of_x(x)))
        }
    }

    /// sigma(u).
    pub fn sigma(&self, u: T) -> T {
        self.noise.linear * u
            + self.noise.sqrt_shift * (T::one() + u * u).sqrt()
            + self.noise.constant
    }

    /// True when sigma vanishes identically.
    pub fn is_deterministic(&self) -> bool {
        self.noise.linear == T::zero()
            && self.noise.sqrt_shift == T::zero()
            && self.noise.constant == T::zero()
    }

    /// True when D_x F vanishes identically (space-translation invariance).
    pub fn is_translation_invariant(&self) -> bool {
        (self.flux.burgers == T::zero() || self.flux.het_amp == T::zero())
            && self.flux.x_bump == T::zero()
    }

    fn box_max_abs(&self) -> T {
        self.u_box.0.abs().max(self.u_box.1.abs())
    }

    /// sup |F_u| over the monitored box (closed form).
    pub fn sup_flux_u(&self) -> T {
        self.sup_flux_u_at(self.box_max_abs())
    }

    /// sup |F_u| over |u| <= umax and all x (closed form).
    pub fn sup_flux_u_at(&self, umax: T) -> T {
        self.flux.advection.abs()
            + self.flux.burgers.abs() * (T::one() + self.flux.het_amp.abs()) * umax
    }

    /// sup |D_x F_u| over the monitored box.
    pub fn sup_div_flux_u(&self) -> T {
        self.flux.burgers.abs() * self.flux.het_amp.abs() * T::TAU() * self.box_max_abs()
    }

    /// sup |D_x F| over the monitored box.
    pub fn sup_div_flux(&self) -> T {
        let m = self.box_max_abs();
        self.flux.burgers.abs() * self.flux.het_amp.abs() * T::PI() * m * m + self.flux.x_bump.abs()
    }

    /// sup a over the monitored box.
    pub fn sup_diffusion(&self) -> T {
        self.diffusion_a(self.box_max_abs())
    }

    /// Growth certificates on the monitored box.
    pub fn growth(&self) -> GrowthBounds<T> {
        let m = self.box_max_abs();
        let deg = self
            .diffusion
            .porous_m
            .map(|p| p - T::one())
            .unwrap_or_else(T::zero);
        GrowthBounds {
            div_flux: self.sup_div_flux() / (m + T::one()),
            sigma: (self.sigma(m).abs().max(self.sigma(-m).abs())) / (m + T::one()),
            diffusion: self.diffusion.constant + self.diffusion.porous_m.unwrap_or_else(T::zero),
            diffusion_degree: deg,
        }
    }

    /// Same problem with the noise shifted: tau(u) = sigma(u) + delta.
    pub fn with_sigma_shift(&self, delta: T) -> Self {
        let mut q = self.clone();
        q.noise.constant += delta;
        q
    }

    /// Same problem with diffusion raised: b(u) = a(u) + eps.
    pub fn with_added_diffusion(&self, eps: T) -> Self {
        let mut q = self.clone();
        q.diffusion.constant += eps;
        q
    }

    /// Same problem with G_u = F_u + delta (adds constant advection; the
    /// divergence D_x(G - F) stays zero).
    pub fn with_flux_u_shift(&self, delta: T) -> Self {
        let mut q = self.clone();
        q.flux.advection += delta;
        q
    }

    /// Same problem with a u-independent flux bump: D_x(G - F) = delta cos(2 pi x)
    /// while G_u = F_u.
    pub fn with_div_flux_bump(&self, delta: T) -> Self {
        let mut q = self.clone();
        q.flux.x_bump += delta;
        q
    }

    /// One-line coefficient summary for run records.
    pub fn describe(&self) -> String {
        format!(
            "{} adv={} burgers={} eps_c={} x_bump={} a_const={} porous_m={} sigma=({},{},{}) u_box={}",
            self.name,
            self.flux.advection,
            self.flux.burgers,
            self.flux.het_amp,
            self.flux.x_bump,
            self.diffusion.constant,
            self.diffusion.porous_m.map(|m| m.to_string()).unwrap_or_else(|| "none".into()),
            self.noise.linear,
            self.noise.sqrt_shift,
            self.noise.constant,
            self.u_box.1,
        )
    }
}

/// Scratch for named-parameter parsing with unknown-key rejection.
struct Params<'a> {
    entries: Vec<(&'a str, f64, bool)>,
}

impl<'a> Params<'a> {
    fn new(params: &[(&'a str, f64)]) -> Self {
        Self {
            entries: params.iter().map(|&(k, v)| (k, v, false)).collect(),
        }
    }

    fn take(&mut self, key: &str, default: f64) -> f64 {
        for e in &mut self.entries {
            if e.0 == key {
                e.2 = true;
                return e.1;
            }
        }
        default
    }

    fn noise<T: Real>(&mut self) -> NoiseCoeffs<T> {
        NoiseCoeffs {
            linear: T::lit(self.take("sigma_linear", 0.0)),
            sqrt_shift: T::lit(self.take("sigma_sqrt", 0.0)),
            constant: T::lit(self.take("sigma_const", 0.0)),
        }
    }

    fn finish(self) -> Result<()> {
        for (k, _, used) in self.entries {
            if !used {
                return Err(Error::InvalidParameter(format!(
                    "unknown problem parameter `{k}`"
                )));
            }
        }
        Ok(())
    }
}

/// Supremum distances between two coefficient sets, estimated on a dense
/// probe grid over `probe_box x [0, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientDistance<T> {
    pub d_flux_u: T,
    pub d_div_flux: T,
    pub d_sqrt_diff: T,
    pub d_sigma: T,
    pub probe_box: (T, T),
}

impl<T: Real> CoefficientDistance<T> {
    /// The composite distance the continuous-dependence rate is measured
    /// against: `max(d_flux_u, d_sqrt_diff) + max(d_sigma, d_div_flux)^mu`.
    pub fn composite(&self, mu: T) -> T {
        self.d_flux_u.max(self.d_sqrt_diff) + self.d_sigma.max(self.d_div_flux).powf(mu)
    }
}

/// Estimates coefficient suprema by dense sampling; deterministic in its
/// inputs. `n_probe` >= 64 points per axis.
pub fn coefficient_distance<T: Real>(
    p: &ProblemSpec<T>,
    q: &ProblemSpec<T>,
    u_box: (T, T),
    n_probe: usize,
) -> Result<CoefficientDistance<T>> {
    if n_probe < 64 {
        return Err(Error::InvalidParameter(format!(
            "n_probe must be at least 64, got {n_probe}"
        )));
    }
    let mut d_flux_u = T::zero();
    let mut d_div_flux = T::zero();
    let mut d_sqrt_diff = T::zero();
    let mut d_sigma = T::zero();
    let du = (u_box.1 - u_box.0) / T::of_usize(n_probe - 1);
    for i in 0..n_probe {
        let u = u_box.0 + T::of_usize(i) * du;
        d_sqrt_diff = d_sqrt_diff.max((q.alpha(u) - p.alpha(u)).abs());
        d_sigma = d_sigma.max((q.sigma(u) - p.sigma(u)).abs());
        for j in 0..n_probe {
            let x = T::of_usize(j) / T::of_usize(n_probe);
            d_flux_u = d_flux_u.max((q.flux_u(u, x) - p.flux_u(u, x)).abs());
            d_div_flux = d_div_flux.max((q.div_flux(u, x) - p.div_flux(u, x)).abs());
        }
    }
    Ok(CoefficientDistance {
        d_flux_u,
        d_div_flux,
        d_sqrt_diff,
        d_sigma,
        probe_box: u_box,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(name: &str, params: &[(&str, f64)]) -> ProblemSpec<f64> {
        ProblemSpec::builtin(name, params).unwrap()
    }

    #[test]
    fn linear_advection_reduction() {
        let p = spec("linear_advection", &[("c", 1.0)]);
        for &(u, x) in &[(0.0, 0.1), (1.3, 0.7), (-2.0, 0.4)] {
            assert_eq!(p.flux_u(u, x), 1.0);
            assert_eq!(p.div_flux(u, x), 0.0);
            assert_eq!(p.diffusion_a(u), 0.0);
        }
        assert!(p.is_translation_invariant());
        assert!(p.is_deterministic());
    }

    #[test]
    fn porous_medium_closed_forms() {
        let p = spec("porous_medium", &[("m", 2.0)]);
        // B(u) = sign(u) u^2, alpha = sqrt(2|u|)
        assert_abs_diff_eq!(p.kirchhoff_b(1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.kirchhoff_b(-1.5), -2.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.alpha(0.5), 1.0, epsilon = 1e-15);
        let (b, b_half) = p.kirchhoff(1.0).unwrap();
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b_half, 2.0 * 2.0f64.sqrt() / 3.0, epsilon = 1e-12);
        assert_eq!(p.kirchhoff(0.0).unwrap(), (0.0, 0.0));
        assert!(ProblemSpec::<f64>::builtin("porous_medium", &[("m", 1.0)]).is_err());
    }

    #[test]
    fn constant_diffusion_kirchhoff() {
        let p = spec("linear_advection", &[]).with_added_diffusion(1.0);
        let (b, b_half) = p.kirchhoff(2.0).unwrap();
        assert_abs_diff_eq!(b, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b_half, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn mixed_diffusion_quadrature_matches_simpson_oracle() {
        let p = spec("porous_medium", &[("m", 2.0)]).with_added_diffusion(0.3);
        let u = 1.7;
        let (_, b_half) = p.kirchhoff(u).unwrap();
        // composite Simpson oracle, independent of the adaptive rule
        let f = |xi: f64| (0.3 + 2.0 * xi.abs()).sqrt();
        let n = 20000;
        let h = u / n as f64;
        let mut acc = f(0.0) + f(u);
        for i in 1..n {
            acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = acc * h / 3.0;
        assert_abs_diff_eq!(b_half, oracle, epsilon = 1e-8);
    }

    #[test]
    fn het_burgers_heterogeneity_switch() {
        let hom = spec("het_burgers", &[("eps_c", 0.0)]);
        for &(u, x) in &[(1.0, 0.2), (-0.7, 0.9)] {
            assert_eq!(hom.div_flux(u, x), 0.0);
        }
        assert!(hom.is_translation_invariant());
        let het = spec("het_burgers", &[("eps_c", 0.5)]);
        assert!(!het.is_translation_invariant());
        assert!(het.sup_div_flux_u() > 0.0);
        // d/dx F_u at a probe point against a finite difference
        let (u, x) = (1.3, 0.37);
        let h = 1e-6;
        let fd = (het.flux_u(u, x + h) - het.flux_u(u, x - h)) / (2.0 * h);
        assert_abs_diff_eq!(het.div_flux_u(u, x), fd, epsilon = 1e-5);
        // D_x F against a finite difference in x
        let fd = (het.flux(u, x + h) - het.flux(u, x - h)) / (2.0 * h);
        assert_abs_diff_eq!(het.div_flux(u, x), fd, epsilon = 1e-5);
    }

    #[test]
    fn alpha_squares_back_to_a() {
        for name in ["porous_medium", "het_burgers"] {
            let p = spec(name, &[]).with_added_diffusion(0.2);
            for i in 0..=256 {
                let u = -3.0 + 6.0 * i as f64 / 256.0;
                assert_abs_diff_eq!(p.alpha(u) * p.alpha(u), p.diffusion_a(u), epsilon = 1e-10);
                assert!(p.diffusion_a(u) >= 0.0);
            }
        }
    }

    #[test]
    fn kirchhoff_monotone() {
        let p = spec("porous_medium", &[("m", 2.0)]).with_added_diffusion(0.1);
        let mut prev = p.kirchhoff(-3.0).unwrap();
        for i in 1..=64 {
            let u = -3.0 + 6.0 * i as f64 / 64.0;
            let cur = p.kirchhoff(u).unwrap();
            assert!(cur.0 >= prev.0 && cur.1 >= prev.1, "u = {u}");
            prev = cur;
        }
    }

    #[test]
    fn holder_conditions_on_probe_grid() {
        let p = spec(
            "het_burgers",
            &[("eps_c", 0.5), ("sigma_linear", 0.2), ("sigma_sqrt", 0.1)],
        );
        let s = p.smoothness();
        // |F_u(u,x) - F_u(v,x)| <= C (|u| + |v| + 1) |u - v|^kappa_f1
        // |sigma(u) - sigma(v)| <= C |u - v|^lambda_sigma
        let c_flux = 1.5;
        let c_sigma = 0.2 + 0.1 + 1e-12;
        for i in 0..40 {
            for j in 0..40 {
                let u = -3.0 + 6.0 * i as f64 / 39.0;
                let v = -3.0 + 6.0 * j as f64 / 39.0;
                if u == v {
                    continue;
                }
                let x = (i * 7 + j) as f64 / 40.0 % 1.0;
                let lhs = (p.flux_u(u, x) - p.flux_u(v, x)).abs();
                let rhs = c_flux * (u.abs() + v.abs() + 1.0) * (u - v).abs().powf(s.kappa_f1);
                assert!(lhs <= rhs + 1e-12);
                let lhs = (p.sigma(u) - p.sigma(v)).abs();
                assert!(lhs <= c_sigma * (u - v).abs().powf(s.lambda_sigma) + 1e-12);
            }
        }
    }

    #[test]
    fn unknown_names_and_keys_rejected() {
        assert!(ProblemSpec::<f64>::builtin("kdv", &[]).is_err());
        assert!(ProblemSpec::<f64>::builtin("het_burgers", &[("epsc", 0.5)]).is_err());
    }

    #[test]
    fn coefficient_distance_axes() {
        let p = spec("het_burgers", &[("sigma_linear", 0.2)]);
        let box_ = p.u_box();
        let same = coefficient_distance(&p, &p, box_, 128).unwrap();
        assert_eq!(
            (
                same.d_flux_u,
                same.d_div_flux,
                same.d_sqrt_diff,
                same.d_sigma
            ),
            (0.0, 0.0, 0.0, 0.0)
        );
        // sigma shift: exactly delta, nothing else moves
        let q = p.with_sigma_shift(0.05);
        let d = coefficient_distance(&p, &q, box_, 128).unwrap();
        assert_abs_diff_eq!(d.d_sigma, 0.05, epsilon = 1e-14);
        assert_eq!((d.d_flux_u, d.d_div_flux, d.d_sqrt_diff), (0.0, 0.0, 0.0));
        // diffusion a -> a + eps on a degenerate base: sup|sqrt(a+eps)-sqrt(a)|
        // = sqrt(eps), attained where a = 0
        let eps = 0.09;
        let q = p.with_added_diffusion(eps);
        let d = coefficient_distance(&p, &q, box_, 129).unwrap();
        assert_abs_diff_eq!(d.d_sqrt_diff, eps.sqrt(), epsilon = 1e-12);
        assert_eq!((d.d_flux_u, d.d_div_flux, d.d_sigma), (0.0, 0.0, 0.0));
        // flux_u shift
        let q = p.with_flux_u_shift(0.2);
        let d = coefficient_distance(&p, &q, box_, 128).unwrap();
        assert_abs_diff_eq!(d.d_flux_u, 0.2, epsilon = 1e-14);
        assert_eq!((d.d_div_flux, d.d_sqrt_diff, d.d_sigma), (0.0, 0.0, 0.0));
        // div-flux bump: sup |delta cos| = delta
        let q = p.with_div_flux_bump(0.1);
        let d = coefficient_distance(&p, &q, box_, 128).unwrap();
        assert!(d.d_div_flux <= 0.1 + 1e-14 && d.d_div_flux > 0.099);
        assert_eq!((d.d_flux_u, d.d_sqrt_diff, d.d_sigma), (0.0, 0.0, 0.0));
    }

    #[test]
    fn coefficient_distance_symmetric_triangle() {
        let a = spec("het_burgers", &[("sigma_linear", 0.2)]);
        let b = a.with_sigma_shift(0.1).with_flux_u_shift(0.3);
        let c = a.with_div_flux_bump(0.2).with_sigma_shift(-0.05);
        let box_ = a.u_box();
        let dab = coefficient_distance(&a, &b, box_, 64).unwrap();
        let dba = coefficient_distance(&b, &a, box_, 64).unwrap();
        assert_eq!(dab.d_sigma, dba.d_sigma);
        assert_eq!(dab.d_flux_u, dba.d_flux_u);
        let dac = coefficient_distance(&a, &c, box_, 64).unwrap();
        let dbc = coefficient_distance(&b, &c, box_, 64).unwrap();
        for (ab, ac, bc) in [
            (dab.d_flux_u, dac.d_flux_u, dbc.d_flux_u),
            (dab.d_div_flux, dac.d_div_flux, dbc.d_div_flux),
            (dab.d_sigma, dac.d_sigma, dbc.d_sigma),
            (dab.d_sqrt_diff, dac.d_sqrt_diff, dbc.d_sqrt_diff),
        ] {
            assert!(ab <= ac + bc + 1e-12);
        }
        assert!(coefficient_distance(&a, &b, box_, 32).is_err());
    }

    #[test]
    fn composite_distance_formula() {
        let d = CoefficientDistance::<f64> {
            d_flux_u: 0.0,
            d_div_flux: 0.0,
            d_sqrt_diff: 0.0,
            d_sigma: 0.04,
            probe_box: (-3.0, 3.0),
        };
        assert_abs_diff_eq!(d.composite(0.5), 0.2, epsilon = 1e-14);
    }
}
