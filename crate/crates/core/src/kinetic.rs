//! Kinetic-formulation toolbox: the regularised positive part eta_rho, the
//! kinetic (Heaviside) functions, the doubling identity, the defect-measure
//! estimators, and the weak-form residual that recovers the kinetic
//! dissipation measure from a computed trajectory.

use crate::bump;
use crate::error::{Error, Result};
use crate::field::TorusField;
use crate::fv::Trajectory;
use crate::noise::NoisePath;
use crate::quad;
use crate::scalar::Real;

/// Heaviside function with H(0) = 1/2.
pub fn heaviside<T: Real>(r: T) -> T {
    if r > T::zero() {
        T::one()
    } else if r == T::zero() {
        T::lit(0.5)
    } else {
        T::zero()
    }
}

/// Regularised positive part: eta_rho is smooth, convex, equal to max(r, 0)
/// outside [-rho, rho], built by integrating the normalized bump twice:
/// eta_rho(r) = rho * eta1(r / rho).
#[derive(Debug, Clone, Copy)]
pub struct EtaFamily<T> {
    rho: T,
}

/// Builds the family at regularisation radius `rho > 0`.
pub fn build_eta<T: Real>(rho: T) -> Result<EtaFamily<T>> {
    if !(rho > T::zero() && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eta radius must be positive, got {rho}"
        )));
    }
    Ok(EtaFamily { rho })
}

impl<T: Real> EtaFamily<T> {
    pub fn rho(&self) -> T {
        self.rho
    }

    /// eta_rho(r); exactly max(r, 0) for |r| >= rho.
    pub fn eta(&self, r: T) -> T {
        if r >= self.rho {
            r
        } else if r <= -self.rho {
            T::zero()
        } else {
            self.rho * T::lit(bump::eta1((r / self.rho).as_f64()))
        }
    }

    /// eta_rho'(r) in [0, 1], with 1 - eta'(r) = eta'(-r) exactly.
    pub fn eta_prime(&self, r: T) -> T {
        if r >= self.rho {
            T::one()
        } else if r <= -self.rho {
            T::zero()
        } else {
            T::lit(bump::eta1_prime((r / self.rho).as_f64()))
        }
    }

    /// eta_rho''(r) >= 0, supported on [-rho, rho], unit integral.
    pub fn eta_double_prime(&self, r: T) -> T {
        T::lit(bump::bump((r / self.rho).as_f64())) / self.rho
    }
}

/// Both sides of the doubling identity
///
/// ```text
/// int int H(xi - u) (1 - H(zeta - v)) eta_rho''(zeta - xi) dzeta dxi
///   = eta_rho(v - u)
/// ```
///
/// with the left side evaluated by adaptive Gauss-Kronrod in the (xi, w)
/// coordinates, w = zeta - xi, exploiting the rho-band support of eta''.
/// Returns `(lhs, rhs)`.
pub fn doubling_identity_check<T: Real>(
    u: T,
    v: T,
    eta: &EtaFamily<T>,
    xi_box: (T, T),
) -> Result<(T, T)> {
    let rho = eta.rho().as_f64();
    let (uf, vf) = (u.as_f64(), v.as_f64());
    let need_lo = uf.min(vf) - 2.0 * rho;
    let need_hi = uf.max(vf) + 2.0 * rho;
    if xi_box.0.as_f64() > need_lo || xi_box.1.as_f64() < need_hi {
        return Err(Error::XiBoxTooSmall {
            lo: xi_box.0.as_f64(),
            hi: xi_box.1.as_f64(),
        });
    }
    let rhs = eta.eta(v - u);
    // integrand support: xi in (u, v + rho), w in [-rho, min(rho, v - xi)]
    let hi = vf + rho;
    let lhs = if hi <= uf {
        0.0
    } else {
        let dp = move |w: f64| bump::bump(w / rho) / rho;
        let inner = move |xi: f64| {
            let top = (vf - xi).min(rho);
            if top <= -rho {
                0.0
            } else {
                quad::integrate(dp, -rho, top, 1e-10).unwrap_or(0.0)
            }
        };
        quad::integrate(inner, uf, hi, 1e-8)?
    };
    Ok((T::lit(lhs), rhs))
}

/// Kinetic function H(xi - u) sampled on a grid of the kinetic variable,
/// with H(0) = 1/2 at exact hits. `chi(k, i)` is the value at kinetic node
/// k and cell i; for fixed i it is monotone in xi with values in
/// {0, 1/2, 1}.
#[derive(Debug, Clone)]
pub struct KineticSample<T> {
    xi_grid: Vec<T>,
    n_cells: usize,
    chi: Vec<T>,
}

impl<T: Real> KineticSample<T> {
    pub fn new(field: &TorusField<T>, xi_grid: Vec<T>) -> Result<Self> {
        if xi_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "kinetic grid must be strictly increasing".into(),
            ));
        }
        let n_cells = field.n_cells();
        let mut chi = Vec::with_capacity(xi_grid.len() * n_cells);
        for &xi in &xi_grid {
            for &u in field.values() {
                chi.push(heaviside(xi - u));
            }
        }
        Ok(Self {
            xi_grid,
            n_cells,
            chi,
        })
    }

    pub fn xi_grid(&self) -> &[T] {
        &self.xi_grid
    }

    pub fn chi(&self, k: usize, i: usize) -> T {
        self.chi[k * self.n_cells + i]
    }
}

/// Evaluates the positive-part identity
/// `int H(xi - u(x)) (1 - H(xi - v(x))) dxi = (v(x) - u(x))_+`
/// through kinetic samples on a midpoint grid over `xi_box` with `n_xi`
/// nodes. Returns `(kinetic_integral, direct)`.
///
/// The kinetic quadrature is exact up to rounding for fields whose values
/// lie on the dual lattice `xi_box.0 + j dxi`; otherwise it carries an
/// O(dxi) quadrature error.
pub fn positive_part_identity<T: Real>(
    u: &TorusField<T>,
    v: &TorusField<T>,
    xi_box: (T, T),
    n_xi: usize,
) -> Result<(T, T)> {
    if u.n_cells() != v.n_cells() {
        return Err(Error::ResolutionMismatch {
            left: u.n_cells(),
            right: v.n_cells(),
        });
    }
    if n_xi < 2 {
        return Err(Error::InvalidParameter(
            "kinetic grid needs at least 2 nodes".into(),
        ));
    }
    let (lo, hi) = xi_box;
    let range_lo = u
        .values()
        .iter()
        .chain(v.values())
        .fold(T::infinity(), |m, &x| m.min(x));
    let range_hi = u
        .values()
        .iter()
        .chain(v.values())
        .fold(T::neg_infinity(), |m, &x| m.max(x));
    if lo > range_lo || hi < range_hi {
        return Err(Error::XiBoxTooSmall {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let d_xi = (hi - lo) / T::of_usize(n_xi);
    let half = T::lit(0.5);
    let grid: Vec<T> = (0..n_xi)
        .map(|k| lo + (T::of_usize(k) + half) * d_xi)
        .collect();
    let chi_u = KineticSample::new(u, grid.clone())?;
    let chi_v = KineticSample::new(v, grid)?;
    let mut acc = T::zero();
    for i in 0..u.n_cells() {
        let mut cell = T::zero();
        for k in 0..n_xi {
            cell += chi_u.chi(k, i) * (T::one() - chi_v.chi(k, i));
        }
        acc += cell * d_xi;
    }
    let kinetic = acc * u.dx();
    let direct = crate::field::positive_part_l1(u, v)?;
    Ok((kinetic, direct))
}

/// Total mass of the parabolic defect against a test function `phi(u, x)`:
/// `dt dx sum |D_x B_half(u)|^2 phi(u, x)` with the centered difference of
/// the cellwise Kirchhoff half-transform and left-endpoint time quadrature.
pub fn parabolic_defect<T: Real>(traj: &Trajectory<T>, phi: impl Fn(T, T) -> T) -> Result<T> {
    let spec = traj.problem();
    let dt = traj.dt();
    let mut total = T::zero();
    for state in &traj.states()[..traj.n_steps()] {
        let n = state.n_cells();
        let dx = state.dx();
        let b_half: Vec<T> = state
            .values()
            .iter()
            .map(|&v| spec.kirchhoff_b_half(v))
            .collect::<Result<_>>()?;
        let mut frame = T::zero();
        for i in 0..n {
            let prev = if i == 0 { n - 1 } else { i - 1 };
            let next = if i + 1 == n { 0 } else { i + 1 };
            let grad = (b_half[next] - b_half[prev]) / (T::lit(2.0) * dx);
            frame += grad * grad * phi(state.values()[i], state.cell_center(i));
        }
        total += frame * dx * dt;
    }
    Ok(total)
}

/// Total mass of the Ito correction against `phi(u, x)`:
/// `1/2 dt dx sum sigma^2(u) phi(u, x)` with left-endpoint time quadrature.
pub fn ito_correction<T: Real>(traj: &Trajectory<T>, phi: impl Fn(T, T) -> T) -> T {
    let spec = traj.problem();
    let dt = traj.dt();
    let mut total = T::zero();
    for state in &traj.states()[..traj.n_steps()] {
        let dx = state.dx();
        let mut frame = T::zero();
        for (i, &v) in state.values().iter().enumerate() {
            let s = spec.sigma(v);
            frame += s * s * phi(v, state.cell_center(i));
        }
        total += frame * dx * dt;
    }
    total * T::lit(0.5)
}

/// Compactly supported kinetic test function
/// `phi(xi, x) = r(xi) (1 + x_amp sin(2 pi x))` where the ridge
/// `r(xi) = eta1'((xi - rise)/w) eta1'((fall - xi)/w)` climbs over
/// [rise - w, rise + w], plateaus at 1, and descends over
/// [fall - w, fall + w]. With the rise placed below the solution range the
/// xi-derivative is <= 0 wherever the trajectory lives.
#[derive(Debug, Clone, Copy)]
pub struct KineticTestFn<T> {
    pub rise: T,
    pub fall: T,
    pub width: T,
    pub x_amp: T,
}

impl<T: Real> KineticTestFn<T> {
    pub fn new(rise: T, fall: T, width: T, x_amp: T) -> Result<Self> {
        if !(width > T::zero()) || fall - rise < T::lit(2.0) * width {
            return Err(Error::InvalidParameter(
                "test ridge needs fall - rise >= 2 width > 0".into(),
            ));
        }
        if x_amp.abs() >= T::one() {
            return Err(Error::InvalidParameter(
                "|x_amp| must be < 1 to keep phi >= 0".into(),
            ));
        }
        Ok(Self {
            rise,
            fall,
            width,
            x_amp,
        })
    }

    /// Support of the xi-profile.
    pub fn support(&self) -> (T, T) {
        (self.rise - self.width, self.fall + self.width)
    }

    fn ridge_f64(&self) -> impl Fn(f64) -> f64 {
        let (rise, fall, w) = (self.rise.as_f64(), self.fall.as_f64(), self.width.as_f64());
        move |xi: f64| bump::eta1_prime((xi - rise) / w) * bump::eta1_prime((fall - xi) / w)
    }

    fn ridge_prime_f64(&self) -> impl Fn(f64) -> f64 {
        let (rise, fall, w) = (self.rise.as_f64(), self.fall.as_f64(), self.width.as_f64());
        move |xi: f64| {
            (bump::bump((xi - rise) / w) * bump::eta1_prime((fall - xi) / w)
                - bump::eta1_prime((xi - rise) / w) * bump::bump((fall - xi) / w))
                / w
        }
    }

    fn g(&self, x: T) -> T {
        T::one() + self.x_amp * (T::TAU() * x).sin()
    }

    fn g_prime(&self, x: T) -> T {
        self.x_amp * T::TAU() * (T::TAU() * x).cos()
    }

    fn g_double_prime(&self, x: T) -> T {
        -self.x_amp * T::TAU() * T::TAU() * (T::TAU() * x).sin()
    }

    pub fn phi(&self, xi: T, x: T) -> T {
        T::lit(self.ridge_f64()(xi.as_f64())) * self.g(x)
    }

    pub fn phi_xi(&self, xi: T, x: T) -> T {
        T::lit(self.ridge_prime_f64()(xi.as_f64())) * self.g(x)
    }
}

const GL5_X: [f64; 5] = [
    -0.906179845938664,
    -0.538469310105683,
    0.0,
    0.538469310105683,
    0.906179845938664,
];
const GL5_W: [f64; 5] = [
    0.236926885056189,
    0.478628670499366,
    0.568888888888889,
    0.478628670499366,
    0.236926885056189,
];

fn gl5(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for j in 0..5 {
        acc += GL5_W[j] * f(mid + half * GL5_X[j]);
    }
    acc * half
}

/// Tail integral `M(a) = int_max(a, lo)^hi f`, anchored on a fine grid with
/// local Gauss corrections so evaluation has no interpolation error.
struct TailIntegral {
    lo: f64,
    hi: f64,
    n: usize,
    anchors: Vec<f64>,
    f: Box<dyn Fn(f64) -> f64>,
}

impl TailIntegral {
    fn build(f: Box<dyn Fn(f64) -> f64>, lo: f64, hi: f64, n: usize) -> Self {
        let h = (hi - lo) / n as f64;
        let mut anchors = vec![0.0; n + 1];
        for j in (0..n).rev() {
            let a = lo + j as f64 * h;
            let b = a + h;
            let mid = 0.5 * (a + b);
            anchors[j] = anchors[j + 1] + gl5(&*f, a, mid) + gl5(&*f, mid, b);
        }
        Self {
            lo,
            hi,
            n,
            anchors,
            f,
        }
    }

    fn eval(&self, a: f64) -> f64 {
        if a <= self.lo {
            return self.anchors[0];
        }
        if a >= self.hi {
            return 0.0;
        }
        let h = (self.hi - self.lo) / self.n as f64;
        let j = (((a - self.lo) / h) as usize).min(self.n - 1);
        let anchor_x = self.lo + j as f64 * h;
        self.anchors[j] - gl5(&*self.f, anchor_x, a)
    }
}

/// Kinetic, parabolic, and Ito defect-mass estimates for one trajectory
/// against one test function.
#[derive(Debug, Clone, Copy)]
pub struct DefectEstimate<T> {
    /// Parabolic defect mass n^u(phi); nonnegative for phi >= 0.
    pub n_mass: T,
    /// Ito correction mass p^u(phi); nonnegative for phi >= 0.
    pub p_mass: T,
    /// Weak-form residual attributed to the kinetic dissipation slot
    /// `-int phi_xi dm`; nonnegative up to scheme error when phi_xi <= 0 on
    /// the solution range.
    pub m_residual: T,
}

/// Evaluates every term of the kinetic weak form on the trajectory and
/// returns the residual attributed to `-int phi_xi dm^u`.
///
/// Terms: time-boundary kinetic integrals, the flux terms with F_u and
/// D_x F, the diffusion term a(xi) phi_xx, the Ito correction, the parabolic
/// defect against phi_xi, and the stochastic integral on the path grid with
/// left-endpoint evaluation. Kinetic-variable integrals reduce to tail
/// moments of the ridge profile because F_u is affine and D_x F quadratic in
/// xi for the built-in coefficient families; that structure is validated on
/// entry.
pub fn weak_form_residual<T: Real>(
    traj: &Trajectory<T>,
    path: &NoisePath<T>,
    phi: &KineticTestFn<T>,
) -> Result<T> {
    let spec = traj.problem();
    let (sup_lo, sup_hi) = phi.support();
    let (box_lo, box_hi) = spec.u_box();
    if sup_lo < box_lo || sup_hi > box_hi {
        return Err(Error::XiBoxTooSmall {
            lo: box_lo.as_f64(),
            hi: box_hi.as_f64(),
        });
    }
    if path.n_steps() != traj.n_steps() {
        return Err(Error::InvalidParameter(format!(
            "path has {} steps but the trajectory has {}",
            path.n_steps(),
            traj.n_steps()
        )));
    }
    {
        let x = T::lit(0.37);
        let affine_defect = spec.flux_u(T::lit(2.0), x) - T::lit(2.0) * spec.flux_u(T::one(), x)
            + spec.flux_u(T::zero(), x);
        let quad_defect = spec.div_flux(T::lit(2.0), x) - T::lit(4.0) * spec.div_flux(T::one(), x)
            + T::lit(3.0) * spec.div_flux(T::zero(), x);
        if affine_defect.abs() > T::lit(1e-10) || quad_defect.abs() > T::lit(1e-10) {
            return Err(Error::InvalidParameter(
                "weak-form residual needs F_u affine and D_x F quadratic in the value variable"
                    .into(),
            ));
        }
    }

    let (lo, hi) = (sup_lo.as_f64(), sup_hi.as_f64());
    let n_tab = 2048;
    let ridge = phi.ridge_f64();
    let ridge_b = phi.ridge_f64();
    let ridge_p = phi.ridge_prime_f64();
    let spec_a = spec.clone();
    let m_r = TailIntegral::build(Box::new(phi.ridge_f64()), lo, hi, n_tab);
    let m_xr = TailIntegral::build(Box::new(move |xi| xi * ridge(xi)), lo, hi, n_tab);
    let m_rp = TailIntegral::build(Box::new(phi.ridge_prime_f64()), lo, hi, n_tab);
    let m_x2rp = TailIntegral::build(Box::new(move |xi| xi * xi * ridge_p(xi)), lo, hi, n_tab);
    let m_ar = TailIntegral::build(
        Box::new(move |xi| spec_a.diffusion_a(T::lit(xi)).as_f64() * ridge_b(xi)),
        lo,
        hi,
        n_tab,
    );

    let dt = traj.dt();
    let n_steps = traj.n_steps();
    let first = traj.state(0);
    let last = traj.state(n_steps);
    let n = first.n_cells();
    let dx = first.dx();

    // boundary kinetic integrals: dx sum g(x) M_R(u)
    let kinetic_mass = |state: &TorusField<T>| -> T {
        let mut acc = T::zero();
        for (i, &u) in state.values().iter().enumerate() {
            acc += phi.g(state.cell_center(i)) * T::lit(m_r.eval(u.as_f64()));
        }
        acc * dx
    };
    let h_final = kinetic_mass(last);
    let i_zero = kinetic_mass(first);

    let mut flux_term = T::zero();
    let mut div_flux_term = T::zero();
    let mut diffusion_term = T::zero();
    let mut ito_term = T::zero();
    let mut defect_term = T::zero();
    let mut noise_term = T::zero();

    for (j, state) in traj.states()[..n_steps].iter().enumerate() {
        let b_half: Vec<T> = state
            .values()
            .iter()
            .map(|&v| spec.kirchhoff_b_half(v))
            .collect::<Result<_>>()?;
        let mut a1 = T::zero();
        let mut a2 = T::zero();
        let mut a3 = T::zero();
        let mut a4 = T::zero();
        let mut nxi = T::zero();
        let mut bsum = T::zero();
        for (i, &u) in state.values().iter().enumerate() {
            let x = state.cell_center(i);
            let uf = u.as_f64();
            // F_u(xi, x) = p + q xi
            let p = spec.flux_u(T::zero(), x);
            let q = spec.flux_u(T::one(), x) - p;
            a1 += phi.g_prime(x) * (p * T::lit(m_r.eval(uf)) + q * T::lit(m_xr.eval(uf)));
            // D_x F(xi, x) = r0 + r2 xi^2
            let r0 = spec.div_flux(T::zero(), x);
            let r2 = spec.div_flux(T::one(), x) - r0;
            a2 += phi.g(x) * (r0 * T::lit(m_rp.eval(uf)) + r2 * T::lit(m_x2rp.eval(uf)));
            a3 += phi.g_double_prime(x) * T::lit(m_ar.eval(uf));
            let s = spec.sigma(u);
            let pxi = phi.phi_xi(u, x);
            a4 += s * s * pxi;
            let prev = if i == 0 { n - 1 } else { i - 1 };
            let next = if i + 1 == n { 0 } else { i + 1 };
            let grad = (b_half[next] - b_half[prev]) / (T::lit(2.0) * dx);
            nxi += grad * grad * pxi;
            bsum += s * phi.phi(u, x);
        }
        flux_term += a1 * dx * dt;
        div_flux_term += a2 * dx * dt;
        diffusion_term += a3 * dx * dt;
        ito_term += a4 * dx * dt * T::lit(0.5);
        defect_term += nxi * dx * dt;
        noise_term -= bsum * dx * path.increments()[j];
    }

    Ok(
        -h_final + i_zero + flux_term - div_flux_term + diffusion_term - ito_term
            + noise_term
            + defect_term,
    )
}

/// Bundles the three defect estimates for one `(trajectory, test)` pair.
pub fn estimate_defects<T: Real>(
    traj: &Trajectory<T>,
    path: &NoisePath<T>,
    phi: &KineticTestFn<T>,
) -> Result<DefectEstimate<T>> {
    Ok(DefectEstimate {
        n_mass: parabolic_defect(traj, |u, x| phi.phi(u, x))?,
        p_mass: ito_correction(traj, |u, x| phi.phi(u, x)),
        m_residual: weak_form_residual(traj, path, phi)?,
    })
}
