//! Conservative finite-volume discretisation with Euler-Maruyama stepping.
//!
//! The update for cell i is
//!
//! ```text
//! u+ = u - dt/dx (Fhat_{i+1/2} - Fhat_{i-1/2})
//!        + dt/dx^2 (B(u_{i+1}) - 2 B(u_i) + B(u_{i-1}))
//!        + eps dt/dx^2 (u_{i+1} - 2 u_i + u_{i-1})
//!        + sigma(u_i) dW
//! ```
//!
//! with B the Kirchhoff transform of the degenerate diffusion and `Fhat` the
//! numerical flux evaluated at the interface coordinate (heterogeneity enters
//! through the interface position). The noise increment is added after the
//! deterministic update, with sigma at the left time endpoint, so the
//! deterministic sub-step stays monotone and the time integrator is
//! Euler-Maruyama.

use crate::error::{Error, Result};
use crate::field::TorusField;
use crate::noise::NoisePath;
use crate::problem::ProblemSpec;
use crate::scalar::Real;

/// Numerical flux choices. Both are monotone under the CFL condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxScheme {
    /// Local Lax-Friedrichs with the interface speed taken from local data.
    LocalLaxFriedrichs,
    /// Engquist-Osher splitting for fluxes convex in u.
    EngquistOsher,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig<T> {
    pub n_cells: usize,
    pub cfl: T,
    /// Artificial viscosity `eps u_xx` on top of the degenerate diffusion.
    pub epsilon: T,
    pub flux_scheme: FluxScheme,
    pub t_final: T,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(n_cells: usize, t_final: T) -> Self {
        Self {
            n_cells,
            cfl: T::lit(0.4),
            epsilon: T::zero(),
            flux_scheme: FluxScheme::LocalLaxFriedrichs,
            t_final,
        }
    }

    pub fn with_epsilon(mut self, epsilon: T) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_cfl(mut self, cfl: T) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_scheme(mut self, scheme: FluxScheme) -> Self {
        self.flux_scheme = scheme;
        self
    }
}

/// Identifies the noise realisation a trajectory was driven by.
#[derive(Debug, Clone, Copy)]
pub struct PathMeta {
    pub seed: u64,
    pub n_steps: usize,
}

/// Time-indexed solution states plus the data needed to reproduce them.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    times: Vec<T>,
    states: Vec<TorusField<T>>,
    dt: T,
    problem: ProblemSpec<T>,
    config: SolverConfig<T>,
    path_meta: PathMeta,
}

impl<T: Real> Trajectory<T> {
    /// Assembles a trajectory from externally produced states (uniform step
    /// `dt`, `times[0] = 0`).
    pub fn from_states(
        problem: ProblemSpec<T>,
        config: SolverConfig<T>,
        times: Vec<T>,
        states: Vec<TorusField<T>>,
        dt: T,
        seed: u64,
    ) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::InvalidParameter(
                "times and states must match and be nonempty".into(),
            ));
        }
        if times[0] != T::zero() {
            return Err(Error::InvalidParameter(
                "trajectory must start at t = 0".into(),
            ));
        }
        let tol = dt * T::lit(1e-9);
        for (j, w) in times.windows(2).enumerate() {
            if (w[1] - w[0] - dt).abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "non-uniform step at index {j}"
                )));
            }
        }
        let n_steps = states.len() - 1;
        Ok(Self {
            times,
            states,
            dt,
            problem,
            config,
            path_meta: PathMeta { seed, n_steps },
        })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn states(&self) -> &[TorusField<T>] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &TorusField<T> {
        &self.states[k]
    }

    pub fn n_steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn problem(&self) -> &ProblemSpec<T> {
        &self.problem
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.config
    }

    pub fn path_meta(&self) -> PathMeta {
        self.path_meta
    }

    /// Trajectory export: one `(t, cell_index, value)` row per cell per time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,cell_index,value\n");
        for (t, state) in self.times.iter().zip(&self.states) {
            for (i, v) in state.values().iter().enumerate() {
                out.push_str(&format!("{t:e},{i},{v:e}\n"));
            }
        }
        out
    }

    /// Sidecar metadata record for the CSV export.
    pub fn metadata(&self, solver: &str) -> String {
        format!(
            "solver={solver}\nproblem={}\nn_cells={}\ncfl={}\nepsilon={}\nscheme={:?}\nt_final={}\ndt={:e}\nseed={}\npath_steps={}\n",
            self.problem.describe(),
            self.config.n_cells,
            self.config.cfl,
            self.config.epsilon,
            self.config.flux_scheme,
            self.config.t_final,
            self.dt,
            self.path_meta.seed,
            self.path_meta.n_steps,
        )
    }
}

/// Largest stable step: `dt (sup|F_u|/dx + 2 (sup a + eps)/dx^2) <= cfl`,
/// with the suprema taken over the problem's monitored box so the bound does
/// not depend on the realised trajectory.
pub fn stable_dt<T: Real>(spec: &ProblemSpec<T>, cfg: &SolverConfig<T>) -> T {
    let dx = T::one() / T::of_usize(cfg.n_cells);
    let rate =
        spec.sup_flux_u() / dx + T::lit(2.0) * (spec.sup_diffusion() + cfg.epsilon) / (dx * dx);
    cfg.cfl / rate
}

fn llf_flux<T: Real>(spec: &ProblemSpec<T>, ul: T, ur: T, x: T) -> T {
    let speed = spec.flux_u(ul, x).abs().max(spec.flux_u(ur, x).abs());
    let half = T::lit(0.5);
    half * (spec.flux(ul, x) + spec.flux(ur, x)) - half * speed * (ur - ul)
}

fn eo_flux<T: Real>(spec: &ProblemSpec<T>, ul: T, ur: T, x: T) -> T {
    match spec.sonic_point(x) {
        // Flux linear in u: plain upwinding on the transport direction.
        None => {
            if spec.flux_u(T::zero(), x) >= T::zero() {
                spec.flux(ul, x)
            } else {
                spec.flux(ur, x)
            }
        }
        Some(us) => spec.flux(ul.max(us), x) + spec.flux(ur.min(us), x) - spec.flux(us, x),
    }
}

/// One Euler-Maruyama step. `dW` is the Brownian increment over `dt`; the
/// same scalar multiplies sigma(u_i) in every cell. Errors on a CFL
/// violation for the current state or on a non-finite result.
pub fn step<T: Real>(
    u: &TorusField<T>,
    dt: T,
    dw: T,
    spec: &ProblemSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<TorusField<T>> {
    let n = u.n_cells();
    let dx = u.dx();
    let umax = u.max_abs();
    let speed = spec.sup_flux_u_at(umax);
    let rate = speed / dx + T::lit(2.0) * (spec.diffusion_a(umax) + cfg.epsilon) / (dx * dx);
    let dt_max = cfg.cfl / rate;
    if dt > dt_max * (T::one() + T::lit(1e-12)) {
        return Err(Error::CflViolation {
            dt: dt.as_f64(),
            dt_max: dt_max.as_f64(),
        });
    }

    let vals = u.values();
    let mut fhat = vec![T::zero(); n];
    for i in 0..n {
        // interface i+1/2 sits at x = (i+1) dx
        let x = T::of_usize(i + 1) * dx;
        let ul = vals[i];
        let ur = u.get(i as i64 + 1);
        fhat[i] = match cfg.flux_scheme {
            FluxScheme::LocalLaxFriedrichs => llf_flux(spec, ul, ur, x),
            FluxScheme::EngquistOsher => eo_flux(spec, ul, ur, x),
        };
    }
    let b: Vec<T> = vals.iter().map(|&v| spec.kirchhoff_b(v)).collect();

    let lam = dt / dx;
    let mu = dt / (dx * dx);
    let eps_mu = cfg.epsilon * mu;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let prev = if i == 0 { n - 1 } else { i - 1 };
        let next = if i + 1 == n { 0 } else { i + 1 };
        let v = vals[i] - lam * (fhat[i] - fhat[prev])
            + mu * (b[next] - T::lit(2.0) * b[i] + b[prev])
            + eps_mu * (vals[next] - T::lit(2.0) * vals[i] + vals[prev])
            + spec.sigma(vals[i]) * dw;
        out.push(v);
    }
    TorusField::new(out)
}

fn check_box<T: Real>(u: &TorusField<T>, spec: &ProblemSpec<T>, t: T) -> Result<()> {
    let (lo, hi) = spec.u_box();
    let margin = T::lit(0.9);
    let max = u.values().iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    let min = u.values().iter().fold(T::infinity(), |m, &v| m.min(v));
    if max > margin * hi || min < margin * lo {
        return Err(Error::BlowUp {
            t: t.as_f64(),
            max_abs: u.max_abs().as_f64(),
        });
    }
    Ok(())
}

/// Runs the scheme on the path's grid as given (no refinement), feeding every
/// accepted state to `observe(step_index, t, state)`. The path must already
/// satisfy the CFL condition and share `t_final` with the configuration.
pub fn solve_on_grid<T: Real>(
    spec: &ProblemSpec<T>,
    u0: &TorusField<T>,
    cfg: &SolverConfig<T>,
    path: &NoisePath<T>,
    mut observe: impl FnMut(usize, T, &TorusField<T>),
) -> Result<TorusField<T>> {
    if u0.n_cells() != cfg.n_cells {
        return Err(Error::ResolutionMismatch {
            left: u0.n_cells(),
            right: cfg.n_cells,
        });
    }
    if (path.t_final() - cfg.t_final).abs() > T::lit(1e-12) * cfg.t_final.abs() {
        return Err(Error::InvalidParameter(format!(
            "path horizon {} differs from solver horizon {}",
            path.t_final(),
            cfg.t_final
        )));
    }
    let dt = path.dt();
    check_box(u0, spec, T::zero())?;
    observe(0, T::zero(), u0);
    let mut state = u0.clone();
    for (k, &dw) in path.increments().iter().enumerate() {
        state = step(&state, dt, dw, spec, cfg)?;
        let t = T::of_usize(k + 1) * dt;
        check_box(&state, spec, t)?;
        observe(k + 1, t, &state);
    }
    Ok(state)
}

/// Refines the path until it satisfies the CFL bound for this problem.
pub fn prepare_path<T: Real>(
    spec: &ProblemSpec<T>,
    cfg: &SolverConfig<T>,
    path: &NoisePath<T>,
) -> NoisePath<T> {
    path.refine_to(stable_dt(spec, cfg))
}

/// Full solve: refines the path to the CFL grid, steps to `t_final`, and
/// records every state. Deterministic in `(spec, u0, cfg, path)`.
pub fn solve<T: Real>(
    spec: &ProblemSpec<T>,
    u0: &TorusField<T>,
    cfg: &SolverConfig<T>,
    path: &NoisePath<T>,
) -> Result<Trajectory<T>> {
    let path = prepare_path(spec, cfg, path);
    let mut times = Vec::with_capacity(path.n_steps() + 1);
    let mut states = Vec::with_capacity(path.n_steps() + 1);
    solve_on_grid(spec, u0, cfg, &path, |_, t, s| {
        times.push(t);
        states.push(s.clone());
    })?;
    Ok(Trajectory {
        times,
        states,
        dt: path.dt(),
        problem: spec.clone(),
        config: *cfg,
        path_meta: PathMeta {
            seed: path.seed(),
            n_steps: path.n_steps(),
        },
    })
}

/// Two solves driven by identical increments from the same path, on a shared
/// grid fine enough for both problems.
pub fn coupled_solve<T: Real>(
    spec_u: &ProblemSpec<T>,
    spec_v: &ProblemSpec<T>,
    u0: &TorusField<T>,
    v0: &TorusField<T>,
    cfg: &SolverConfig<T>,
    path: &NoisePath<T>,
) -> Result<(Trajectory<T>, Trajectory<T>)> {
    let dt = stable_dt(spec_u, cfg).min(stable_dt(spec_v, cfg));
    let shared = path.refine_to(dt);
    Ok((
        solve(spec_u, u0, cfg, &shared)?,
        solve(spec_v, v0, cfg, &shared)?,
    ))
}
