//! Experiment dispatch and result persistence.
//!
//! Each run writes into `<out>/<subcommand>-seed<master_seed>/`:
//! `run_record.txt` (canonical config echo, code version, verdicts),
//! `results.csv`, one `plot_<name>.csv` per rate fit, and `timestamps.txt`
//! (kept separate so the result files stay byte-identical across reruns).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sklab_core::duhamel::{picard_solve, DuhamelConfig};
use sklab_core::experiments::*;
use sklab_core::field::{profiles, TorusField};
use sklab_core::fv;
use sklab_core::noise::NoisePath;
use sklab_core::report::{verdict_lines, Report};
use sklab_core::Error as CoreError;

use crate::config::{ConfigError, LabConfig};

/// How a run ended, mapped to the process exit code by `main`.
pub enum Outcome {
    /// No claim failed (exit 0).
    Clean,
    /// At least one claim failed (exit 1).
    Failed,
}

pub enum RunError {
    /// Configuration problem (exit 2).
    Config(String),
    /// Runtime abort such as a blow-up (exit 1).
    Runtime(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.to_string())
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_) | CoreError::UnknownProblem(_) => {
                RunError::Config(e.to_string())
            }
            other => RunError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Config(format!("io error: {e}"))
    }
}

fn build_initial(cfg: &LabConfig) -> Result<TorusField<f64>, RunError> {
    let n = cfg.n_cells;
    let u0 = &cfg.u0;
    Ok(match u0.profile.as_str() {
        "sine" => profiles::sine(n, u0.amp, u0.mean),
        "step" => profiles::step(n, u0.mean, u0.mean + u0.amp),
        "multi_sine" => profiles::multi_sine(n, u0.modes.max(1), u0.amp),
        "constant" => TorusField::constant(n, u0.mean),
        other => return Err(RunError::Config(format!("unknown u0 profile `{other}`"))),
    })
}

fn build_second_leg(cfg: &LabConfig, u0: &TorusField<f64>) -> Result<TorusField<f64>, RunError> {
    match cfg.v0.mode.as_str() {
        "offset" => Ok(u0.map(|v| v + cfg.v0.param)),
        "shift" => u0.shift(cfg.v0.param).map_err(RunError::from),
        other => Err(RunError::Config(format!("unknown v0 mode `{other}`"))),
    }
}

fn ensemble(cfg: &LabConfig) -> EnsembleConfig<f64> {
    let mut e = EnsembleConfig::new(cfg.master_seed, cfg.n_samples, cfg.n_cells, cfg.t_final);
    e.cfl = cfg.cfl;
    e.epsilon = cfg.epsilon;
    e.mu = cfg.mu;
    e.confidence = cfg.confidence;
    e.n_output_times = cfg.output_times;
    e.c_margin = cfg.c_margin;
    e.flux_scheme = cfg.scheme;
    e.min_steps = cfg.min_steps;
    e
}

fn axis_of(cfg: &LabConfig) -> Result<PerturbationAxis, RunError> {
    Ok(match cfg.axis.as_str() {
        "sigma" => PerturbationAxis::Sigma,
        "diffusion" => PerturbationAxis::Diffusion,
        "flux_u" => PerturbationAxis::FluxU,
        "div_flux" => PerturbationAxis::DivFlux,
        other => {
            return Err(RunError::Config(format!(
                "unknown perturbation axis `{other}`"
            )))
        }
    })
}

fn now_stamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{secs}")
}

struct OutputDir {
    dir: PathBuf,
    started_at: String,
}

impl OutputDir {
    fn create(out_root: &Path, subcommand: &str, seed: u64) -> Result<Self, RunError> {
        let dir = out_root.join(format!("{subcommand}-seed{seed}"));
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            started_at: now_stamp(),
        })
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), RunError> {
        fs::write(self.dir.join(name), contents)?;
        Ok(())
    }

    fn finish(
        &self,
        subcommand: &str,
        cfg: &LabConfig,
        summary: &str,
        claims: &[ClaimCheck],
    ) -> Result<Outcome, RunError> {
        let mut record = String::new();
        record.push_str(&format!("code_version = {}\n", env!("CARGO_PKG_VERSION")));
        record.push_str(&format!("subcommand = {subcommand}\n"));
        record.push_str(&format!("master_seed = {}\n", cfg.master_seed));
        record.push_str("\n== config ==\n");
        record.push_str(&cfg.echo());
        record.push_str("\n== summary ==\n");
        record.push_str(summary);
        record.push_str("\n== verdicts ==\n");
        record.push_str(&verdict_lines(claims));
        self.write("run_record.txt", &record)?;
        self.write(
            "timestamps.txt",
            &format!(
                "started_at = {}\nfinished_at = {}\n",
                self.started_at,
                now_stamp()
            ),
        )?;
        let failed = claims.iter().any(|c| c.verdict == Verdict::Fail);
        for c in claims {
            println!(
                "{} {} measured={} threshold={}",
                c.id, c.verdict, c.measured, c.threshold
            );
        }
        Ok(if failed {
            Outcome::Failed
        } else {
            Outcome::Clean
        })
    }
}

fn persist_report(
    out: &OutputDir,
    subcommand: &str,
    cfg: &LabConfig,
    report: &dyn Report,
) -> Result<Outcome, RunError> {
    out.write("results.csv", &report.results_csv())?;
    for (name, csv) in report.plot_series() {
        out.write(&format!("plot_{name}.csv"), &csv)?;
    }
    out.finish(subcommand, cfg, &report.summary(), report.claims())
}

/// Runs `subcommand` under `cfg`, writing into `out_root`.
pub fn execute(subcommand: &str, cfg: &LabConfig, out_root: &Path) -> Result<Outcome, RunError> {
    let spec = cfg.build_problem()?;
    let u0 = build_initial(cfg)?;
    let out = OutputDir::create(out_root, subcommand, cfg.master_seed)?;
    let ecfg = ensemble(cfg);

    match subcommand {
        "l1-stability" => {
            let v0 = build_second_leg(cfg, &u0)?;
            let rep = run_l1_stability(&ecfg, &spec, &u0, &v0)?;
            persist_report(&out, subcommand, cfg, &rep)
        }
        "fractional-bv" => {
            let rep = run_fractional_bv(&ecfg, &spec, &u0)?;
            persist_report(&out, subcommand, cfg, &rep)
        }
        "continuous-dependence" => {
            if cfg.deltas.is_empty() {
                return Err(RunError::Config(
                    "continuous-dependence needs a nonempty `deltas` ladder".into(),
                ));
            }
            let axis = axis_of(cfg)?;
            let rep = run_continuous_dependence(&ecfg, &spec, axis, &cfg.deltas, &u0)?;
            persist_report(&out, subcommand, cfg, &rep)
        }
        "viscosity-cauchy" => {
            if cfg.eps_ladder.is_empty() {
                return Err(RunError::Config(
                    "viscosity-cauchy needs a nonempty `eps_ladder`".into(),
                ));
            }
            let rep = run_viscosity_cauchy(&ecfg, &spec, &u0, &cfg.eps_ladder)?;
            persist_report(&out, subcommand, cfg, &rep)
        }
        "temporal-bv" => {
            let expected = cfg.expected_beta.map(|b| (b, cfg.beta_tol));
            let rep = run_temporal_bv(&ecfg, &spec, &u0, cfg.n_lags, expected)?;
            persist_report(&out, subcommand, cfg, &rep)
        }
        "kinetic-checks" => {
            let rep = run_kinetic_checks(cfg.master_seed, cfg.n_cases)?;
            persist_report(&out, subcommand, cfg, &rep)
        }
        "solve" => {
            let solver = fv::SolverConfig::new(cfg.n_cells, cfg.t_final)
                .with_cfl(cfg.cfl)
                .with_epsilon(cfg.epsilon)
                .with_scheme(cfg.scheme);
            let path = NoisePath::sample(cfg.master_seed, cfg.t_final, 1)?;
            let (csv, meta) = match cfg.solver_kind.as_str() {
                "fv" => {
                    let traj = fv::solve(&spec, &u0, &solver, &path)?;
                    (traj.to_csv(), traj.metadata("fv"))
                }
                "duhamel" => {
                    let mut dcfg = DuhamelConfig::new(cfg.n_cells, cfg.epsilon);
                    dcfg.n_time = cfg.duhamel_n_time;
                    dcfg.tol = cfg.duhamel_tol;
                    dcfg.max_iters = cfg.duhamel_max_iters;
                    dcfg.p = cfg.duhamel_p;
                    let grid = path.refine_to(cfg.t_final / cfg.duhamel_n_time as f64);
                    let sol = picard_solve(&spec, &u0, &dcfg, &grid)?;
                    let traj = fv::Trajectory::from_states(
                        spec.clone(),
                        solver,
                        sol.times.clone(),
                        sol.states.clone(),
                        grid.dt(),
                        grid.seed(),
                    )?;
                    let mut meta = traj.metadata("duhamel");
                    meta.push_str(&format!(
                        "iterations = {}\nresiduals = {:?}\n",
                        sol.iterations, sol.residuals
                    ));
                    (traj.to_csv(), meta)
                }
                other => return Err(RunError::Config(format!("unknown solver `{other}`"))),
            };
            out.write("trajectory.csv", &csv)?;
            out.write("metadata.txt", &meta)?;
            out.finish(subcommand, cfg, "trajectory exported\n", &[])
        }
        other => Err(RunError::Config(format!("unknown subcommand `{other}`"))),
    }
}
