//! Line-oriented configuration: `[section]` headers with `key = value`
//! entries. Sections are `[problem]`, `[solver]`, `[noise]`, and
//! `[experiment]`; unknown sections, unknown keys, duplicate keys, and
//! out-of-range values are rejected with their line numbers. Defaults are
//! filled and echoed back canonically so the run record reproduces the run.

use std::collections::BTreeMap;
use std::fmt;

use sklab_core::fv::FluxScheme;
use sklab_core::problem::ProblemSpec;

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config error at line {line}: {}", self.message),
            None => write!(f, "config error: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: Option<usize>, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        line,
        message: message.into(),
    })
}

/// One parsed `key = value` with its source line.
#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    used: bool,
}

#[derive(Debug, Default)]
struct Section {
    entries: BTreeMap<String, Entry>,
}

/// Raw sectioned key-value text.
#[derive(Debug, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, Section>,
}

const SECTIONS: [&str; 4] = ["problem", "solver", "noise", "experiment"];

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RawConfig::default();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return err(Some(line_no), format!("unknown section `[{name}]`"));
                }
                current = Some(name.to_string());
                cfg.sections.entry(name.to_string()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(
                    Some(line_no),
                    format!("expected `key = value`, got `{line}`"),
                );
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let Some(section) = &current else {
                return err(Some(line_no), "entry before any [section] header");
            };
            let section = cfg.sections.get_mut(section).expect("section registered");
            if let Some(prev) = section.entries.get(&key) {
                return err(
                    Some(line_no),
                    format!("duplicate key `{key}` (first set at line {})", prev.line),
                );
            }
            section.entries.insert(
                key,
                Entry {
                    value,
                    line: line_no,
                    used: false,
                },
            );
        }
        Ok(cfg)
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let s = self.sections.get_mut(section)?;
        let e = s.entries.get_mut(key)?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    fn take_f64(&mut self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(section, key) {
            None => Ok(default),
            Some((v, line)) => v.parse::<f64>().map_err(|_| ConfigError {
                line: Some(line),
                message: format!("`{key}` must be a number, got `{v}`"),
            }),
        }
    }

    fn take_usize(
        &mut self,
        section: &str,
        key: &str,
        default: usize,
    ) -> Result<usize, ConfigError> {
        match self.take(section, key) {
            None => Ok(default),
            Some((v, line)) => v.parse::<usize>().map_err(|_| ConfigError {
                line: Some(line),
                message: format!("`{key}` must be a nonnegative integer, got `{v}`"),
            }),
        }
    }

    fn take_u64(&mut self, section: &str, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.take(section, key) {
            None => Ok(default),
            Some((v, line)) => v.parse::<u64>().map_err(|_| ConfigError {
                line: Some(line),
                message: format!("`{key}` must be a nonnegative integer, got `{v}`"),
            }),
        }
    }

    fn take_string(&mut self, section: &str, key: &str, default: &str) -> String {
        self.take(section, key)
            .map(|(v, _)| v)
            .unwrap_or_else(|| default.to_string())
    }

    fn take_list(&mut self, section: &str, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self.take(section, key) {
            None => Ok(Vec::new()),
            Some((v, line)) => v
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| ConfigError {
                        line: Some(line),
                        message: format!("`{key}` must be a comma-separated number list"),
                    })
                })
                .collect(),
        }
    }

    /// Every key must have been consumed by the typed extraction.
    fn finish(self) -> Result<(), ConfigError> {
        for (name, section) in &self.sections {
            for (key, entry) in &section.entries {
                if !entry.used {
                    return err(
                        Some(entry.line),
                        format!("unknown key `{key}` in section [{name}]"),
                    );
                }
            }
        }
        Ok(())
    }
}

/// Initial-data selection.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub profile: String,
    pub amp: f64,
    pub mean: f64,
    pub modes: usize,
}

/// Second-leg construction for coupled experiments.
#[derive(Debug, Clone)]
pub struct SecondLeg {
    pub mode: String, // offset | shift
    pub param: f64,
}

/// Fully validated experiment configuration with all defaults filled.
#[derive(Debug, Clone)]
pub struct LabConfig {
    pub problem_name: String,
    pub problem_params: Vec<(String, f64)>,
    pub n_cells: usize,
    pub cfl: f64,
    pub epsilon: f64,
    pub scheme: FluxScheme,
    pub t_final: f64,
    pub solver_kind: String, // fv | duhamel (solve subcommand)
    pub duhamel_n_time: usize,
    pub duhamel_tol: f64,
    pub duhamel_max_iters: usize,
    pub duhamel_p: f64,
    pub master_seed: u64,
    pub n_samples: usize,
    pub mu: f64,
    pub confidence: f64,
    pub output_times: usize,
    pub c_margin: f64,
    pub min_steps: usize,
    pub u0: InitialData,
    pub v0: SecondLeg,
    pub axis: String,
    pub deltas: Vec<f64>,
    pub eps_ladder: Vec<f64>,
    pub n_lags: usize,
    pub expected_beta: Option<f64>,
    pub beta_tol: f64,
    pub n_cases: usize,
}

impl LabConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::parse(text)?;

        let problem_name = raw.take_string("problem", "name", "het_burgers");
        let mut problem_params = Vec::new();
        for key in [
            "c",
            "eps_c",
            "m",
            "sigma_linear",
            "sigma_sqrt",
            "sigma_const",
            "u_box",
        ] {
            if let Some((v, line)) = raw.take("problem", key) {
                let v = v.parse::<f64>().map_err(|_| ConfigError {
                    line: Some(line),
                    message: format!("`{key}` must be a number, got `{v}`"),
                })?;
                problem_params.push((key.to_string(), v));
            }
        }

        let n_cells = raw.take_usize("solver", "n_cells", 128)?;
        let cfl = raw.take_f64("solver", "cfl", 0.4)?;
        let epsilon = raw.take_f64("solver", "epsilon", 0.0)?;
        let scheme_name = raw.take_string("solver", "scheme", "llf");
        let t_final = raw.take_f64("solver", "t_final", 0.5)?;
        let solver_kind = raw.take_string("solver", "solver", "fv");
        let duhamel_n_time = raw.take_usize("solver", "n_time", 128)?;
        let duhamel_tol = raw.take_f64("solver", "tol", 1e-8)?;
        let duhamel_max_iters = raw.take_usize("solver", "max_iters", 50)?;
        let duhamel_p = raw.take_f64("solver", "p", 2.0)?;

        let master_seed = raw.take_u64("noise", "master_seed", 42)?;
        let n_samples = raw.take_usize("noise", "n_samples", 64)?;

        let mu = raw.take_f64("experiment", "mu", 0.5)?;
        let confidence = raw.take_f64("experiment", "confidence", 4.0)?;
        let output_times = raw.take_usize("experiment", "output_times", 17)?;
        let c_margin = raw.take_f64("experiment", "c_margin", 10.0)?;
        let min_steps = raw.take_usize("experiment", "min_steps", 256)?;
        let u0 = InitialData {
            profile: raw.take_string("experiment", "u0", "sine"),
            amp: raw.take_f64("experiment", "u0_amp", 0.5)?,
            mean: raw.take_f64("experiment", "u0_mean", 0.0)?,
            modes: raw.take_usize("experiment", "u0_modes", 8)?,
        };
        let v0 = SecondLeg {
            mode: raw.take_string("experiment", "v0", "offset"),
            param: raw.take_f64("experiment", "v0_param", 0.1)?,
        };
        let axis = raw.take_string("experiment", "axis", "sigma");
        let deltas = raw.take_list("experiment", "deltas")?;
        let eps_ladder = raw.take_list("experiment", "eps_ladder")?;
        let n_lags = raw.take_usize("experiment", "n_lags", 5)?;
        let expected_beta = match raw.take("experiment", "expected_beta") {
            None => None,
            Some((v, line)) => Some(v.parse::<f64>().map_err(|_| ConfigError {
                line: Some(line),
                message: format!("`expected_beta` must be a number, got `{v}`"),
            })?),
        };
        let beta_tol = raw.take_f64("experiment", "beta_tol", 0.1)?;
        let n_cases = raw.take_usize("experiment", "n_cases", 1000)?;

        raw.finish()?;

        let scheme = match scheme_name.as_str() {
            "llf" => FluxScheme::LocalLaxFriedrichs,
            "eo" => FluxScheme::EngquistOsher,
            other => {
                return err(
                    None,
                    format!("unknown scheme `{other}` (expected llf or eo)"),
                )
            }
        };
        if !["fv", "duhamel"].contains(&solver_kind.as_str()) {
            return err(
                None,
                format!("unknown solver `{solver_kind}` (expected fv or duhamel)"),
            );
        }
        if !["sine", "step", "multi_sine", "constant"].contains(&u0.profile.as_str()) {
            return err(None, format!("unknown u0 profile `{}`", u0.profile));
        }
        if !["offset", "shift"].contains(&v0.mode.as_str()) {
            return err(
                None,
                format!("unknown v0 mode `{}` (expected offset or shift)", v0.mode),
            );
        }
        if !["sigma", "diffusion", "flux_u", "div_flux"].contains(&axis.as_str()) {
            return err(None, format!("unknown perturbation axis `{axis}`"));
        }
        if !(t_final > 0.0) {
            return err(None, "t_final must be positive");
        }
        if !(cfl > 0.0 && cfl < 1.0) {
            return err(None, format!("cfl must lie in (0, 1), got {cfl}"));
        }
        if epsilon < 0.0 {
            return err(None, "epsilon must be nonnegative");
        }

        let cfg = Self {
            problem_name,
            problem_params,
            n_cells,
            cfl,
            epsilon,
            scheme,
            t_final,
            solver_kind,
            duhamel_n_time,
            duhamel_tol,
            duhamel_max_iters,
            duhamel_p,
            master_seed,
            n_samples,
            mu,
            confidence,
            output_times,
            c_margin,
            min_steps,
            u0,
            v0,
            axis,
            deltas,
            eps_ladder,
            n_lags,
            expected_beta,
            beta_tol,
            n_cases,
        };
        // problem must build, and mu must respect its declared exponent
        let spec = cfg.build_problem()?;
        let kappa_f1 = spec.smoothness().kappa_f1;
        if !(cfg.mu > 0.0 && cfg.mu < kappa_f1) {
            return err(
                None,
                format!("mu must lie in (0, kappa_F1) = (0, {kappa_f1}), got {mu}"),
            );
        }
        Ok(cfg)
    }

    pub fn build_problem(&self) -> Result<ProblemSpec<f64>, ConfigError> {
        let params: Vec<(&str, f64)> = self
            .problem_params
            .iter()
            .map(|(k, v)| (k.as_str(), *v))
            .collect();
        ProblemSpec::builtin(&self.problem_name, &params).map_err(|e| ConfigError {
            line: None,
            message: e.to_string(),
        })
    }

    /// Canonical echo of every effective value; sufficient to reproduce the
    /// run bit-exactly.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        s.push_str("[problem]\n");
        s.push_str(&format!("name = {}\n", self.problem_name));
        for (k, v) in &self.problem_params {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s.push_str("\n[solver]\n");
        s.push_str(&format!("n_cells = {}\n", self.n_cells));
        s.push_str(&format!("cfl = {}\n", self.cfl));
        s.push_str(&format!("epsilon = {}\n", self.epsilon));
        s.push_str(&format!(
            "scheme = {}\n",
            match self.scheme {
                FluxScheme::LocalLaxFriedrichs => "llf",
                FluxScheme::EngquistOsher => "eo",
            }
        ));
        s.push_str(&format!("t_final = {}\n", self.t_final));
        s.push_str(&format!("solver = {}\n", self.solver_kind));
        s.push_str(&format!("n_time = {}\n", self.duhamel_n_time));
        s.push_str(&format!("tol = {}\n", self.duhamel_tol));
        s.push_str(&format!("max_iters = {}\n", self.duhamel_max_iters));
        s.push_str(&format!("p = {}\n", self.duhamel_p));
        s.push_str("\n[noise]\n");
        s.push_str(&format!("master_seed = {}\n", self.master_seed));
        s.push_str(&format!("n_samples = {}\n", self.n_samples));
        s.push_str("\n[experiment]\n");
        s.push_str(&format!("mu = {}\n", self.mu));
        s.push_str(&format!("confidence = {}\n", self.confidence));
        s.push_str(&format!("output_times = {}\n", self.output_times));
        s.push_str(&format!("c_margin = {}\n", self.c_margin));
        s.push_str(&format!("min_steps = {}\n", self.min_steps));
        s.push_str(&format!("u0 = {}\n", self.u0.profile));
        s.push_str(&format!("u0_amp = {}\n", self.u0.amp));
        s.push_str(&format!("u0_mean = {}\n", self.u0.mean));
        s.push_str(&format!("u0_modes = {}\n", self.u0.modes));
        s.push_str(&format!("v0 = {}\n", self.v0.mode));
        s.push_str(&format!("v0_param = {}\n", self.v0.param));
        s.push_str(&format!("axis = {}\n", self.axis));
        if !self.deltas.is_empty() {
            let list: Vec<String> = self.deltas.iter().map(|d| d.to_string()).collect();
            s.push_str(&format!("deltas = {}\n", list.join(",")));
        }
        if !self.eps_ladder.is_empty() {
            let list: Vec<String> = self.eps_ladder.iter().map(|d| d.to_string()).collect();
            s.push_str(&format!("eps_ladder = {}\n", list.join(",")));
        }
        s.push_str(&format!("n_lags = {}\n", self.n_lags));
        if let Some(b) = self.expected_beta {
            s.push_str(&format!("expected_beta = {b}\n"));
        }
        s.push_str(&format!("beta_tol = {}\n", self.beta_tol));
        s.push_str(&format!("n_cases = {}\n", self.n_cases));
        s
    }
}
