//! Flat sectioned key=value run configuration.
//!
//! Sections: [model], [grid], [time], [run]. Every key has a documented
//! default, so the empty file is a valid configuration. Unknown keys,
//! malformed numbers, and invariant violations are reported with the line
//! number and key that caused them.

use std::path::PathBuf;

use pullin_core::{ModelParams, RadialGrid, SimTolerances};

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line > 0 {
            write!(f, "config line {}: key '{}': {}", self.line, self.key, self.message)
        } else {
            write!(f, "config key '{}': {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub epsilon: f64,
    pub lambda: f64,
    pub beta: f64,
    pub tau: f64,
    pub a: f64,
    pub n_r: usize,
    pub n_eta: usize,
    pub dt: f64,
    pub t_end: f64,
    pub touchdown_tol: f64,
    pub norm_cap: f64,
    pub steady_tol: f64,
    /// CSV destination; summaries always go to stdout
    pub output: Option<PathBuf>,
    pub seed: u64,
    /// initial amplitude d of the profile d (1 - r^2)^2 used by the
    /// potential and simulate modes
    pub profile_amp: f64,
    pub lambda_step: f64,
    pub max_points: usize,
    pub corpus_size: usize,
    pub trace_p: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.3,
            lambda: 0.0,
            beta: 1.0,
            tau: 0.0,
            a: 0.0,
            n_r: 129,
            n_eta: 129,
            dt: 1e-4,
            t_end: 1.0,
            touchdown_tol: 1e-2,
            norm_cap: 1e6,
            steady_tol: 1e-7,
            output: None,
            seed: 2024,
            profile_amp: 0.0,
            lambda_step: 1.0,
            max_points: 40,
            corpus_size: 100,
            trace_p: 2.0,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError {
                    line: line_no,
                    key: line.to_string(),
                    message: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                if !matches!(section.as_str(), "model" | "grid" | "time" | "run") {
                    return Err(ConfigError {
                        line: line_no,
                        key: section.clone(),
                        message: "unknown section".into(),
                    });
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
                line: line_no,
                key: line.to_string(),
                message: "expected key=value".into(),
            })?;
            if section.is_empty() {
                return Err(ConfigError {
                    line: line_no,
                    key: key.trim().to_string(),
                    message: "key before any [section] header".into(),
                });
            }
            cfg.set_raw(&section, key.trim(), value.trim(), line_no)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `section.key=value` override (the --set flag).
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let err = |msg: &str| ConfigError {
            line: 0,
            key: spec.to_string(),
            message: msg.into(),
        };
        let (path, value) = spec.split_once('=').ok_or_else(|| err("expected section.key=value"))?;
        let (section, key) = path.split_once('.').ok_or_else(|| err("expected section.key=value"))?;
        self.set_raw(section.trim(), key.trim(), value.trim(), 0)?;
        self.validate()
    }

    fn set_raw(
        &mut self,
        section: &str,
        key: &str,
        value: &str,
        line: usize,
    ) -> Result<(), ConfigError> {
        let bad_num = |msg: String| ConfigError { line, key: key.to_string(), message: msg };
        let f = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| bad_num(format!("malformed number '{v}'")))
        };
        let u = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| bad_num(format!("malformed integer '{v}'")))
        };
        match (section, key) {
            ("model", "epsilon") => self.epsilon = f(value)?,
            ("model", "lambda") => self.lambda = f(value)?,
            ("model", "beta") => self.beta = f(value)?,
            ("model", "tau") => self.tau = f(value)?,
            ("model", "a") => self.a = f(value)?,
            ("grid", "n_r") => self.n_r = u(value)?,
            ("grid", "n_eta") => self.n_eta = u(value)?,
            ("time", "dt") => self.dt = f(value)?,
            ("time", "t_end") => self.t_end = f(value)?,
            ("time", "touchdown_tol") => self.touchdown_tol = f(value)?,
            ("time", "norm_cap") => self.norm_cap = f(value)?,
            ("time", "steady_tol") => self.steady_tol = f(value)?,
            ("run", "output") => self.output = Some(PathBuf::from(value)),
            ("run", "seed") => {
                self.seed = value.parse::<u64>().map_err(|_| {
                    ConfigError {
                        line,
                        key: key.to_string(),
                        message: format!("malformed integer '{value}'"),
                    }
                })?
            }
            ("run", "profile_amp") => self.profile_amp = f(value)?,
            ("run", "lambda_step") => self.lambda_step = f(value)?,
            ("run", "max_points") => self.max_points = u(value)?,
            ("run", "corpus_size") => self.corpus_size = u(value)?,
            ("run", "trace_p") => self.trace_p = f(value)?,
            _ => {
                return Err(ConfigError {
                    line,
                    key: format!("{section}.{key}"),
                    message: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let err = |key: &str, msg: String| ConfigError { line: 0, key: key.into(), message: msg };
        self.model()
            .map_err(|e| err("model", e.to_string()))?;
        self.grid().map_err(|e| err("grid", e.to_string()))?;
        for (k, v) in [
            ("time.dt", self.dt),
            ("time.t_end", self.t_end),
            ("time.touchdown_tol", self.touchdown_tol),
            ("time.norm_cap", self.norm_cap),
            ("time.steady_tol", self.steady_tol),
            ("run.lambda_step", self.lambda_step),
        ] {
            if !(v > 0.0) {
                return Err(err(k, format!("must be positive, got {v}")));
            }
        }
        if self.max_points == 0 {
            return Err(err("run.max_points", "must be at least 1".into()));
        }
        if !(self.trace_p >= 2.0 && self.trace_p <= 4.0) {
            return Err(err("run.trace_p", format!("must lie in [2, 4], got {}", self.trace_p)));
        }
        Ok(())
    }

    pub fn model(&self) -> pullin_core::Result<ModelParams> {
        ModelParams::new(self.epsilon, self.lambda, self.beta, self.tau, self.a)
    }

    pub fn grid(&self) -> pullin_core::Result<RadialGrid> {
        RadialGrid::new(self.n_r, self.n_eta)
    }

    pub fn tolerances(&self) -> SimTolerances {
        SimTolerances {
            touchdown: self.touchdown_tol,
            norm_cap: self.norm_cap,
            steady: self.steady_tol,
        }
    }
}
