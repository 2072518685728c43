//! Command-line front end: configuration, dispatch, CSV/JSON emission.
//!
//! Exit codes: 0 success, 2 configuration/parse error, 3 numerical failure,
//! 4 touchdown (simulate mode with --fail-on-touchdown).

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use pullin_core::quad::l2_norm_sq;
use pullin_core::{
    clamped_eigenpair, continue_branch_on, mixed_derivative_identity_check, simulate,
    solve_potential, trace_corpus_report, Field2d, PlateProfile, RadialGrid, SimStatus,
};

use config::RunConfig;

const EXIT_PARSE: i32 = 2;
const EXIT_NUMERICAL: i32 = 3;
const EXIT_TOUCHDOWN: i32 = 4;

/// Reference value of the smallest clamped-plate eigenvalue for beta = 1,
/// tau = 0 (fourth power of the first root of J1 I0 + J0 I1).
const MU1_REFERENCE: f64 = 104.36310555883939;

#[derive(Parser)]
#[command(name = "pullin", about = "MEMS plate pull-in simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Sectioned key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Per-key override, e.g. --set model.epsilon=0.1 (repeatable)
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the transformed electrostatic potential for a fixed deflection
    Potential(CommonArgs),
    /// Integrate the plate dynamics from the configured initial profile
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Exit with code 4 when the run terminates by touchdown
        #[arg(long)]
        fail_on_touchdown: bool,
    },
    /// Continue the stationary branch from lambda = 0 and locate the fold
    Branch(CommonArgs),
    /// Compute the principal clamped-plate eigenpair
    Eigen(CommonArgs),
    /// Run the verification suite (trace corpus, mixed identity, eigen oracle)
    Verify(CommonArgs),
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn parse(msg: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, message: msg.into() }
    }

    fn numerical(msg: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERICAL, message: msg.into() }
    }
}

impl From<pullin_core::Error> for Failure {
    fn from(e: pullin_core::Error) -> Self {
        Failure::numerical(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run_command(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    std::process::exit(code);
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| Failure::parse(e.to_string()))?
        }
        None => RunConfig::default(),
    };
    for spec in &common.set {
        cfg.apply_override(spec).map_err(|e| Failure::parse(e.to_string()))?;
    }
    Ok(cfg)
}

fn run_command(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Potential(common) => run_potential(&load_config(&common)?),
        Command::Simulate { common, fail_on_touchdown } => {
            run_simulate(&load_config(&common)?, fail_on_touchdown)
        }
        Command::Branch(common) => run_branch(&load_config(&common)?),
        Command::Eigen(common) => run_eigen(&load_config(&common)?),
        Command::Verify(common) => run_verify(&load_config(&common)?),
    }
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(
    path: Option<&Path>,
    header: &str,
    rows: impl Iterator<Item = String>,
) -> Result<Option<String>, Failure> {
    let Some(path) = path else { return Ok(None) };
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    fs::write(path, out)
        .map_err(|e| Failure::parse(format!("cannot write {}: {e}", path.display())))?;
    Ok(Some(path.display().to_string()))
}

fn emit(summary: &Value) {
    println!("{summary}");
}

fn initial_profile(cfg: &RunConfig, grid: RadialGrid) -> PlateProfile {
    let d = cfg.profile_amp;
    PlateProfile::from_fn(grid, |r| d * (1.0 - r * r) * (1.0 - r * r))
}

fn run_potential(cfg: &RunConfig) -> Result<i32, Failure> {
    let grid = cfg.grid()?;
    let params = cfg.model()?;
    let v = initial_profile(cfg, grid);
    let phi = solve_potential(&v, &params)?;
    let rows = (0..grid.n_r()).flat_map(|i| {
        let phi = &phi;
        (0..grid.n_eta()).map(move |j| {
            format!("{},{},{}", sci(grid.r(i)), sci(grid.eta(j)), sci(phi.get(i, j)))
        })
    });
    let csv = write_csv(cfg.output.as_deref(), "r,eta,phi", rows)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &p in phi.values() {
        lo = lo.min(p);
        hi = hi.max(p);
    }
    emit(&json!({
        "mode": "potential",
        "status": "ok",
        "phi_min": lo,
        "phi_max": hi,
        "n_r": grid.n_r(),
        "n_eta": grid.n_eta(),
        "csv": csv,
    }));
    Ok(0)
}

fn run_simulate(cfg: &RunConfig, fail_on_touchdown: bool) -> Result<i32, Failure> {
    let grid = cfg.grid()?;
    let params = cfg.model()?;
    let u0 = initial_profile(cfg, grid);
    let trace = simulate(&u0, &params, cfg.t_end, cfg.dt, cfg.tolerances())?;
    let rows = trace.records.iter().map(|r| {
        format!(
            "{},{},{},{},{}",
            sci(r.t),
            sci(r.min_u),
            sci(r.l2_norm),
            sci(r.grad_sq),
            sci(r.energy_proxy)
        )
    });
    let csv = write_csv(cfg.output.as_deref(), "t,min_u,l2_norm,grad_sq,energy_proxy", rows)?;
    let touched = trace.status == SimStatus::Touchdown;
    emit(&json!({
        "mode": "simulate",
        "status": trace.status.as_str(),
        "terminal_time": trace.terminal_time(),
        "touchdown_time": if touched { Some(trace.terminal_time()) } else { None },
        "min_gap_final": 1.0 + trace.final_profile.min_value(),
        "steps": trace.records.len(),
        "csv": csv,
    }));
    Ok(if touched && fail_on_touchdown { EXIT_TOUCHDOWN } else { 0 })
}

fn run_branch(cfg: &RunConfig) -> Result<i32, Failure> {
    let grid = cfg.grid()?;
    let params = cfg.model()?;
    let result = continue_branch_on(&params, grid, cfg.lambda_step, cfg.max_points)?;
    let rows = result.points.iter().map(|p| {
        format!(
            "{},{},{},{},{}",
            sci(p.lambda),
            sci(p.profile.min_value()),
            sci(l2_norm_sq(&p.profile).sqrt()),
            sci(p.leading_eig),
            p.stable
        )
    });
    let csv = write_csv(cfg.output.as_deref(), "lambda,min_u,l2_u,leading_eig,stable", rows)?;
    emit(&json!({
        "mode": "branch",
        "status": "ok",
        "lambda_star": result.lambda_star,
        "points": result.points.len(),
        "csv": csv,
    }));
    Ok(0)
}

fn run_eigen(cfg: &RunConfig) -> Result<i32, Failure> {
    let grid = cfg.grid()?;
    let params = cfg.model()?;
    let pair = clamped_eigenpair(&params, grid)?;
    let rows = (0..grid.n_r())
        .map(|i| format!("{},{}", sci(grid.r(i)), sci(pair.zeta.values()[i])));
    let csv = write_csv(cfg.output.as_deref(), "r,zeta", rows)?;
    emit(&json!({
        "mode": "eigen",
        "status": "ok",
        "mu1": pair.mu,
        "beta": cfg.beta,
        "tau": cfg.tau,
        "csv": csv,
    }));
    Ok(0)
}

fn run_verify(cfg: &RunConfig) -> Result<i32, Failure> {
    let grid = cfg.grid()?;
    let params = cfg.model()?;

    let corpus = trace_corpus_report(grid, cfg.corpus_size, cfg.seed, cfg.trace_p)?;

    let phi = Field2d::from_fn(grid, |r, e| (1.0 - r * r) * e * (1.0 - e));
    let (_, _, mixed_relerr) = mixed_derivative_identity_check(&phi)?;

    let pair = clamped_eigenpair(&params, grid)?;
    // the Bessel reference scales linearly in beta and only applies at tau = 0
    let mu1_relerr = if cfg.tau == 0.0 {
        Some((pair.mu - cfg.beta * MU1_REFERENCE).abs() / (cfg.beta * MU1_REFERENCE))
    } else {
        None
    };

    let ok = mixed_relerr <= 5e-3
        && corpus.max_ratio.is_finite()
        && mu1_relerr.map_or(true, |r| r <= 5e-3);
    emit(&json!({
        "mode": "verify",
        "status": if ok { "ok" } else { "failed" },
        "trace_p": cfg.trace_p,
        "trace_count": corpus.count,
        "trace_max_ratio": corpus.max_ratio,
        "trace_mean_ratio": corpus.mean_ratio,
        "mixed_identity_relerr": mixed_relerr,
        "mu1": pair.mu,
        "mu1_oracle_relerr": mu1_relerr,
        "seed": cfg.seed,
    }));
    if ok {
        Ok(0)
    } else {
        Err(Failure::numerical("verification checks failed"))
    }
}
