//! Batch front end: `validate`, `sweep`, `reconstruct` and `selftest`.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 invalid configuration or
//! output location, 3 solver guard or truncation failure, 4 infeasible hull.

pub mod config;
pub mod output;
pub mod selftest;

use crate::indicator::IndicatorSample;
use crate::recon::{
    estimate_support, reconstruct_hull, sweep_directions, synth_translated, BallTruth, FitWarning, ReconError,
    Reconstruction, SupportEstimate,
};
use clap::{Parser, Subcommand, ValueEnum};
use config::{Problem, RunConfig};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "enclosure", version, about = "Enclosure-method sweeps and convex hull reconstruction for Maxwell obstacles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving output files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the configuration and print it fully resolved.
    Validate,
    /// Indicator samples for every direction, level and `τ`, as CSV.
    Sweep,
    /// Support estimates, hull mesh and report.
    Reconstruct,
    /// Run the built-in invariant suites.
    Selftest {
        #[arg(long, value_enum, hide = true)]
        mutate: Option<MutateArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MutateArg {
    MkSign,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub lines: Vec<String>,
}

impl CliError {
    fn new(code: i32, msg: impl Into<String>) -> Self {
        CliError { code, lines: vec![msg.into()] }
    }
}

impl From<ReconError> for CliError {
    fn from(e: ReconError) -> Self {
        let code = match e {
            ReconError::VanishingIndicator | ReconError::Hull(_) => 4,
            _ => 3,
        };
        CliError::new(code, e.to_string())
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        // a pool may already exist when embedded; the default one is then kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            for l in &e.lines {
                eprintln!("error: {l}");
            }
            e.code
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    if let Command::Selftest { mutate } = cli.command {
        return cmd_selftest(cli.seed.unwrap_or(0), mutate);
    }
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::new(2, "--config PATH is required for this command"))?;
    let mut cfg = config::load(path, std::env::vars()).map_err(|lines| CliError { code: 2, lines })?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match cli.command {
        Command::Validate => cmd_validate(&cfg),
        Command::Sweep => cmd_sweep(&cfg, &cli.out),
        Command::Reconstruct => cmd_reconstruct(&cfg, &cli.out),
        Command::Selftest { .. } => unreachable!(),
    }
}

fn max_tau(cfg: &RunConfig) -> f64 {
    cfg.tau_grid.values().into_iter().fold(f64::NAN, f64::max)
}

fn resolved_degree(cfg: &RunConfig) -> Result<usize, CliError> {
    cfg.setup().degree_for(max_tau(cfg)).map_err(|e| CliError::from(ReconError::from(e)))
}

fn cmd_validate(cfg: &RunConfig) -> Result<(), CliError> {
    let l = resolved_degree(cfg)?;
    let json = serde_json::to_string_pretty(cfg).map_err(|e| CliError::new(2, e.to_string()))?;
    println!("config OK");
    println!("{json}");
    let how = if cfg.setup().lmax.is_some() { "fixed" } else { "auto" };
    println!("resolved L: {l} ({how})");
    println!("directions: {}", cfg.directions().len());
    println!("tau values: {}", cfg.tau_grid.values().len());
    Ok(())
}

/// Sweep rows ordered by (direction index, t, tau). Levels share one sweep
/// per direction: `t` enters the probe only through the factor `e^{-τt}`.
pub fn sweep_rows(cfg: &RunConfig) -> Result<Vec<IndicatorSample>, CliError> {
    let mut setup = cfg.setup();
    setup.lmax = Some(resolved_degree(cfg)?);
    let taus = cfg.tau_grid.values();
    let dirs = cfg.directions();
    let t0 = cfg.t_grid[0];
    let base = sweep_directions(&setup, &dirs, t0, &taus)?;
    let mut rows = Vec::with_capacity(dirs.len() * cfg.t_grid.len() * taus.len());
    for sweep in &base {
        let moved = synth_translated(sweep, cfg.translation);
        for &t in &cfg.t_grid {
            rows.extend(moved.iter().map(|s| IndicatorSample {
                t,
                value: s.value.shift(2.0 * s.tau * (t0 - t)),
                ..s.clone()
            }));
        }
    }
    Ok(rows)
}

fn write(files: Vec<(PathBuf, String)>) -> Result<(), CliError> {
    output::write_all(&files).map_err(|e| CliError::new(2, format!("cannot write outputs: {e}")))
}

fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let rows = sweep_rows(cfg)?;
    let path = out.join(&cfg.outputs.sweep_csv);
    write(vec![(path.clone(), output::sweep_csv(&rows))])?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

pub struct ReconRun {
    pub lmax: usize,
    pub estimates: Vec<SupportEstimate>,
    pub reconstruction: Reconstruction,
    pub report: String,
}

/// Sweeps at `t = 0`, applies the configured translation and assembles the hull.
pub fn reconstruct(cfg: &RunConfig) -> Result<ReconRun, CliError> {
    let lmax = resolved_degree(cfg)?;
    let mut setup = cfg.setup();
    setup.lmax = Some(lmax);
    let taus = cfg.tau_grid.values();
    let dirs = cfg.directions();
    let sweeps = sweep_directions(&setup, &dirs, 0.0, &taus)?;
    let fit = cfg.fit();
    let estimates: Vec<SupportEstimate> = sweeps
        .iter()
        .map(|s| estimate_support(&synth_translated(s, cfg.translation), &fit))
        .collect::<Result<_, _>>()?;
    let truth = (cfg.truth && cfg.problem != Problem::Empty).then_some(BallTruth {
        center: cfg.translation,
        radius: cfg.geometry.r_d,
    });
    let reconstruction = reconstruct_hull(&estimates, truth)?;
    let report = report_text(cfg, lmax, &taus, &estimates, &reconstruction);
    Ok(ReconRun { lmax, estimates, reconstruction, report })
}

fn report_text(cfg: &RunConfig, lmax: usize, taus: &[f64], est: &[SupportEstimate], r: &Reconstruction) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "enclosure reconstruction");
    let problem = match cfg.problem {
        Problem::Pec => "pec".to_string(),
        Problem::Transmission => format!("transmission (mu inside = {})", 1.0 - cfg.medium.map_or(0.0, |m| m.mu_d)),
        Problem::Empty => "empty".to_string(),
    };
    let _ = writeln!(s, "problem: {problem}");
    let _ = writeln!(s, "k: {}  R_D: {}  R_Omega: {}  L: {lmax}", cfg.k, cfg.geometry.r_d, cfg.geometry.r_omega);
    let _ = writeln!(
        s,
        "tau: {} values in [{}, {}], fit window fraction {}, log correction {}",
        taus.len(),
        taus[0],
        taus[taus.len() - 1],
        cfg.tolerances.window_fraction,
        cfg.tolerances.log_correction
    );
    let c = cfg.translation;
    let _ = writeln!(s, "translation: ({}, {}, {})", c[0], c[1], c[2]);
    let warned: Vec<&SupportEstimate> = est.iter().filter(|e| e.warning.is_some()).collect();
    let _ = writeln!(s, "fit warnings: {}", warned.len());
    for e in warned {
        if let Some(FitWarning::NonMonotoneTail { residual }) = e.warning {
            let _ = writeln!(
                s,
                "  non-monotone tail at rho = ({:.4}, {:.4}, {:.4}), residual {residual:.3e}",
                e.rho[0], e.rho[1], e.rho[2]
            );
        }
    }
    let _ = write!(s, "{}", r.report);
    if let Some(t) = &r.report.truth {
        let ok = if t.sup_support_error <= 0.05 { "yes" } else { "no" };
        let _ = writeln!(s, "sup support error <= 0.05: {ok}");
    }
    s
}

fn cmd_reconstruct(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let run = reconstruct(cfg)?;
    let o = &cfg.outputs;
    write(vec![
        (out.join(&o.estimates_csv), output::estimates_csv(&run.estimates)),
        (out.join(&o.hull_off), output::off(&run.reconstruction.mesh)),
        (out.join(&o.report), run.report.clone()),
    ])?;
    print!("{}", run.report);
    Ok(())
}

fn cmd_selftest(seed: u64, mutate: Option<MutateArg>) -> Result<(), CliError> {
    let m = match mutate {
        Some(MutateArg::MkSign) => selftest::Mutation::MkSign,
        None => selftest::Mutation::None,
    };
    let results = selftest::run(seed, m);
    let mut failed = Vec::new();
    for r in &results {
        let ms = r.elapsed.as_secs_f64() * 1e3;
        match &r.outcome {
            Ok(d) => println!("PASS  {:<22} {ms:>9.1} ms  {d}", r.name),
            Err(d) => {
                println!("FAIL  {:<22} {ms:>9.1} ms  {d}", r.name);
                failed.push(r.name);
            }
        }
    }
    if failed.is_empty() {
        println!("selftest: all {} suites passed", results.len());
        Ok(())
    } else {
        Err(CliError::new(1, format!("selftest failed: {}", failed.join(", "))))
    }
}
