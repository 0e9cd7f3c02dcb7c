mod config;
mod report;
mod states;
mod validate;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bellsim_core::detection::{angle_scan, ch_functional_with_policy, ScanOptions, Verdict};
use bellsim_core::sweep::{run_sweep, write_csv, SweepSpec};
use bellsim_core::NumericalPolicy;
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_angle_list, resolve_angles, AngleSpec, Engine, ExperimentConfig, StateSpec};

/// Clauser-Horne inequality tests for four-mode radiation states.
#[derive(Parser)]
#[command(name = "bellsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the inequality for one state at one set of angles.
    Run(Common),
    /// Sweep the squeezed thermal family at fixed angles and write CSV.
    Sweep(Common),
    /// Search all angles for the largest violation.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Grid points per angle.
        #[arg(long)]
        grid: Option<usize>,
        /// Refine the best grid point with Nelder-Mead (default).
        #[arg(long, overrides_with = "no_refine")]
        refine: bool,
        /// Report the grid optimum only.
        #[arg(long)]
        no_refine: bool,
    },
    /// Run the classical, cross-engine and closed-form checks.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Random classical trials (0 skips validation).
        #[arg(long)]
        trials: Option<u64>,
        /// Overrides the verdict tolerance.
        #[arg(long, hide = true, allow_hyphen_values = true)]
        verdict_tol: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    engine: Option<Engine>,
    /// Total photon-number cutoff of the Fock engine.
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Four comma-separated angles (radians or forms like 3pi/8), or "random".
    #[arg(long, allow_hyphen_values = true)]
    angles: Option<String>,
}

/// Configuration after the command line has been merged over the file.
struct Resolved {
    config: ExperimentConfig,
    engine: Option<Engine>,
    seed: u64,
    policy: NumericalPolicy,
}

impl Common {
    fn resolve(&self) -> Result<Resolved> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(c) = self.cutoff {
            config.cutoff = Some(c);
        }
        if let Some(o) = &self.out {
            config.out = Some(o.clone());
        }
        if let Some(a) = &self.angles {
            config.angles = Some(parse_angle_list(a)?);
        }
        Ok(Resolved {
            engine: self.engine.or(config.engine),
            seed: self.seed.or(config.seed).unwrap_or(0),
            policy: config.policy.unwrap_or_default(),
            config,
        })
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn state_of(config: &ExperimentConfig) -> Result<&StateSpec> {
    config
        .state
        .as_ref()
        .context("no state given; add a \"state\" object to the config")
}

fn exit_for(verdicts: impl IntoIterator<Item = Verdict>) -> ExitCode {
    if verdicts.into_iter().any(|v| v == Verdict::Inconclusive) {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_run(common: &Common) -> Result<ExitCode> {
    let r = common.resolve()?;
    let spec = state_of(&r.config)?;
    let angles = resolve_angles(r.config.angles.as_ref(), r.seed)?;
    let sources = states::prepare(spec, r.engine.unwrap_or(spec.native_engine()), r.config.cutoff, &r.policy)?;
    let mut rows = Vec::new();
    println!("state: {}", spec.name());
    for (name, source) in &sources {
        let report = ch_functional_with_policy(source.as_ref(), &angles, &r.policy)?;
        report::print_report(name, &report);
        rows.push((name.to_string(), "fixed".to_string(), report));
    }
    if rows.len() == 2 {
        let dev = rows[0].2.f - rows[1].2.f;
        println!("engine difference in f: {:.3e}", dev.abs());
    }
    if let Some(path) = &r.config.out {
        report::write_reports(&rows, open_output(&Some(path.clone()))?)?;
    }
    Ok(exit_for(rows.iter().map(|(_, _, rep)| rep.verdict)))
}

fn cmd_sweep(common: &Common) -> Result<ExitCode> {
    let r = common.resolve()?;
    if let Some(e) = r.engine {
        if e != Engine::Gaussian {
            bail!("sweeps run on the gaussian engine only");
        }
    }
    let spec: SweepSpec = r.config.sweep.clone().unwrap_or_default();
    let angles = match &r.config.angles {
        Some(AngleSpec::Keyword(_)) => bail!("sweeps need fixed angles"),
        other => resolve_angles(other.as_ref(), r.seed)?,
    };
    let rows = run_sweep(&spec, &angles, &r.policy)?;
    let mut out = open_output(&r.config.out)?;
    write_csv(&rows, &mut out)?;
    out.flush()?;
    if r.config.out.is_some() {
        let violated = rows.iter().filter(|row| row.violated()).count();
        println!("{} rows, {violated} violated", rows.len());
    }
    Ok(exit_for(rows.iter().map(|row| row.verdict)))
}

fn cmd_scan(common: &Common, grid: Option<usize>, refine: bool, no_refine: bool) -> Result<ExitCode> {
    let r = common.resolve()?;
    let spec = state_of(&r.config)?;
    let file = r.config.scan.unwrap_or(config::ScanConfig { grid: None, refine: None });
    let options = ScanOptions {
        grid_density: grid.or(file.grid).unwrap_or(16),
        refine: if refine {
            true
        } else if no_refine {
            false
        } else {
            file.refine.unwrap_or(true)
        },
    };
    let sources = states::prepare(spec, r.engine.unwrap_or(spec.native_engine()), r.config.cutoff, &r.policy)?;
    println!("state: {}", spec.name());
    let mut rows = Vec::new();
    for (name, source) in &sources {
        let scan = angle_scan(source.as_ref(), &options, &r.policy)?;
        let a = scan.max_f.angles;
        let b = scan.min_lower_margin.angles;
        println!("engine: {name} ({} rate evaluations)", scan.evaluations);
        println!(
            "  best f                 {:.15e} at ({:.12}, {:.12}, {:.12}, {:.12}) [{}]",
            scan.max_f.f,
            a.theta1,
            a.theta2,
            a.theta1p,
            a.theta2p,
            scan.max_f.verdict.as_str()
        );
        println!(
            "  least f + P(.,.)       {:.15e} at ({:.12}, {:.12}, {:.12}, {:.12}) [{}]",
            scan.min_lower_margin.lower_margin,
            b.theta1,
            b.theta2,
            b.theta1p,
            b.theta2p,
            scan.min_lower_margin.verdict.as_str()
        );
        rows.push((name.to_string(), "max_f".to_string(), scan.max_f));
        rows.push((name.to_string(), "min_lower_margin".to_string(), scan.min_lower_margin));
    }
    if let Some(path) = &r.config.out {
        report::write_reports(&rows, open_output(&Some(path.clone()))?)?;
    }
    Ok(exit_for(rows.iter().map(|(_, _, rep)| rep.verdict)))
}

fn configure_threads() -> Result<()> {
    if let Ok(text) = std::env::var("BELLSIM_THREADS") {
        let n: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("BELLSIM_THREADS must be a positive integer, got {text:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Sweep(c) => cmd_sweep(c),
        Command::Scan {
            common,
            grid,
            refine,
            no_refine,
        } => cmd_scan(common, *grid, *refine, *no_refine),
        Command::Validate {
            common,
            trials,
            verdict_tol,
        } => common.resolve().and_then(|r| validate::cmd_validate(r.config, r.seed, r.policy, *trials, *verdict_tol)),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
