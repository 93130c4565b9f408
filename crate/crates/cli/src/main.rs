use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use flexgrasp::controllers::{check_gain_conditions, positivity_ratio, search_analysis_params};
use flexgrasp::scenario::{
    compare, emit_csv, emit_plots, run_scenario, summarize, ScenarioConfig, ScenarioKind, SimTrace,
};
use flexgrasp::Error;

#[derive(Parser)]
#[command(
    name = "flexgrasp",
    version,
    about = "Dual flexible-arm grasp simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace, plots and summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        scenario: Option<ScenarioKind>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tabulate settling, overshoot and effort across saved traces.
    Compare {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
    /// Print the margin of every gain inequality for a config.
    CheckGains {
        #[arg(long)]
        config: PathBuf,
        /// Also search for analysis constants with this many random candidates.
        #[arg(long)]
        search: Option<usize>,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_DIVERGENCE: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Divergence { .. } => EXIT_DIVERGENCE,
                Error::Io { .. } => EXIT_IO,
                _ => EXIT_CONFIG,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_CONFIG
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })
        .context("creating output directory")
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    config: &Path,
    out: &Path,
    scenario: Option<ScenarioKind>,
    grid: Option<usize>,
    dt: Option<f64>,
    duration: Option<f64>,
    seed: Option<u64>,
) -> Result<()> {
    let mut cfg = ScenarioConfig::load(config)?;
    if let Some(s) = scenario {
        cfg.scenario = s;
    }
    if let Some(n) = grid {
        cfg.grid = n;
    }
    if dt.is_some() {
        cfg.dt = dt;
    }
    if let Some(d) = duration {
        cfg.duration = d;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let run = run_scenario(&cfg)?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }

    create_dir(out)?;
    let name = cfg.scenario.name();
    let csv = out.join(format!("{name}.csv"));
    emit_csv(&run.trace, &csv)?;
    if !run.trace.rows.is_empty() {
        emit_plots(&run.trace, &out.join(name))?;
    }
    println!("{}", summarize(&run.trace));
    println!("steps             {} (dt {:.4e} s)", run.steps, run.dt);
    println!("trace             {}", csv.display());

    if let Some(e) = run.aborted {
        return Err(e).context(format!("partial trace written to {}", csv.display()));
    }
    Ok(())
}

fn compare_traces(out: &Path, paths: &[PathBuf]) -> Result<()> {
    let traces = paths
        .iter()
        .map(|p| SimTrace::load(p))
        .collect::<flexgrasp::Result<Vec<_>>>()?;
    let table = compare(&traces)?;
    create_dir(out)?;
    let path = out.join("comparison.txt");
    std::fs::write(&path, &table).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    print!("{table}");
    Ok(())
}

fn check_gains(config: &Path, search: Option<usize>) -> Result<()> {
    let cfg = ScenarioConfig::load(config)?;
    let report = check_gain_conditions(&cfg.nabfc, &cfg.analysis, &cfg.plant);
    print!("{report}");
    let phi1 = positivity_ratio(cfg.analysis.beta1, cfg.analysis.beta2, &cfg.plant);
    println!("positivity ratio phi1 = {phi1:.6}");
    let failed = report.failures().count();
    if failed == 0 {
        println!("all {} conditions hold", report.checks.len());
    } else {
        println!("{failed} of {} conditions fail", report.checks.len());
    }
    if let Some(iterations) = search {
        let (best, best_report) =
            search_analysis_params(&cfg.nabfc, &cfg.plant, cfg.seed, iterations);
        println!();
        println!(
            "best analysis constants over {iterations} candidates (seed {}):",
            cfg.seed
        );
        print!("{best_report}");
        println!("{best:#?}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate {
            config,
            out,
            scenario,
            grid,
            dt,
            duration,
            seed,
        } => simulate(config, out, *scenario, *grid, *dt, *duration, *seed),
        Command::Compare { out, traces } => compare_traces(out, traces),
        Command::CheckGains { config, search } => check_gains(config, *search),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
