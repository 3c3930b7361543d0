use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nseb::cli_io::{cmd_analyze, cmd_monitor, cmd_selftest, cmd_simulate, OutputFormat};
use nseb::error::{Error, Result};
use nseb::flux_analysis::{FluxConfig, DEFAULT_EPS};
use nseb::regularity_monitor::{CriterionConfig, CriterionReport};

#[derive(Parser)]
#[command(
    name = "nseb",
    version,
    about = "Pseudo-spectral Navier-Stokes runs with Littlewood-Paley flux and regularity diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured run and write snapshots, energy.csv and manifest.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        run_dir: PathBuf,
    },
    /// Localized flux and weighted block sums for every snapshot of a run.
    Analyze {
        #[arg(long)]
        run_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        /// First block of the weighted sums.
        #[arg(long = "Q", default_value_t = 2)]
        big_q: i32,
        /// Restrict the per-block rows to LO:HI (inclusive).
        #[arg(long, value_parser = parse_range)]
        q_range: Option<(i32, i32)>,
        #[arg(long, default_value = "csv", value_parser = parse_format)]
        format: OutputFormat,
    },
    /// Evaluate the regularity criteria over a run.
    Monitor {
        #[arg(long)]
        run_dir: PathBuf,
        #[command(flatten)]
        criterion: CriterionArgs,
        #[arg(long, default_value = "csv", value_parser = parse_format)]
        format: OutputFormat,
    },
    /// Compare the fast routines against direct-summation oracles at n = 16 and 32.
    Selftest,
}

#[derive(Args)]
struct CriterionArgs {
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 3.0)]
    r: f64,
    #[arg(long, default_value_t = 3)]
    q_tail: i32,
    #[arg(long, default_value_t = 1)]
    jump_window: usize,
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_range(s: &str) -> std::result::Result<(i32, i32), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
    Ok((lo, hi))
}

fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var("NSEB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Error::Config(format!("NSEB_THREADS={value:?} is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn print_criterion(name: &str, rep: &CriterionReport) {
    println!(
        "{name:<14} summary={:.6e} threshold={:.6e} margin={:+.3e} verdict={:?}",
        rep.summary, rep.threshold, rep.margin, rep.verdict
    );
}

/// Returns whether every self-check passed.
fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    match cli.command {
        Command::Simulate { config, run_dir } => {
            let manifest = cmd_simulate(&config, &run_dir)?;
            println!(
                "wrote {} snapshots to {}",
                manifest.snapshots.len(),
                run_dir.display()
            );
        }
        Command::Analyze {
            run_dir,
            eps,
            big_q,
            q_range,
            format,
        } => {
            let config = FluxConfig {
                eps,
                big_q,
                q_range,
            };
            for rep in cmd_analyze(&run_dir, &config, format)? {
                println!(
                    "t={:.6} I={:.6e} II={:.6e} III={:.6e} R={:.6e} ratio={:.6e} sum_Pi={:+.6e}",
                    rep.time,
                    rep.terms.i,
                    rep.terms.ii,
                    rep.terms.iii,
                    rep.remainder,
                    rep.ratio_iii,
                    rep.total_flux
                );
            }
        }
        Command::Monitor {
            run_dir,
            criterion,
            format,
        } => {
            let config = CriterionConfig {
                c: criterion.c,
                r: criterion.r,
                q_tail: criterion.q_tail,
                jump_window: criterion.jump_window,
            };
            let rep = cmd_monitor(&run_dir, &config, format)?;
            print_criterion("tail_sup", &rep.tail_sup);
            print_criterion("linfty_besov", &rep.linfty_besov);
            if let Some(j) = &rep.jump {
                print_criterion("jump", j);
            }
            if let Some(ti) = &rep.time_integral {
                print_criterion("time_integral", ti);
            }
            println!("lr_besov       value={:.6e}", rep.lr_besov);
        }
        Command::Selftest => {
            let checks = cmd_selftest();
            for c in &checks {
                println!("{c}");
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
