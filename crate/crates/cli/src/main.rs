use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lobsim::config::Config;
use lobsim::{cmd_analyze, cmd_calibrate, cmd_lower_bound, cmd_simulate, cmd_sweep, CliError};
use lobsim_core::calibration::CalibrationOptions;

#[derive(Parser)]
#[command(
    name = "lobsim",
    version,
    about = "Order-driven market simulator with daily price limits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML file with optional [run] and [params] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    seeds: Option<u64>,
    /// Up limits as start:end:step, or a single value.
    #[arg(long, allow_hyphen_values = true)]
    phi_up: Option<String>,
    /// Down limits as start:end:step, or a single value.
    #[arg(long, allow_hyphen_values = true)]
    phi_down: Option<String>,
    #[arg(long)]
    days: Option<usize>,
    #[arg(long)]
    steps_per_day: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write trades, mids and daily closes.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write the order-event log for calibration.
        #[arg(long)]
        events: bool,
    },
    /// Run a grid of price limits and fit the regressions.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Compute metrics of an existing mids.csv.
    Analyze {
        #[command(flatten)]
        common: Common,
        mids: PathBuf,
    },
    /// Estimate model parameters from an order-event CSV.
    Calibrate {
        #[command(flatten)]
        common: Common,
        events: PathBuf,
        /// Timestamps per trading day.
        #[arg(long)]
        day_length: u64,
        /// Resting orders protected from marketable orders (2 for
        /// simulator output).
        #[arg(long, default_value_t = 0)]
        min_resting: usize,
        /// Close in ticks preceding the first day.
        #[arg(long)]
        initial_close: Option<i64>,
    },
    /// Print the price floor for each down limit.
    LowerBound {
        #[command(flatten)]
        common: Common,
    },
}

fn load(c: &Common, single_phi: bool) -> Result<Config, CliError> {
    let mut cfg = match &c.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if single_phi {
        cfg.run.phi_up = "0.1".into();
        cfg.run.phi_down = "-0.1".into();
    }
    if let Some(v) = c.seeds {
        cfg.run.seeds = v;
    }
    if let Some(v) = &c.phi_up {
        cfg.run.phi_up = v.clone();
    }
    if let Some(v) = &c.phi_down {
        cfg.run.phi_down = v.clone();
    }
    if let Some(v) = c.days {
        cfg.run.days = v;
    }
    if let Some(v) = c.steps_per_day {
        cfg.params.steps_per_day = v;
    }
    if let Some(v) = c.workers {
        cfg.run.workers = v;
    }
    if let Some(v) = c.seed {
        cfg.params.seed = v;
    }
    cfg.params
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

/// Single-value commands default to symmetric limits unless a config file
/// sets them.
fn single_defaults(c: &Common) -> bool {
    c.config.is_none()
}

fn report(out_dir: &Path, what: &str) {
    println!("wrote {what} to {}", out_dir.display());
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { common, events } => {
            let cfg = load(&common, single_defaults(&common))?;
            let m = cmd_simulate(&cfg, &common.out_dir, events)?;
            report(&common.out_dir, "trades.csv, mids.csv, daily.csv");
            println!("{m:?}");
        }
        Command::Sweep { common } => {
            let cfg = load(&common, false)?;
            let (rows, _) = cmd_sweep(&cfg, &common.out_dir)?;
            report(
                &common.out_dir,
                &format!("{} sweep rows and regressions.csv", rows.len()),
            );
        }
        Command::Analyze { common, mids } => {
            let cfg = load(&common, single_defaults(&common))?;
            let m = cmd_analyze(&cfg, &mids, &common.out_dir)?;
            report(&common.out_dir, "analysis.csv");
            println!("{m:?}");
        }
        Command::Calibrate {
            common,
            events,
            day_length,
            min_resting,
            initial_close,
        } => {
            let cfg = load(&common, single_defaults(&common))?;
            let up = cfg.phi_up_grid()?.values();
            let down = cfg.phi_down_grid()?.values();
            let (&[up], &[down]) = (up.as_slice(), down.as_slice()) else {
                return Err(CliError::Config(
                    "calibrate needs single phi_up and phi_down values".into(),
                ));
            };
            let mut opts = CalibrationOptions::new(up, down, day_length);
            opts.min_resting = min_resting;
            opts.initial_close = initial_close;
            opts.tick = cfg.run.tick;
            opts.overnight = cfg.run.overnight;
            let out = common.out_dir.join("params.toml");
            let cal = cmd_calibrate(&events, &opts, &out)?;
            println!(
                "h_s {:.4} h_x {:.4} cancel_prob {:.4} from {} placements",
                cal.params.h_s, cal.params.h_x, cal.params.cancel_prob, cal.placements
            );
            println!("wrote {}", out.display());
        }
        Command::LowerBound { common } => {
            let cfg = load(&common, false)?;
            cmd_lower_bound(
                &cfg.phi_down_grid()?,
                cfg.run.tick,
                std::io::stdout().lock(),
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lobsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
