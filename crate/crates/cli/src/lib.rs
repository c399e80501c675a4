//! Command implementations behind the `lobsim` binary.

pub mod config;
pub mod output;
pub mod sweep;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use lobsim_core::calibration::{
    estimate_params, read_events, write_events, Calibration, CalibrationOptions,
};
use lobsim_core::pricing::{lower_bound, to_micros};
use lobsim_core::run_simulation;
use thiserror::Error;

use crate::config::{Config, Grid};
use crate::output::{create, finish, fmt_float, fmt_opt};
use crate::sweep::{
    cell_means, compute_metrics, regressions, run_sweep, sim_config, write_regressions,
    write_sweep, Metrics, Regression, SweepRow,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
        }
    }
}

fn single(grid: &Grid, what: &str) -> Result<i64, CliError> {
    match grid.micros.as_slice() {
        [v] => Ok(*v),
        _ => Err(CliError::Config(format!(
            "{what} must be a single value for this command"
        ))),
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// One simulation; writes `trades.csv`, `mids.csv`, `daily.csv` and, when
/// `events` is set, `events.csv`.
pub fn cmd_simulate(cfg: &Config, out_dir: &Path, events: bool) -> Result<Metrics, CliError> {
    let up = single(&cfg.phi_up_grid()?, "phi_up")?;
    let down = single(&cfg.phi_down_grid()?, "phi_down")?;
    let mut sc = sim_config(cfg, up, down, cfg.params.seed);
    sc.record_trades = true;
    sc.record_events = events;
    let res = run_simulation(&sc).map_err(|e| CliError::Config(e.to_string()))?;
    let tick = sc.tick;

    let mut w = create(out_dir, "trades.csv")?;
    w.write_record(["step", "price", "size"]).map_err(csv_err)?;
    for t in &res.trades {
        w.write_record([
            t.step.to_string(),
            fmt_float(t.price as f64 * tick),
            t.size.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)?;

    let mut w = create(out_dir, "mids.csv")?;
    w.write_record(["step", "mid"]).map_err(csv_err)?;
    for (s, m) in res.mid_steps.iter().zip(&res.mids) {
        w.write_record([s.to_string(), fmt_float(m.ticks() * tick)])
            .map_err(csv_err)?;
    }
    finish(w)?;

    let mut w = create(out_dir, "daily.csv")?;
    w.write_record(["day", "close", "p_min", "p_max"])
        .map_err(csv_err)?;
    for d in &res.days {
        w.write_record([
            d.day.to_string(),
            fmt_float(d.close as f64 * tick),
            fmt_float(d.p_min as f64 * tick),
            fmt_float(d.p_max as f64 * tick),
        ])
        .map_err(csv_err)?;
    }
    finish(w)?;

    if events {
        let path = out_dir.join("events.csv");
        let f =
            File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        write_events(&res.events, std::io::BufWriter::new(f))
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(compute_metrics(
        &res.mid_ticks(),
        sc.initial_price as f64,
        up,
        down,
        cfg.run.fit_start_frac,
    ))
}

/// Grid sweep; writes `sweep.csv` and `regressions.csv`.
pub fn cmd_sweep(
    cfg: &Config,
    out_dir: &Path,
) -> Result<(Vec<SweepRow>, Vec<Regression>), CliError> {
    let rows = run_sweep(cfg, &cfg.phi_up_grid()?, &cfg.phi_down_grid()?)?;
    let regs = regressions(&cell_means(&rows));
    let mut w = create(out_dir, "sweep.csv")?;
    write_sweep(&rows, &mut w)?;
    finish(w)?;
    let mut w = create(out_dir, "regressions.csv")?;
    write_regressions(&regs, &mut w)?;
    finish(w)?;
    Ok((rows, regs))
}

pub const ANALYZE_HEADER: [&str; 11] = [
    "phi_up",
    "phi_down",
    "lambda",
    "t_half",
    "alpha",
    "x_min",
    "mean_return",
    "H_r",
    "H_r_err",
    "H_V",
    "H_V_err",
];

/// Read a `step,mid` file written by `simulate`.
pub fn read_mids(path: &Path) -> Result<Vec<f64>, CliError> {
    let f = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::Reader::from_reader(BufReader::new(f));
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<(u64, f64)>().enumerate() {
        let (_, mid) =
            rec.map_err(|e| CliError::Data(format!("{} row {}: {e}", path.display(), i + 1)))?;
        out.push(mid);
    }
    Ok(out)
}

/// Metrics of an existing mid-price file; writes `analysis.csv`.
pub fn cmd_analyze(cfg: &Config, mids_path: &Path, out_dir: &Path) -> Result<Metrics, CliError> {
    let up = single(&cfg.phi_up_grid()?, "phi_up")?;
    let down = single(&cfg.phi_down_grid()?, "phi_down")?;
    let tick = cfg.run.tick;
    // Back to half-tick resolution so results match those of a sweep.
    let mids: Vec<f64> = read_mids(mids_path)?
        .iter()
        .map(|m| (2.0 * m / tick).round() / 2.0)
        .collect();
    if mids.len() < 2 {
        return Err(CliError::Data(format!(
            "{}: need at least two mid prices",
            mids_path.display()
        )));
    }
    let m = compute_metrics(
        &mids,
        cfg.run.initial_price as f64,
        up,
        down,
        cfg.run.fit_start_frac,
    );
    let mut w = create(out_dir, "analysis.csv")?;
    w.write_record(ANALYZE_HEADER).map_err(csv_err)?;
    w.write_record([
        fmt_float(up as f64 / 1e6),
        fmt_float(down as f64 / 1e6),
        fmt_opt(m.lambda),
        fmt_opt(m.t_half),
        fmt_opt(m.alpha),
        fmt_opt(m.x_min),
        fmt_opt(m.mean_return),
        fmt_opt(m.h_r),
        fmt_opt(m.h_r_err),
        fmt_opt(m.h_v),
        fmt_opt(m.h_v_err),
    ])
    .map_err(csv_err)?;
    finish(w)?;
    Ok(m)
}

/// Estimate parameters from an event file and write them as TOML.
pub fn cmd_calibrate(
    events_path: &Path,
    opts: &CalibrationOptions,
    out: &Path,
) -> Result<Calibration, CliError> {
    let f = File::open(events_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", events_path.display())))?;
    let events = read_events(BufReader::new(f)).map_err(|e| CliError::Data(e.to_string()))?;
    let cal = estimate_params(&events, opts).map_err(|e| CliError::Data(e.to_string()))?;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(e.to_string()))?;
    }
    cal.params
        .save(out)
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(cal)
}

/// Price floor for each down limit, as CSV.
pub fn cmd_lower_bound<W: Write>(downs: &Grid, tick: f64, w: W) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["phi_down", "lower_bound"])
        .map_err(csv_err)?;
    let mut downs = downs.micros.clone();
    downs.sort_by(|a, b| b.cmp(a));
    for d in downs {
        if d >= 0 {
            return Err(CliError::Config(format!(
                "phi_down must be negative, got {}",
                d as f64 / 1e6
            )));
        }
        let phi = d as f64 / 1e6;
        debug_assert_eq!(to_micros(phi), d);
        wtr.write_record([fmt_float(phi), fmt_float(lower_bound(phi, tick))])
            .map_err(csv_err)?;
    }
    finish(wtr)
}
