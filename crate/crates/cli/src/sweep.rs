use std::io::Write;

use lobsim_core::pricing::lower_bound;
use lobsim_core::stats::{
    divergence_rate, dma_hurst, fit_power_law_tail, half_life, ols2, returns_and_volatility,
    DmaOptions,
};
use lobsim_core::{run_simulation, Ols, SimConfig};
use rayon::prelude::*;

use crate::config::{Config, Grid};
use crate::output::{fmt_float, fmt_opt};
use crate::CliError;

/// Statistics of one price trajectory. Undefined values are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Metrics {
    pub lambda: Option<f64>,
    pub t_half: Option<f64>,
    pub alpha: Option<f64>,
    pub x_min: Option<f64>,
    pub mean_return: Option<f64>,
    pub h_r: Option<f64>,
    pub h_r_err: Option<f64>,
    pub h_v: Option<f64>,
    pub h_v_err: Option<f64>,
}

/// Ordering of `phi_up` against `|phi_down|`, both in millionths.
fn up_vs_down(up: i64, down: i64) -> std::cmp::Ordering {
    up.cmp(&down.abs())
}

/// Metrics of a mid-price series. `p_ref` is the initial price in the units
/// of `mids`; the growth rate is only defined when the up limit dominates
/// and the half-life only when the down limit does.
pub fn compute_metrics(
    mids: &[f64],
    p_ref: f64,
    up: i64,
    down: i64,
    fit_start_frac: f64,
) -> Metrics {
    let mut m = Metrics::default();
    match up_vs_down(up, down) {
        std::cmp::Ordering::Greater => m.lambda = divergence_rate(mids, fit_start_frac).ok(),
        std::cmp::Ordering::Less => m.t_half = half_life(mids, p_ref).ok(),
        std::cmp::Ordering::Equal => {}
    }
    let Ok((r, v)) = returns_and_volatility(mids) else {
        return m;
    };
    m.mean_return = Some(r.iter().sum::<f64>() / r.len() as f64);
    if let Ok(tail) = fit_power_law_tail(&v) {
        m.alpha = Some(tail.alpha);
        m.x_min = Some(tail.x_min);
    }
    if let Ok(d) = dma_hurst(&r, DmaOptions::default()) {
        m.h_r = Some(d.hurst);
        m.h_r_err = Some(d.stderr);
    }
    if let Ok(d) = dma_hurst(&v, DmaOptions::default()) {
        m.h_v = Some(d.hurst);
        m.h_v_err = Some(d.stderr);
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub phi_up: i64,
    pub phi_down: i64,
    pub seed: u64,
    pub n_days: usize,
    pub metrics: Metrics,
    pub lower_bound: f64,
    pub truncated: bool,
    pub events: u64,
    pub transactions: usize,
}

pub fn sim_config(cfg: &Config, up: i64, down: i64, seed: u64) -> SimConfig {
    let mut params = cfg.params.clone();
    params.seed = seed;
    let mut sc = SimConfig::new(params, cfg.run.days, up as f64 / 1e6, down as f64 / 1e6);
    sc.initial_price = cfg.run.initial_price;
    sc.tick = cfg.run.tick;
    sc.overnight = cfg.run.overnight;
    sc.open_depth = cfg.run.open_depth;
    sc
}

pub fn run_cell(cfg: &Config, up: i64, down: i64, seed: u64) -> Result<SweepRow, CliError> {
    let sc = sim_config(cfg, up, down, seed);
    let res = run_simulation(&sc).map_err(|e| CliError::Config(e.to_string()))?;
    let mids = res.mid_ticks();
    let metrics = compute_metrics(
        &mids,
        sc.initial_price as f64,
        up,
        down,
        cfg.run.fit_start_frac,
    );
    Ok(SweepRow {
        phi_up: up,
        phi_down: down,
        seed,
        n_days: res.days.len(),
        metrics,
        lower_bound: lower_bound(sc.phi_down, sc.tick),
        truncated: res.truncated,
        events: res.event_count(),
        transactions: res.mids.len(),
    })
}

/// Seeds used for a sweep: `params.seed`, `params.seed + 1`, ...
pub fn seeds(cfg: &Config) -> Vec<u64> {
    (0..cfg.run.seeds).map(|k| cfg.params.seed + k).collect()
}

/// Run every `(phi_up, phi_down, seed)` cell; rows are ordered by that key
/// whatever the completion order.
pub fn run_sweep(cfg: &Config, ups: &Grid, downs: &Grid) -> Result<Vec<SweepRow>, CliError> {
    let mut cells = Vec::new();
    for &u in &ups.micros {
        for &d in &downs.micros {
            for s in seeds(cfg) {
                cells.push((u, d, s));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.workers)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(u, d, s)| run_cell(cfg, u, d, s))
            .collect()
    })
}

/// Per-cell averages over seeds, ignoring missing values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMean {
    pub phi_up: i64,
    pub phi_down: i64,
    pub metrics: Metrics,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn cell_means(rows: &[SweepRow]) -> Vec<CellMean> {
    let mut out: Vec<CellMean> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let key = (rows[start].phi_up, rows[start].phi_down);
        let end = start
            + rows[start..]
                .iter()
                .take_while(|r| (r.phi_up, r.phi_down) == key)
                .count();
        let g = &rows[start..end];
        let avg = |f: fn(&Metrics) -> Option<f64>| mean(g.iter().map(|r| f(&r.metrics)));
        out.push(CellMean {
            phi_up: key.0,
            phi_down: key.1,
            metrics: Metrics {
                lambda: avg(|m| m.lambda),
                t_half: avg(|m| m.t_half),
                alpha: avg(|m| m.alpha),
                x_min: avg(|m| m.x_min),
                mean_return: avg(|m| m.mean_return),
                h_r: avg(|m| m.h_r),
                h_r_err: avg(|m| m.h_r_err),
                h_v: avg(|m| m.h_v),
                h_v_err: avg(|m| m.h_v_err),
            },
        });
        start = end;
    }
    out
}

/// Subset of grid cells a regression is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    All,
    /// `phi_up > |phi_down|`
    UpDominant,
    /// `phi_up >= |phi_down|`
    UpOrEqual,
    /// `phi_up < |phi_down|`
    DownDominant,
    /// `phi_up <= |phi_down|`
    DownOrEqual,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::All => "all",
            Regime::UpDominant => "up_dominant",
            Regime::UpOrEqual => "up_or_equal",
            Regime::DownDominant => "down_dominant",
            Regime::DownOrEqual => "down_or_equal",
        }
    }

    pub fn contains(self, up: i64, down: i64) -> bool {
        use std::cmp::Ordering::*;
        let o = up_vs_down(up, down);
        match self {
            Regime::All => true,
            Regime::UpDominant => o == Greater,
            Regime::UpOrEqual => o != Less,
            Regime::DownDominant => o == Less,
            Regime::DownOrEqual => o != Greater,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Regression {
    pub quantity: &'static str,
    pub regime: Regime,
    pub n: usize,
    pub fit: Option<Ols>,
}

type Pick = fn(&Metrics) -> Option<f64>;

/// Quantity, regime pairs fitted by [`regressions`].
pub const REGRESSIONS: [(&str, Regime, Pick); 10] = [
    ("lambda", Regime::UpDominant, |m| m.lambda),
    ("t_half", Regime::DownDominant, |m| m.t_half),
    ("alpha", Regime::All, |m| m.alpha),
    ("alpha", Regime::DownDominant, |m| m.alpha),
    ("alpha", Regime::UpOrEqual, |m| m.alpha),
    ("mean_return", Regime::All, |m| m.mean_return),
    ("H_r", Regime::DownDominant, |m| m.h_r),
    ("H_r", Regime::UpDominant, |m| m.h_r),
    ("H_V", Regime::DownOrEqual, |m| m.h_v),
    ("H_V", Regime::UpDominant, |m| m.h_v),
];

/// Fit `y = c0 + c_up phi_up + c_down |phi_down|` for each quantity on the
/// per-cell means of its regime.
pub fn regressions(means: &[CellMean]) -> Vec<Regression> {
    REGRESSIONS
        .iter()
        .map(|&(quantity, regime, pick)| {
            let (mut y, mut up, mut down) = (Vec::new(), Vec::new(), Vec::new());
            for c in means
                .iter()
                .filter(|c| regime.contains(c.phi_up, c.phi_down))
            {
                if let Some(v) = pick(&c.metrics) {
                    y.push(v);
                    up.push(c.phi_up as f64 / 1e6);
                    down.push((c.phi_down as f64 / 1e6).abs());
                }
            }
            Regression {
                quantity,
                regime,
                n: y.len(),
                fit: ols2(&y, &up, &down).ok(),
            }
        })
        .collect()
}

pub const SWEEP_HEADER: [&str; 15] = [
    "phi_up",
    "phi_down",
    "seed",
    "n_days",
    "lambda",
    "t_half",
    "alpha",
    "x_min",
    "mean_return",
    "H_r",
    "H_r_err",
    "H_V",
    "H_V_err",
    "lower_bound",
    "truncated",
];

pub fn write_sweep<W: Write>(rows: &[SweepRow], w: &mut csv::Writer<W>) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(io)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            fmt_float(r.phi_up as f64 / 1e6),
            fmt_float(r.phi_down as f64 / 1e6),
            r.seed.to_string(),
            r.n_days.to_string(),
            fmt_opt(m.lambda),
            fmt_opt(m.t_half),
            fmt_opt(m.alpha),
            fmt_opt(m.x_min),
            fmt_opt(m.mean_return),
            fmt_opt(m.h_r),
            fmt_opt(m.h_r_err),
            fmt_opt(m.h_v),
            fmt_opt(m.h_v_err),
            fmt_float(r.lower_bound),
            r.truncated.to_string(),
        ])
        .map_err(io)?;
    }
    Ok(())
}

pub const REGRESSION_HEADER: [&str; 11] = [
    "quantity",
    "regime",
    "n",
    "intercept",
    "coef_up",
    "coef_down",
    "p_intercept",
    "p_up",
    "p_down",
    "adj_r2",
    "mse",
];

pub fn write_regressions<W: Write>(
    regs: &[Regression],
    w: &mut csv::Writer<W>,
) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(REGRESSION_HEADER).map_err(io)?;
    for r in regs {
        let mut rec = vec![
            r.quantity.to_string(),
            r.regime.name().to_string(),
            r.n.to_string(),
        ];
        match &r.fit {
            Some(f) => rec.extend(
                [
                    f.intercept,
                    f.coef_up,
                    f.coef_down,
                    f.p_values[0],
                    f.p_values[1],
                    f.p_values[2],
                    f.adj_r2,
                    f.mse,
                ]
                .map(fmt_float),
            ),
            None => rec.extend(std::iter::repeat(String::new()).take(8)),
        }
        w.write_record(&rec).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert!(Regime::UpDominant.contains(100_000, -50_000));
        assert!(!Regime::UpDominant.contains(100_000, -100_000));
        assert!(Regime::UpOrEqual.contains(100_000, -100_000));
        assert!(Regime::DownDominant.contains(50_000, -100_000));
        assert!(Regime::DownOrEqual.contains(100_000, -100_000));
        assert!(!Regime::DownOrEqual.contains(150_000, -100_000));
    }

    #[test]
    fn metrics_regime_gating() {
        let up: Vec<f64> = (0..5000)
            .map(|t| 1000.0 * (1e-4 * t as f64).exp() + (t % 3) as f64)
            .collect();
        let m = compute_metrics(&up, 1000.0, 100_000, -50_000, 0.1);
        assert!(m.lambda.unwrap() > 0.0);
        assert!(m.t_half.is_none());
        let down: Vec<f64> = (0..5000)
            .map(|t| 1000.0 * (-1e-3 * t as f64).exp() + (t % 3) as f64)
            .collect();
        let m = compute_metrics(&down, 1000.0, 50_000, -100_000, 0.1);
        assert!(m.lambda.is_none());
        assert!(m.t_half.is_some());
    }
}
