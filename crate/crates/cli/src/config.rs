use std::fs;
use std::path::Path;

use lobsim_core::simulator::Overnight;
use lobsim_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Inclusive arithmetic grid `start:end:step`, held in millionths so that
/// grid points compare exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub micros: Vec<i64>,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        self.micros.iter().map(|&m| m as f64 / 1e6).collect()
    }
}

fn parse_micros(s: &str) -> Result<i64, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(CliError::Config(format!("not finite: {s:?}")));
    }
    Ok((v * 1e6).round() as i64)
}

impl std::str::FromStr for Grid {
    type Err = CliError;

    /// Parse `a:b:step` or a single value.
    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let micros = match parts.as_slice() {
            [v] => vec![parse_micros(v)?],
            [a, b, step] => {
                let (a, b, step) = (parse_micros(a)?, parse_micros(b)?, parse_micros(step)?);
                if step <= 0 || b < a {
                    return Err(CliError::Config(format!(
                        "grid {s:?} needs start <= end and step > 0"
                    )));
                }
                (0..)
                    .map(|k| a + k * step)
                    .take_while(|&v| v <= b)
                    .collect()
            }
            _ => {
                return Err(CliError::Config(format!(
                    "grid {s:?} is not of the form start:end:step"
                )))
            }
        };
        Ok(Grid { micros })
    }
}

/// Run settings that are not model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub days: usize,
    pub seeds: u64,
    pub phi_up: String,
    pub phi_down: String,
    /// Initial price in ticks.
    pub initial_price: i64,
    pub tick: f64,
    /// Leading fraction of each trajectory skipped when fitting growth rates.
    pub fit_start_frac: f64,
    /// Worker threads for sweeps; 0 uses every available core.
    pub workers: usize,
    /// `clear` expires resting orders at each close; `carry` keeps the
    /// ones still inside the next day's band.
    pub overnight: Overnight,
    /// Resting orders restored per side at each open.
    pub open_depth: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            days: 250,
            seeds: 3,
            phi_up: "0.05:0.30:0.05".into(),
            phi_down: "-0.30:-0.05:0.05".into(),
            initial_price: 1000,
            tick: 0.01,
            fit_start_frac: 0.1,
            workers: 0,
            overnight: Overnight::Clear,
            open_depth: 2,
        }
    }
}

/// Contents of a `--config` file: a `[run]` table and a `[params]` table,
/// both optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunSettings,
    pub params: ModelParams,
}

impl Config {
    pub fn from_toml_str(s: &str) -> Result<Self, CliError> {
        let cfg: Config = toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.params
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn phi_up_grid(&self) -> Result<Grid, CliError> {
        self.run.phi_up.parse()
    }

    pub fn phi_down_grid(&self) -> Result<Grid, CliError> {
        self.run.phi_down.parse()
    }
}
