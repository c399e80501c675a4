//! Order-flow ingredients: directions, relative prices, sizes and
//! cancellation targets.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lob::{OrderBook, Side};
use crate::rng::{day_stream, SimRng, Stream};
use crate::scalar::Real;
use crate::stochproc::{
    impose_long_memory_with, sample_cancel_level, sample_cancel_position, signs_from_fgn,
    EmpiricalCdf, FgnGenerator, StochError,
};

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("invalid parameter {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Stoch(#[from] StochError),
    #[error("reading parameters: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing parameters: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("writing parameters: {0}")]
    Serialize(#[from] toml::ser::Error),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ParamsError {
    ParamsError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Mean order size and dispersion ratio as piecewise-linear functions of the
/// relative price, constant beyond the outermost breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeCurve {
    pub breakpoints: Vec<f64>,
    pub mean_size: Vec<f64>,
    pub beta: Vec<f64>,
}

impl SizeCurve {
    pub fn new(
        breakpoints: Vec<f64>,
        mean_size: Vec<f64>,
        beta: Vec<f64>,
    ) -> Result<Self, ParamsError> {
        let curve = Self {
            breakpoints,
            mean_size,
            beta,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let n = self.breakpoints.len();
        if n == 0 || self.mean_size.len() != n || self.beta.len() != n {
            return Err(invalid(
                "size_curve",
                "breakpoints, mean_size and beta must be non-empty and equal length",
            ));
        }
        if self.breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid(
                "size_curve",
                "breakpoints must be strictly increasing",
            ));
        }
        if self.breakpoints.iter().any(|x| !(-1.0..=1.0).contains(x)) {
            return Err(invalid("size_curve", "breakpoints must lie in [-1, 1]"));
        }
        if self.mean_size.iter().any(|&v| !(v > 0.0)) {
            return Err(invalid("size_curve", "mean sizes must be positive"));
        }
        if self.beta.iter().any(|&b| !(b >= 0.0)) {
            return Err(invalid("size_curve", "beta must be non-negative"));
        }
        Ok(())
    }

    fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let xs = &self.breakpoints;
        if x <= xs[0] {
            return values[0];
        }
        if x >= xs[xs.len() - 1] {
            return values[values.len() - 1];
        }
        let i = xs.partition_point(|&b| b <= x);
        let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        values[i - 1] + t * (values[i] - values[i - 1])
    }

    pub fn mean_at(&self, x: f64) -> f64 {
        self.interpolate(&self.mean_size, x)
    }

    pub fn beta_at(&self, x: f64) -> f64 {
        self.interpolate(&self.beta, x)
    }
}

impl Default for SizeCurve {
    /// Flat for limit orders, a steep rise through `x = 0` and flat again
    /// for aggressive market orders; constant dispersion ratio.
    fn default() -> Self {
        Self {
            breakpoints: vec![-0.05, 0.2],
            mean_size: vec![1500.0, 4000.0],
            beta: vec![1.5, 1.5],
        }
    }
}

/// Location `(mu, sigma)` of the relative level and exponent `gamma` of the
/// relative queue position of cancelled orders on one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancelParams {
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
}

impl CancelParams {
    pub const BUY: CancelParams = CancelParams {
        mu: -2.36,
        sigma: 1.13,
        gamma: -33.78,
    };
    pub const SELL: CancelParams = CancelParams {
        mu: -2.49,
        sigma: 1.52,
        gamma: -36.57,
    };

    fn validate(&self, field: &'static str) -> Result<(), ParamsError> {
        if !self.mu.is_finite() {
            return Err(invalid(field, "mu must be finite"));
        }
        if !(self.sigma > 0.0) {
            return Err(invalid(field, "sigma must be positive"));
        }
        if !(self.gamma < 0.0) {
            return Err(invalid(field, "gamma must be negative"));
        }
        Ok(())
    }
}

/// Every generator parameter of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Hurst exponent of order directions.
    pub h_s: f64,
    /// Hurst exponent of relative prices.
    pub h_x: f64,
    /// Per-step cancellation probability.
    pub cancel_prob: f64,
    /// Probability that a cancellation targets the buy side.
    pub cancel_side_bias: f64,
    pub steps_per_day: usize,
    pub seed: u64,
    pub cancel_buy: CancelParams,
    pub cancel_sell: CancelParams,
    pub size_curve: SizeCurve,
    pub price_cdf: EmpiricalCdf<f64>,
}

/// Default relative-price distribution.
///
/// About 28% of the mass is marketable (`x >= 0`), and nearly all of it is
/// priced within half a step of the opposite best, so most market orders
/// take only the top level. Limit orders are spread widely across the
/// band, with a 10% atom at the far limit. Support points sit on half-step offsets of a 0.01 grid so
/// that most mass stays resolvable at one tick per 0.01 of relative price.
pub fn default_price_cdf() -> EmpiricalCdf<f64> {
    const TABLE: &[(f64, f64)] = &[
        (-1.0, 0.10),
        (-0.5, 0.20),
        (-0.2, 0.30),
        (-0.1, 0.40),
        (-0.055, 0.47),
        (-0.025, 0.56),
        (-0.015, 0.61),
        (-0.005, 0.717),
        (0.005, 0.97),
        (0.015, 0.985),
        (0.055, 0.993),
        (0.2, 0.997),
        (0.995, 0.999),
        (1.0, 1.0),
    ];
    let (x, f) = TABLE.iter().copied().unzip();
    EmpiricalCdf::new(x, f).expect("default cdf is valid")
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            h_s: 0.895,
            h_x: 0.847,
            cancel_prob: 0.19,
            cancel_side_bias: 0.5,
            steps_per_day: 20_000,
            seed: 1,
            cancel_buy: CancelParams::BUY,
            cancel_sell: CancelParams::SELL,
            size_curve: SizeCurve::default(),
            price_cdf: default_price_cdf(),
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        for (field, h) in [("h_s", self.h_s), ("h_x", self.h_x)] {
            if !(h > 0.0 && h < 1.0) {
                return Err(invalid(field, format!("{h} outside (0, 1)")));
            }
        }
        if !(0.0..1.0).contains(&self.cancel_prob) {
            return Err(invalid(
                "cancel_prob",
                format!("{} outside [0, 1)", self.cancel_prob),
            ));
        }
        if !(0.0..=1.0).contains(&self.cancel_side_bias) {
            return Err(invalid("cancel_side_bias", "must lie in [0, 1]"));
        }
        if self.steps_per_day < 2 {
            return Err(invalid("steps_per_day", "must be at least 2"));
        }
        self.cancel_buy.validate("cancel_buy")?;
        self.cancel_sell.validate("cancel_sell")?;
        self.size_curve.validate()?;
        Ok(())
    }

    pub fn cancel_params(&self, side: Side) -> CancelParams {
        match side {
            Side::Buy => self.cancel_buy,
            Side::Sell => self.cancel_sell,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, ParamsError> {
        let p: Self = toml::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml_string(&self) -> Result<String, ParamsError> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self, ParamsError> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), ParamsError> {
        fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

/// Directions and relative prices for one trading day.
#[derive(Debug, Clone)]
pub struct DayStreams {
    pub signs: Vec<i8>,
    pub rel_prices: Vec<f64>,
    /// The relative prices before rank reordering.
    pub raw_prices: Vec<f64>,
}

/// Produces each day's order-flow streams; the fGn embeddings are built once.
pub struct OrderFlow {
    params: ModelParams,
    sign_noise: FgnGenerator<f64>,
    price_noise: FgnGenerator<f64>,
}

impl OrderFlow {
    pub fn new(params: ModelParams) -> Result<Self, ParamsError> {
        params.validate()?;
        let n = params.steps_per_day;
        Ok(Self {
            sign_noise: FgnGenerator::new(n, params.h_s)?,
            price_noise: FgnGenerator::new(n, params.h_x)?,
            params,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Streams for `day`, deterministic in `(seed, day)`.
    pub fn day_streams(&self, day: u64) -> DayStreams {
        let seed = self.params.seed;
        let signs = signs_from_fgn(
            &self
                .sign_noise
                .sample(&mut day_stream(seed, day, Stream::Signs))
                .values,
        );
        let mut draws = day_stream(seed, day, Stream::PriceDraws);
        let raw_prices: Vec<f64> = (0..self.params.steps_per_day)
            .map(|_| self.params.price_cdf.sample(f64::unit_uniform(&mut draws)))
            .collect();
        let rel_prices = impose_long_memory_with(
            &raw_prices,
            &self.price_noise,
            &mut day_stream(seed, day, Stream::PriceNoise),
        );
        DayStreams {
            signs,
            rel_prices,
            raw_prices,
        }
    }
}

/// Convenience wrapper around [`OrderFlow::day_streams`].
pub fn generate_day_streams(params: &ModelParams, day: u64) -> Result<DayStreams, ParamsError> {
    Ok(OrderFlow::new(params.clone())?.day_streams(day))
}

/// Order size for relative price `x`: normal with mean `<v(x)>` and standard
/// deviation `beta(x) <v(x)>`, rounded and floored at one share.
pub fn generate_size<R: Rng + ?Sized>(x: f64, curve: &SizeCurve, rng: &mut R) -> u64 {
    let mean = curve.mean_at(x);
    let sd = curve.beta_at(x) * mean;
    size_from_normal(mean + sd * f64::standard_normal(rng))
}

pub(crate) fn size_from_normal(v: f64) -> u64 {
    let r = v.round();
    if r < 1.0 {
        1
    } else {
        r as u64
    }
}

/// Book position targeted by a cancellation, both indices 1-based from the
/// best level and the earliest order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CancelTarget {
    pub side: Side,
    pub level_index: usize,
    pub queue_index: usize,
}

/// Index `ceil(frac * len)` clamped to `[1, len]`.
pub fn scaled_index(frac: f64, len: usize) -> usize {
    ((frac * len as f64).ceil() as usize).clamp(1, len.max(1))
}

/// Cancellation outcome of one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CancelDecision {
    None,
    /// A cancellation fired but the chosen side holds two or fewer orders.
    Skipped(Side),
    Cancel(CancelTarget),
}

/// Decide whether this step cancels an order, and which one.
pub fn maybe_cancel<R: Rng + ?Sized>(
    params: &ModelParams,
    book: &OrderBook,
    rng: &mut R,
) -> CancelDecision {
    if params.cancel_prob <= 0.0 || rng.random::<f64>() >= params.cancel_prob {
        return CancelDecision::None;
    }
    let side = if rng.random::<f64>() < params.cancel_side_bias {
        Side::Buy
    } else {
        Side::Sell
    };
    if book.order_count(side) <= 2 {
        return CancelDecision::Skipped(side);
    }
    let cp = params.cancel_params(side);
    let x = sample_cancel_level(cp.mu, cp.sigma, rng).expect("validated sigma");
    let y = sample_cancel_position(cp.gamma, rng).expect("validated gamma");
    let level_index = scaled_index(x, book.level_count(side));
    let queue_len = book
        .queue_len(side, level_index)
        .expect("level index in range");
    CancelDecision::Cancel(CancelTarget {
        side,
        level_index,
        queue_index: scaled_index(y, queue_len),
    })
}

/// RNG handed to the per-step size and cancellation draws of `day`.
pub fn step_rngs(seed: u64, day: u64) -> (SimRng, SimRng) {
    (
        day_stream(seed, day, Stream::Sizes),
        day_stream(seed, day, Stream::Cancels),
    )
}
