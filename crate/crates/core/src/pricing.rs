//! Relative prices, daily price limits and the closing-price rule.
//!
//! A relative price `x` in `[-1, 1]` measures aggressiveness against the
//! opposite best quote, normalised by the distance to the day's limit on the
//! relevant side. `x = 0` is an order at the opposite best, `x = 1` a buy at
//! the up limit (or a sell at the down limit), `x = -1` a buy at the down
//! limit (or a sell at the up limit).
//!
//! Limits and closes are computed in exact integer arithmetic: limit factors
//! are carried in millionths so that e.g. `0.85 * 10` rounds to 9 and not 8.

use thiserror::Error;

use crate::lob::{MidPrice, Side, Ticks};

/// Default currency value of one tick.
pub const TICK: f64 = 0.01;

/// Number of trailing mid prices averaged into the closing price.
pub const CLOSING_WINDOW: usize = 100;

const MICROS: i128 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PricingError {
    #[error("no mid prices recorded during the day")]
    EmptyMidLog,
    #[error("invalid price limits: {0}")]
    Limits(String),
}

/// Round to the nearest integer, halves upward.
pub fn round_half_up(v: f64) -> Ticks {
    (v + 0.5).floor() as Ticks
}

/// Convert a fractional limit such as `-0.15` to millionths.
pub fn to_micros(phi: f64) -> i64 {
    (phi * 1e6).round() as i64
}

/// `round_half_up(p * (1 + phi))` without floating point error.
fn scale_price(p: Ticks, phi: f64) -> Ticks {
    let num = 2 * p as i128 * (MICROS + to_micros(phi) as i128) + MICROS;
    num.div_euclid(2 * MICROS) as Ticks
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceLimits {
    pub p_max: Ticks,
    pub p_min: Ticks,
    pub phi_up: f64,
    pub phi_down: f64,
    pub tick: f64,
}

impl PriceLimits {
    pub fn new(
        p_min: Ticks,
        p_max: Ticks,
        phi_up: f64,
        phi_down: f64,
        tick: f64,
    ) -> Result<Self, PricingError> {
        if p_min < 1 || p_min > p_max {
            return Err(PricingError::Limits(format!(
                "need 1 <= p_min <= p_max, got [{p_min}, {p_max}]"
            )));
        }
        Ok(Self {
            p_max,
            p_min,
            phi_up,
            phi_down,
            tick,
        })
    }

    pub fn contains(&self, p: Ticks) -> bool {
        (self.p_min..=self.p_max).contains(&p)
    }

    pub fn clamp(&self, p: Ticks) -> Ticks {
        p.clamp(self.p_min, self.p_max)
    }
}

/// Limits for the next day from the closing price `close`.
pub fn roll_day(close: Ticks, phi_up: f64, phi_down: f64, tick: f64) -> PriceLimits {
    let close = close.max(1);
    let p_max = scale_price(close, phi_up).max(1);
    let p_min = scale_price(close, phi_down).max(1).min(p_max);
    PriceLimits {
        p_max,
        p_min,
        phi_up,
        phi_down,
        tick,
    }
}

/// Order price for relative price `x` against the current quotes.
///
/// Buys are measured from the best ask, sells from the best bid. When the
/// quote already sits on a limit the corresponding branch collapses to that
/// limit. The result is rounded to a tick and clamped into the band.
pub fn price_from_relative(
    x: f64,
    side: Side,
    best_bid: Ticks,
    best_ask: Ticks,
    limits: &PriceLimits,
) -> Ticks {
    let (lo, hi) = (limits.p_min as f64, limits.p_max as f64);
    let raw = match side {
        Side::Buy => {
            let a = best_ask as f64;
            if x >= 0.0 {
                a + x * (hi - a)
            } else {
                a + x * (a - lo)
            }
        }
        Side::Sell => {
            let b = best_bid as f64;
            if x >= 0.0 {
                b - x * (b - lo)
            } else {
                b - x * (hi - b)
            }
        }
    };
    limits.clamp(round_half_up(raw))
}

/// Relative price of an order at `p`, or `None` where the branch is
/// undefined (its denominator vanishes because the quote sits on a limit).
pub fn relative_from_price(
    p: Ticks,
    side: Side,
    is_marketable: bool,
    best_bid: Ticks,
    best_ask: Ticks,
    limits: &PriceLimits,
) -> Option<f64> {
    let (lo, hi) = (limits.p_min, limits.p_max);
    let (num, den) = match (side, is_marketable) {
        (Side::Sell, true) => (best_bid - p, best_bid - lo),
        (Side::Sell, false) => (best_bid - p, hi - best_bid),
        (Side::Buy, true) => (p - best_ask, hi - best_ask),
        (Side::Buy, false) => (p - best_ask, best_ask - lo),
    };
    if den <= 0 {
        return None;
    }
    Some((num as f64 / den as f64).clamp(-1.0, 1.0))
}

/// Closing price: mean of the last `window` mid prices, rounded half up to a
/// tick.
pub fn closing_price(mids: &[MidPrice], window: usize) -> Result<Ticks, PricingError> {
    if mids.is_empty() {
        return Err(PricingError::EmptyMidLog);
    }
    let tail = &mids[mids.len().saturating_sub(window.max(1))..];
    let k = tail.len() as i128;
    let half_ticks: i128 = tail.iter().map(|m| m.half_ticks() as i128).sum();
    // mean ticks = half_ticks / (2k); round half up.
    Ok((half_ticks + k).div_euclid(2 * k) as Ticks)
}

/// Price floor in ticks that a down-dominated trajectory cannot break: the
/// largest `b` with `0.5 < b |phi_down| <= 1.5`.
pub fn lower_bound_ticks(phi_down: f64) -> Ticks {
    let phi = to_micros(phi_down).unsigned_abs() as i128;
    assert!(phi > 0, "phi_down must be negative");
    let b = (3 * MICROS / 2) / phi;
    debug_assert!(2 * b * phi > MICROS);
    b.max(1) as Ticks
}

/// [`lower_bound_ticks`] in currency units.
pub fn lower_bound(phi_down: f64, tick: f64) -> f64 {
    lower_bound_ticks(phi_down) as f64 * tick
}

/// Per-day state of the price-formation loop.
#[derive(Debug, Clone)]
pub struct DayContext {
    pub day_index: u64,
    pub limits: PriceLimits,
    pub steps_per_day: usize,
    pub mid_log: Vec<MidPrice>,
    pub closing_window: usize,
}

impl DayContext {
    pub fn new(day_index: u64, limits: PriceLimits, steps_per_day: usize) -> Self {
        Self {
            day_index,
            limits,
            steps_per_day,
            mid_log: Vec::new(),
            closing_window: CLOSING_WINDOW,
        }
    }

    pub fn closing_price(&self) -> Result<Ticks, PricingError> {
        closing_price(&self.mid_log, self.closing_window)
    }
}
