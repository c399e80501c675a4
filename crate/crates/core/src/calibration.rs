//! Parameter estimation from order-event streams.
//!
//! Events are replayed through an order book with the same daily limits and
//! matching rules as the simulator. The replay recovers the sign and
//! relative-price series, size statistics and the book positions of
//! cancelled orders, and histogram least-squares fits turn those into
//! [`ModelParams`].

use std::collections::HashMap;
use std::io::{Read, Write};

use argmin::core::{CostFunction, Executor};
use argmin::solver::brent::BrentOpt;
use argmin::solver::neldermead::NelderMead;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::lob::{LobError, MidPrice, Order, OrderBook, Side, Ticks};
use crate::orderflow::{CancelParams, ModelParams, SizeCurve};
use crate::pricing::{
    closing_price, relative_from_price, roll_day, PriceLimits, CLOSING_WINDOW, TICK,
};
use crate::simulator::Overnight;
use crate::stats::{dma_hurst, DmaOptions, StatsError};
use crate::stochproc::{EmpiricalCdf, StochError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "B")]
    PlaceBuy,
    #[serde(rename = "S")]
    PlaceSell,
    #[serde(rename = "C")]
    Cancel,
}

/// One placement or cancellation. For placements `order_ref` is the new
/// order's id, for cancellations the id of the cancelled order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderEvent {
    pub timestamp: u64,
    pub kind: EventKind,
    pub price: Ticks,
    pub size: u64,
    pub order_ref: u64,
}

impl OrderEvent {
    pub fn place(order: &Order, timestamp: u64) -> Self {
        Self {
            timestamp,
            kind: match order.side {
                Side::Buy => EventKind::PlaceBuy,
                Side::Sell => EventKind::PlaceSell,
            },
            price: order.price,
            size: order.size,
            order_ref: order.id,
        }
    }

    pub fn cancel(order: &Order, timestamp: u64) -> Self {
        Self {
            timestamp,
            kind: EventKind::Cancel,
            price: order.price,
            size: order.size,
            order_ref: order.id,
        }
    }
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("event {index}: {reason}")]
    Replay { index: usize, reason: String },
    #[error("{what}: need at least {needed} samples, got {got}")]
    TooFew {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("degenerate histogram: {0}")]
    Degenerate(String),
    #[error("fit did not converge: {0}")]
    NoConvergence(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Stoch(#[from] StochError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub fn write_events<W: Write>(events: &[OrderEvent], w: W) -> Result<(), CalibrationError> {
    let mut wtr = csv::Writer::from_writer(w);
    for e in events {
        wtr.serialize(e)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_events<R: Read>(r: R) -> Result<Vec<OrderEvent>, CalibrationError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOptions {
    pub phi_up: f64,
    pub phi_down: f64,
    /// Timestamps per trading day; day `d` covers `[d * len, (d + 1) * len)`.
    pub day_length: u64,
    /// Close preceding the first day. Defaults to the first event's price.
    pub initial_close: Option<Ticks>,
    /// Resting orders protected on the side opposite a marketable order.
    /// 0 for exchange data, 2 for simulator output.
    pub min_resting: usize,
    /// Whether resting orders survive the day change.
    pub overnight: Overnight,
    pub tick: f64,
    pub size_bins: usize,
    pub hist_bins: usize,
    pub cdf_points: usize,
}

impl CalibrationOptions {
    pub fn new(phi_up: f64, phi_down: f64, day_length: u64) -> Self {
        Self {
            phi_up,
            phi_down,
            day_length,
            initial_close: None,
            min_resting: 0,
            overnight: Overnight::default(),
            tick: TICK,
            size_bins: 50,
            hist_bins: 50,
            cdf_points: 2000,
        }
    }
}

/// Series recovered by replaying an event stream.
#[derive(Debug, Clone, Default)]
pub struct ReplayData {
    pub signs: Vec<f64>,
    /// Relative prices of placements whose branch is defined.
    pub rel_prices: Vec<f64>,
    /// Sizes paired with `rel_prices`.
    pub sizes: Vec<u64>,
    /// Relative level and queue position of cancelled orders per side.
    pub cancel_levels: [Vec<f64>; 2],
    pub cancel_positions: [Vec<f64>; 2],
    pub placements: usize,
    pub cancellations: usize,
    pub mids: Vec<MidPrice>,
}

fn side_slot(side: Side) -> usize {
    match side {
        Side::Buy => 0,
        Side::Sell => 1,
    }
}

/// Level index, level count, queue index and queue length of a resting order.
fn locate(
    book: &OrderBook,
    side: Side,
    price: Ticks,
    id: u64,
) -> Option<(usize, usize, usize, usize)> {
    let levels = book.level_count(side);
    let (li, level) = book
        .levels(side)
        .enumerate()
        .find(|(_, l)| l.price() == price)?;
    let qi = level.orders().iter().position(|o| o.id == id)?;
    Some((li + 1, levels, qi + 1, level.len()))
}

/// Replay `events` through a book under daily price limits.
pub fn replay(
    events: &[OrderEvent],
    opts: &CalibrationOptions,
) -> Result<ReplayData, CalibrationError> {
    if opts.day_length == 0 {
        return Err(CalibrationError::Replay {
            index: 0,
            reason: "day length must be positive".into(),
        });
    }
    let mut data = ReplayData::default();
    let mut book = OrderBook::new();
    let mut resting: HashMap<u64, (Side, Ticks)> = HashMap::new();
    let mut close = opts
        .initial_close
        .or(events.first().map(|e| e.price))
        .unwrap_or(1)
        .max(1);
    let mut day: Option<u64> = None;
    let mut limits: PriceLimits = roll_day(close, opts.phi_up, opts.phi_down, opts.tick);
    let mut day_start = 0usize;
    let mut last_ts = 0u64;
    let mut trades = Vec::new();
    for (index, e) in events.iter().enumerate() {
        let fail = |reason: String| CalibrationError::Replay { index, reason };
        if e.timestamp < last_ts {
            return Err(fail("timestamps decrease".into()));
        }
        last_ts = e.timestamp;
        let d = e.timestamp / opts.day_length;
        if day != Some(d) {
            if day.is_some() {
                if let Ok(c) = closing_price(&data.mids[day_start..], CLOSING_WINDOW) {
                    close = c;
                }
                limits = roll_day(close, opts.phi_up, opts.phi_down, opts.tick);
            }
            let expired = match opts.overnight {
                Overnight::Carry => book.retain_within(limits.p_min, limits.p_max),
                Overnight::Clear => book.retain_within(Ticks::MAX, Ticks::MIN),
            };
            for o in expired {
                resting.remove(&o.id);
            }
            day = Some(d);
            day_start = data.mids.len();
        }
        match e.kind {
            EventKind::PlaceBuy | EventKind::PlaceSell => {
                let side = if e.kind == EventKind::PlaceBuy {
                    Side::Buy
                } else {
                    Side::Sell
                };
                let order = Order {
                    id: e.order_ref,
                    side,
                    price: e.price,
                    size: e.size,
                    arrival_step: e.timestamp,
                };
                data.placements += 1;
                data.signs.push(side.sign() as f64);
                let marketable = book.crosses(side, e.price);
                if let (Some(bid), Some(ask)) = (book.best_bid(), book.best_ask()) {
                    if let Some(x) =
                        relative_from_price(e.price, side, marketable, bid, ask, &limits)
                    {
                        data.rel_prices.push(x);
                        data.sizes.push(e.size);
                    }
                }
                if marketable {
                    trades.clear();
                    let summary = book
                        .execute_marketable_into(order, opts.min_resting, &mut trades)
                        .map_err(|err: LobError| fail(err.to_string()))?;
                    for t in &trades {
                        if book_lacks(&book, side.opposite(), t.price, t.maker_id) {
                            resting.remove(&t.maker_id);
                        }
                    }
                    if summary.posted > 0 {
                        resting.insert(order.id, (side, order.price));
                    }
                    if summary.executed > 0 {
                        if let Ok(m) = book.mid_price() {
                            data.mids.push(m);
                        }
                    }
                } else {
                    book.insert_limit(order)
                        .map_err(|err| fail(err.to_string()))?;
                    resting.insert(order.id, (side, order.price));
                }
            }
            EventKind::Cancel => {
                let &(side, price) = resting
                    .get(&e.order_ref)
                    .ok_or_else(|| fail(format!("cancel of unknown order {}", e.order_ref)))?;
                let (li, levels, qi, qlen) = locate(&book, side, price, e.order_ref)
                    .ok_or_else(|| fail("order not in book".into()))?;
                book.cancel_order(side, price, e.order_ref)
                    .map_err(|err| fail(err.to_string()))?;
                resting.remove(&e.order_ref);
                data.cancellations += 1;
                let s = side_slot(side);
                data.cancel_levels[s].push(li as f64 / levels as f64);
                data.cancel_positions[s].push(qi as f64 / qlen as f64);
            }
        }
    }
    Ok(data)
}

fn book_lacks(book: &OrderBook, side: Side, price: Ticks, id: u64) -> bool {
    locate(book, side, price, id).is_none()
}

/// Size curve from equal-population bins of `(x, size)` pairs.
pub fn fit_size_curve(
    xs: &[f64],
    sizes: &[u64],
    n_bins: usize,
) -> Result<SizeCurve, CalibrationError> {
    if xs.len() < n_bins.max(2) {
        return Err(CalibrationError::TooFew {
            what: "size curve",
            needed: n_bins.max(2),
            got: xs.len(),
        });
    }
    let mut pairs: Vec<(f64, f64)> = xs.iter().zip(sizes).map(|(&x, &v)| (x, v as f64)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for b in 0..n_bins {
        let chunk = &pairs[b * n / n_bins..(b + 1) * n / n_bins];
        if chunk.is_empty() {
            continue;
        }
        let mx = chunk.iter().map(|p| p.0).sum::<f64>() / chunk.len() as f64;
        let vs: Vec<f64> = chunk.iter().map(|p| p.1).collect();
        match groups.last_mut() {
            Some(last) if mx <= last.0 => last.1.extend(vs),
            _ => groups.push((mx, vs)),
        }
    }
    let mut bp = Vec::new();
    let mut mean = Vec::new();
    let mut beta = Vec::new();
    for (x, vs) in groups {
        let m = vs.iter().sum::<f64>() / vs.len() as f64;
        let var = vs.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vs.len() as f64;
        bp.push(x.clamp(-1.0, 1.0));
        mean.push(m.max(1.0));
        beta.push(var.sqrt() / m.max(1.0));
    }
    SizeCurve::new(bp, mean, beta).map_err(|e| CalibrationError::Degenerate(e.to_string()))
}

struct LognormalCost {
    /// Bin edges in log space and observed bin probabilities.
    edges: Vec<f64>,
    probs: Vec<f64>,
}

impl CostFunction for LognormalCost {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        let (mu, sigma) = (p[0], p[1]);
        if !(sigma > 1e-6) {
            return Ok(f64::MAX);
        }
        let norm = Normal::new(mu, sigma).map_err(argmin::core::Error::msg)?;
        // Mass on (0, 1] renormalises the truncated density.
        let z = norm.cdf(0.0);
        if !(z > 0.0) {
            return Ok(f64::MAX);
        }
        let mut sse = 0.0;
        for (w, h) in self.edges.windows(2).zip(&self.probs) {
            let m = (norm.cdf(w[1]) - norm.cdf(w[0])) / z;
            let dens = |q: f64| q / (w[1] - w[0]);
            sse += (dens(m) - dens(*h)).powi(2);
        }
        Ok(sse)
    }
}

/// Least-squares fit of a log-normal truncated to `(0, 1]` to a
/// log-spaced histogram of `samples`, returning `(mu, sigma)`.
pub fn fit_lognormal_hist(samples: &[f64], n_bins: usize) -> Result<(f64, f64), CalibrationError> {
    let logs: Vec<f64> = samples
        .iter()
        .filter(|v| **v > 0.0 && **v <= 1.0)
        .map(|v| v.ln())
        .collect();
    if logs.len() < 1000 {
        return Err(CalibrationError::TooFew {
            what: "cancel levels",
            needed: 1000,
            got: logs.len(),
        });
    }
    let n = logs.len() as f64;
    let m0 = logs.iter().sum::<f64>() / n;
    let s0 = (logs.iter().map(|v| (v - m0).powi(2)).sum::<f64>() / n).sqrt();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(CalibrationError::Degenerate("all samples equal".into()));
    }
    let bins = n_bins.max(2);
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| lo + width * k as f64).collect();
    let mut counts = vec![0.0; bins];
    for v in &logs {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1.0;
    }
    let probs = counts.iter().map(|c| c / n).collect();
    let cost = LognormalCost { edges, probs };
    let s0 = s0.max(1e-3);
    let simplex = vec![vec![m0, s0], vec![m0 + 0.1 * s0, s0], vec![m0, 1.1 * s0]];
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-12)
        .map_err(|e| CalibrationError::NoConvergence(e.to_string()))?;
    let res = Executor::new(cost, solver)
        .configure(|s| s.max_iters(2000))
        .run()
        .map_err(|e| CalibrationError::NoConvergence(e.to_string()))?;
    let best = res
        .state
        .best_param
        .ok_or_else(|| CalibrationError::NoConvergence("no parameters".into()))?;
    Ok((best[0], best[1].abs()))
}

/// Outcome of fitting the queue-position density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositionFit {
    Gamma(f64),
    /// The histogram is indistinguishable from uniform (`gamma < -100`).
    Flat(f64),
}

impl PositionFit {
    pub fn gamma(self) -> f64 {
        match self {
            PositionFit::Gamma(g) | PositionFit::Flat(g) => g,
        }
    }
}

/// `gamma` below which the position density counts as flat.
pub const FLAT_GAMMA: f64 = -100.0;

/// Cumulative mass of `(1 - e^(g y)) / z` on `[0, y]`.
fn position_cdf(y: f64, g: f64) -> f64 {
    let z = (g + 1.0 - g.exp()) / g;
    (y - (g * y).exp_m1() / g) / z
}

struct PositionCost {
    edges: Vec<f64>,
    probs: Vec<f64>,
}

impl CostFunction for PositionCost {
    type Param = f64;
    type Output = f64;

    fn cost(&self, t: &f64) -> Result<f64, argmin::core::Error> {
        let g = -t.exp();
        let mut sse = 0.0;
        for (w, h) in self.edges.windows(2).zip(&self.probs) {
            let m = position_cdf(w[1], g) - position_cdf(w[0], g);
            sse += ((m - h) / (w[1] - w[0])).powi(2);
        }
        Ok(sse)
    }
}

/// Least-squares fit of the position density `(1 - e^(gamma Y)) / z` to an
/// equal-width histogram of `samples` on `(0, 1]`.
pub fn fit_exp_position_hist(
    samples: &[f64],
    n_bins: usize,
) -> Result<PositionFit, CalibrationError> {
    let ys: Vec<f64> = samples
        .iter()
        .copied()
        .filter(|v| *v > 0.0 && *v <= 1.0)
        .collect();
    if ys.len() < 1000 {
        return Err(CalibrationError::TooFew {
            what: "cancel positions",
            needed: 1000,
            got: ys.len(),
        });
    }
    let bins = n_bins.max(2);
    let mut counts = vec![0.0; bins];
    for y in &ys {
        counts[((y * bins as f64).ceil() as usize).clamp(1, bins) - 1] += 1.0;
    }
    let n = ys.len() as f64;
    let cost = PositionCost {
        edges: (0..=bins).map(|k| k as f64 / bins as f64).collect(),
        probs: counts.iter().map(|c| c / n).collect(),
    };
    // Search ln(-gamma) in [ln 0.01, ln 1e4].
    let solver = BrentOpt::new((0.01f64).ln(), (1e4f64).ln());
    let res = Executor::new(cost, solver)
        .configure(|s| s.param(3.0).max_iters(200))
        .run()
        .map_err(|e| CalibrationError::NoConvergence(e.to_string()))?;
    let t = res
        .state
        .best_param
        .ok_or_else(|| CalibrationError::NoConvergence("no parameter".into()))?;
    let g = -t.exp();
    Ok(if g < FLAT_GAMMA {
        PositionFit::Flat(g)
    } else {
        PositionFit::Gamma(g)
    })
}

#[derive(Debug, Clone)]
pub struct Calibration {
    pub params: ModelParams,
    pub h_s_stderr: f64,
    pub h_x_stderr: f64,
    pub placements: usize,
    pub cancellations: usize,
    /// Sides (buy, sell) whose cancellation fits fell back to the defaults
    /// for lack of data.
    pub cancel_defaults: [bool; 2],
    pub positions: [Option<PositionFit>; 2],
}

fn fit_cancel_side(
    levels: &[f64],
    positions: &[f64],
    bins: usize,
) -> Option<(CancelParams, PositionFit)> {
    let (mu, sigma) = fit_lognormal_hist(levels, bins).ok()?;
    let pos = fit_exp_position_hist(positions, bins).ok()?;
    Some((
        CancelParams {
            mu,
            sigma,
            gamma: pos.gamma(),
        },
        pos,
    ))
}

/// Estimate every model parameter from an event stream.
pub fn estimate_params(
    events: &[OrderEvent],
    opts: &CalibrationOptions,
) -> Result<Calibration, CalibrationError> {
    let data = replay(events, opts)?;
    estimate_from_replay(&data, opts)
}

pub fn estimate_from_replay(
    data: &ReplayData,
    opts: &CalibrationOptions,
) -> Result<Calibration, CalibrationError> {
    let dma = DmaOptions::default();
    let hs = dma_hurst(&data.signs, dma)?;
    let hx = dma_hurst(&data.rel_prices, dma)?;
    let price_cdf = EmpiricalCdf::from_samples(&data.rel_prices, opts.cdf_points)?;
    let size_curve = fit_size_curve(&data.rel_prices, &data.sizes, opts.size_bins)?;
    let cancel_prob = if data.placements == 0 {
        0.0
    } else {
        data.cancellations as f64 / data.placements as f64
    };
    let mut cancel = [CancelParams::BUY, CancelParams::SELL];
    let mut defaults = [true, true];
    let mut positions = [None, None];
    for s in 0..2 {
        if let Some((cp, pos)) = fit_cancel_side(
            &data.cancel_levels[s],
            &data.cancel_positions[s],
            opts.hist_bins,
        ) {
            cancel[s] = cp;
            defaults[s] = false;
            positions[s] = Some(pos);
        }
    }
    let clamp_h = |h: f64| h.clamp(0.01, 0.99);
    let params = ModelParams {
        h_s: clamp_h(hs.hurst),
        h_x: clamp_h(hx.hurst),
        cancel_prob: cancel_prob.min(0.999),
        cancel_side_bias: if data.cancellations == 0 {
            0.5
        } else {
            data.cancel_levels[0].len() as f64 / data.cancellations as f64
        },
        steps_per_day: (opts.day_length as usize).max(2),
        seed: 1,
        cancel_buy: cancel[0],
        cancel_sell: cancel[1],
        size_curve,
        price_cdf,
    };
    Ok(Calibration {
        params,
        h_s_stderr: hs.stderr,
        h_x_stderr: hx.stderr,
        placements: data.placements,
        cancellations: data.cancellations,
        cancel_defaults: defaults,
        positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::stochproc::{sample_cancel_level, sample_cancel_position};

    #[test]
    fn lognormal_round_trip() {
        let mut rng = seeded(11);
        let xs: Vec<f64> = (0..200_000)
            .map(|_| sample_cancel_level(-2.36, 1.13, &mut rng).unwrap())
            .collect();
        let (mu, sigma) = fit_lognormal_hist(&xs, 50).unwrap();
        assert!((mu + 2.36).abs() < 0.05, "mu {mu}");
        assert!((sigma - 1.13).abs() < 0.05, "sigma {sigma}");
    }

    #[test]
    fn lognormal_point_mass() {
        let mut rng = seeded(12);
        let xs: Vec<f64> = (0..20_000)
            .map(|_| sample_cancel_level(-2.0, 0.01, &mut rng).unwrap())
            .collect();
        let (mu, sigma) = fit_lognormal_hist(&xs, 50).unwrap();
        assert!((mu + 2.0).abs() < 0.01);
        assert!(sigma < 0.05);
    }

    #[test]
    fn position_round_trip() {
        let mut rng = seeded(13);
        let ys: Vec<f64> = (0..200_000)
            .map(|_| sample_cancel_position(-33.78, &mut rng).unwrap())
            .collect();
        let g = fit_exp_position_hist(&ys, 50).unwrap();
        assert!(matches!(g, PositionFit::Gamma(_)));
        assert!((g.gamma() + 33.78).abs() < 3.378, "gamma {g:?}");
    }

    #[test]
    fn uniform_positions_are_flat() {
        use rand::Rng;
        let mut rng = seeded(14);
        let ys: Vec<f64> = (0..100_000).map(|_| 1.0 - rng.random::<f64>()).collect();
        assert!(matches!(
            fit_exp_position_hist(&ys, 50).unwrap(),
            PositionFit::Flat(_)
        ));
    }

    #[test]
    fn event_csv_round_trip() {
        let events = vec![
            OrderEvent {
                timestamp: 0,
                kind: EventKind::PlaceBuy,
                price: 999,
                size: 100,
                order_ref: 1,
            },
            OrderEvent {
                timestamp: 0,
                kind: EventKind::PlaceSell,
                price: 1001,
                size: 50,
                order_ref: 2,
            },
            OrderEvent {
                timestamp: 3,
                kind: EventKind::Cancel,
                price: 999,
                size: 100,
                order_ref: 1,
            },
        ];
        let mut buf = Vec::new();
        write_events(&events, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("timestamp,kind,price,size,order_ref\n0,B,999,100,1\n"));
        assert_eq!(read_events(buf.as_slice()).unwrap(), events);
    }

    #[test]
    fn unknown_cancel_reports_index() {
        let events = vec![
            OrderEvent {
                timestamp: 0,
                kind: EventKind::PlaceBuy,
                price: 999,
                size: 100,
                order_ref: 1,
            },
            OrderEvent {
                timestamp: 1,
                kind: EventKind::Cancel,
                price: 999,
                size: 100,
                order_ref: 7,
            },
        ];
        let err = replay(&events, &CalibrationOptions::new(0.1, -0.1, 100)).unwrap_err();
        assert!(matches!(err, CalibrationError::Replay { index: 1, .. }));
    }

    #[test]
    fn no_cancels_means_zero_rate() {
        let mut events = Vec::new();
        let mut id = 0;
        for t in 0..3000u64 {
            id += 1;
            let (kind, price) = if t % 2 == 0 {
                (EventKind::PlaceBuy, 990 - (t % 7) as i64)
            } else {
                (EventKind::PlaceSell, 1010 + (t % 5) as i64)
            };
            events.push(OrderEvent {
                timestamp: t,
                kind,
                price,
                size: 100,
                order_ref: id,
            });
        }
        let data = replay(&events, &CalibrationOptions::new(0.1, -0.1, 10_000)).unwrap();
        assert_eq!(data.cancellations, 0);
        assert_eq!(data.placements, 3000);
    }
}
