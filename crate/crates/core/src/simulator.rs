//! Multi-day price formation: placement, matching, cancellation and the
//! overnight rollover of price limits.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::OrderEvent;
use crate::lob::{MidPrice, Order, OrderBook, Side, Ticks, Trade};
use crate::orderflow::{
    generate_size, maybe_cancel, step_rngs, CancelDecision, ModelParams, OrderFlow, ParamsError,
};
use crate::pricing::{
    closing_price, price_from_relative, roll_day, PriceLimits, CLOSING_WINDOW, TICK,
};

/// Resting orders kept on the side opposite an incoming marketable order.
pub const MIN_RESTING: usize = 2;

/// Closing prices above this many ticks end the run early; exponentially
/// diverging trajectories would otherwise overflow integer prices.
pub const DEFAULT_PRICE_CAP: Ticks = 1_000_000_000_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("invalid simulation config: {0}")]
    Config(String),
}

/// Treatment of resting orders between trading days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overnight {
    /// Orders expire at the close; each day opens on a freshly seeded book.
    #[default]
    Clear,
    /// Orders carry over; those outside the new band are cancelled.
    Carry,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: ModelParams,
    pub n_days: usize,
    pub phi_up: f64,
    pub phi_down: f64,
    pub initial_price: Ticks,
    pub tick: f64,
    pub price_cap: Ticks,
    pub overnight: Overnight,
    /// Resting orders restored per side at each open, one per tick moving
    /// away from the previous close.
    pub open_depth: usize,
    pub record_trades: bool,
    pub record_events: bool,
}

impl SimConfig {
    pub fn new(params: ModelParams, n_days: usize, phi_up: f64, phi_down: f64) -> Self {
        Self {
            params,
            n_days,
            phi_up,
            phi_down,
            initial_price: 1000,
            tick: TICK,
            price_cap: DEFAULT_PRICE_CAP,
            overnight: Overnight::default(),
            open_depth: MIN_RESTING,
            record_trades: false,
            record_events: false,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.params.validate()?;
        if self.n_days == 0 {
            return Err(SimError::Config("n_days must be at least 1".into()));
        }
        if !(self.phi_up > 0.0) || !(self.phi_down < 0.0 && self.phi_down > -1.0) {
            return Err(SimError::Config(format!(
                "need phi_up > 0 and -1 < phi_down < 0, got {} and {}",
                self.phi_up, self.phi_down
            )));
        }
        if self.initial_price < 3 {
            return Err(SimError::Config(
                "initial price must be at least 3 ticks".into(),
            ));
        }
        if !(self.tick > 0.0) {
            return Err(SimError::Config("tick must be positive".into()));
        }
        if self.open_depth < MIN_RESTING {
            return Err(SimError::Config(format!(
                "open_depth must be at least {MIN_RESTING}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DayRecord {
    pub day: u64,
    pub close: Ticks,
    pub p_min: Ticks,
    pub p_max: Ticks,
    pub trades: usize,
    /// Resting orders per side (buy, sell) at the close.
    pub resting: (usize, usize),
    /// No transaction happened, so the previous close was carried forward.
    pub carried_close: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulationResult {
    /// Mid price after every transaction.
    pub mids: Vec<MidPrice>,
    /// Global step of each entry of `mids`.
    pub mid_steps: Vec<u64>,
    /// Index into `mids` where each day starts.
    pub day_boundaries: Vec<usize>,
    pub days: Vec<DayRecord>,
    pub trades: Vec<Trade>,
    pub events: Vec<OrderEvent>,
    pub placements: u64,
    pub cancellations: u64,
    pub discarded_shares: u64,
    pub skipped_cancels: u64,
    pub purged_orders: u64,
    /// Orders placed at the opens, the first day's seed book included.
    pub reseeded_orders: u64,
    /// The run stopped before `n_days` because the price passed the cap.
    pub truncated: bool,
}

impl SimulationResult {
    pub fn daily_closes(&self) -> Vec<Ticks> {
        self.days.iter().map(|d| d.close).collect()
    }

    /// Order events processed: placements plus cancellations.
    pub fn event_count(&self) -> u64 {
        self.placements + self.cancellations
    }

    /// Mid prices in ticks.
    pub fn mid_ticks(&self) -> Vec<f64> {
        self.mids.iter().map(|m| m.ticks()).collect()
    }
}

/// Two bids one and two ticks under `initial_price` and two asks above it.
pub fn seed_book(initial_price: Ticks, mean_size: u64) -> OrderBook {
    assert!(initial_price >= 3, "initial price must be at least 3 ticks");
    let mut book = OrderBook::new();
    let quotes = [
        (Side::Buy, initial_price - 1),
        (Side::Buy, initial_price - 2),
        (Side::Sell, initial_price + 1),
        (Side::Sell, initial_price + 2),
    ];
    for (id, (side, price)) in (1..).zip(quotes) {
        book.insert_limit(Order {
            id,
            side,
            price,
            size: mean_size.max(1),
            arrival_step: 0,
        })
        .expect("seed quotes never cross");
    }
    book
}

/// Best quotes, filling a missing side from the other one or from `reference`.
fn quotes(book: &OrderBook, reference: Ticks) -> (Ticks, Ticks) {
    match (book.best_bid(), book.best_ask()) {
        (Some(b), Some(a)) => (b, a),
        (Some(b), None) => (b, b + 1),
        (None, Some(a)) => (a - 1, a),
        (None, None) => (reference, reference),
    }
}

struct Simulation<'a> {
    cfg: &'a SimConfig,
    flow: OrderFlow,
    book: OrderBook,
    next_id: u64,
    seed_size: u64,
    out: SimulationResult,
}

impl<'a> Simulation<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let seed_size = cfg.params.size_curve.mean_at(0.0).round().max(1.0) as u64;
        // The first open seeds the empty book the same way every later
        // open restores it, so the event log replays without special cases.
        Ok(Self {
            cfg,
            flow: OrderFlow::new(cfg.params.clone())?,
            next_id: 1,
            seed_size,
            book: OrderBook::new(),
            out: SimulationResult::default(),
        })
    }

    fn place(&mut self, side: Side, price: Ticks, size: u64, step: u64) -> Order {
        let order = Order {
            id: self.next_id,
            side,
            price,
            size,
            arrival_step: step,
        };
        self.next_id += 1;
        if self.cfg.record_events {
            self.out.events.push(OrderEvent::place(&order, step));
        }
        order
    }

    /// Drop expired or untradeable orders and restore `open_depth` resting
    /// orders per side near the close.
    fn open_day(&mut self, limits: &PriceLimits, close: Ticks, step: u64) {
        let purged = match self.cfg.overnight {
            Overnight::Carry => self.book.retain_within(limits.p_min, limits.p_max),
            Overnight::Clear => self.book.retain_within(Ticks::MAX, Ticks::MIN),
        };
        self.out.purged_orders += purged.len() as u64;
        for side in [Side::Buy, Side::Sell] {
            let depth = self.cfg.open_depth;
            let mut offset = 1;
            while self.book.order_count(side) < depth && offset <= 2 * depth as Ticks {
                let price = limits.clamp(close - side.sign() as Ticks * offset);
                offset += 1;
                if self.book.crosses(side, price) {
                    continue;
                }
                let order = self.place(side, price, self.seed_size, step);
                self.book.insert_limit(order).expect("checked non-crossing");
                self.out.reseeded_orders += 1;
            }
        }
    }

    fn run_day(&mut self, day: u64, limits: &PriceLimits, prev_close: Ticks) -> DayRecord {
        let spd = self.cfg.params.steps_per_day;
        let streams = self.flow.day_streams(day);
        let (mut size_rng, mut cancel_rng) = step_rngs(self.cfg.params.seed, day);
        let day_start = self.out.mids.len();
        self.out.day_boundaries.push(day_start);
        let mut trade_buf = Vec::new();
        for i in 0..spd {
            let step = day * spd as u64 + i as u64;
            let side = Side::from_sign(streams.signs[i]);
            let x = streams.rel_prices[i];
            let (bid, ask) = quotes(&self.book, prev_close);
            let price = price_from_relative(x, side, bid, ask, limits);
            let size = generate_size(x, &self.cfg.params.size_curve, &mut size_rng);
            let order = self.place(side, price, size, step);
            self.out.placements += 1;
            if self.book.crosses(side, price) {
                trade_buf.clear();
                let summary = self
                    .book
                    .execute_marketable_into(order, MIN_RESTING, &mut trade_buf)
                    .expect("crossing order is marketable");
                self.out.discarded_shares += summary.discarded;
                if summary.executed > 0 {
                    if let Ok(mid) = self.book.mid_price() {
                        self.out.mids.push(mid);
                        self.out.mid_steps.push(step);
                    }
                    if self.cfg.record_trades {
                        self.out.trades.extend_from_slice(&trade_buf);
                    }
                }
            } else {
                self.book
                    .insert_limit(order)
                    .expect("non-crossing order rests");
            }
            self.cancel_step(step, &mut cancel_rng);
        }
        let day_mids = &self.out.mids[day_start..];
        let (close, carried) = match closing_price(day_mids, CLOSING_WINDOW) {
            Ok(c) => (c, false),
            Err(_) => (prev_close, true),
        };
        DayRecord {
            day,
            close,
            p_min: limits.p_min,
            p_max: limits.p_max,
            trades: day_mids.len(),
            resting: (
                self.book.order_count(Side::Buy),
                self.book.order_count(Side::Sell),
            ),
            carried_close: carried,
        }
    }

    fn cancel_step<R: Rng>(&mut self, step: u64, rng: &mut R) {
        match maybe_cancel(&self.cfg.params, &self.book, rng) {
            CancelDecision::None => {}
            CancelDecision::Skipped(_) => self.out.skipped_cancels += 1,
            CancelDecision::Cancel(t) => {
                let order = self
                    .book
                    .cancel_at(t.side, t.level_index, t.queue_index)
                    .expect("cancel target sampled from current book");
                self.out.cancellations += 1;
                if self.cfg.record_events {
                    self.out.events.push(OrderEvent::cancel(&order, step));
                }
            }
        }
    }

    fn run(mut self) -> SimulationResult {
        let cfg = self.cfg;
        let spd = cfg.params.steps_per_day as u64;
        let mut close = cfg.initial_price;
        for day in 0..cfg.n_days as u64 {
            let limits = roll_day(close, cfg.phi_up, cfg.phi_down, cfg.tick);
            self.open_day(&limits, close, day * spd);
            let record = self.run_day(day, &limits, close);
            close = record.close;
            self.out.days.push(record);
            if close > cfg.price_cap && (day as usize + 1) < cfg.n_days {
                self.out.truncated = true;
                break;
            }
        }
        self.out
    }
}

/// Run the full multi-day simulation described by `cfg`.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimulationResult, SimError> {
    Ok(Simulation::new(cfg)?.run())
}
