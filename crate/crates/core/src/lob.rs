//! Price-time priority limit order book.
//!
//! Each side keeps its price levels in a vector sorted so that the best
//! level is the last element. Most activity happens at or near the best
//! price, so inserts and removals there are O(1) amortised, and positional
//! access by level index (needed by the cancellation process) is O(1).

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;

use thiserror::Error;

/// Price expressed as an integer number of ticks.
pub type Ticks = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    /// `+1` for buys and `-1` for sells.
    pub fn sign(self) -> i32 {
        match self {
            Side::Buy => 1,
            Side::Sell => -1,
        }
    }

    pub fn from_sign(sign: i8) -> Self {
        if sign >= 0 {
            Side::Buy
        } else {
            Side::Sell
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        })
    }
}

/// Mid price held exactly as a count of half ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MidPrice(pub i64);

impl MidPrice {
    pub fn from_quotes(best_bid: Ticks, best_ask: Ticks) -> Self {
        MidPrice(best_bid + best_ask)
    }

    pub fn half_ticks(self) -> i64 {
        self.0
    }

    pub fn ticks(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for MidPrice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0.div_euclid(2))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Order {
    pub id: u64,
    pub side: Side,
    pub price: Ticks,
    pub size: u64,
    pub arrival_step: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trade {
    pub maker_id: u64,
    pub taker_id: u64,
    pub price: Ticks,
    pub size: u64,
    pub step: u64,
}

/// Outcome of routing one marketable order through the book.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExecutionSummary {
    /// Shares filled against resting orders.
    pub executed: u64,
    /// Shares dropped because the opposite side hit the resting-order floor.
    pub discarded: u64,
    /// Shares left over after the order's limit price was exhausted and
    /// posted to the book at that price.
    pub posted: u64,
    pub fills: usize,
    pub halted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub trades: Vec<Trade>,
    pub summary: ExecutionSummary,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LobError {
    #[error("order {id} has zero size")]
    ZeroSize { id: u64 },
    #[error("order {id} has non-positive price {price}")]
    NonPositivePrice { id: u64, price: Ticks },
    #[error("{side} order {id} at {price} crosses the opposite best {opposite}")]
    WouldCross {
        id: u64,
        side: Side,
        price: Ticks,
        opposite: Ticks,
    },
    #[error("{side} order {id} at {price} does not cross the opposite side")]
    NotMarketable { id: u64, side: Side, price: Ticks },
    #[error("order {id} arrives out of order at price level {price}")]
    OutOfOrder { id: u64, price: Ticks },
    #[error("{side} level index {level} out of range (side has {levels} levels)")]
    LevelOutOfRange {
        side: Side,
        level: usize,
        levels: usize,
    },
    #[error("{side} queue index {queue} out of range at level {level} (queue length {len})")]
    QueueOutOfRange {
        side: Side,
        level: usize,
        queue: usize,
        len: usize,
    },
    #[error("no resting {side} order {id} at price {price}")]
    UnknownOrder { side: Side, id: u64, price: Ticks },
    #[error("book side is empty")]
    EmptySide,
}

#[derive(Debug, Clone)]
pub struct Level {
    price: Ticks,
    queue: VecDeque<Order>,
}

impl Level {
    pub fn price(&self) -> Ticks {
        self.price
    }

    pub fn orders(&self) -> &VecDeque<Order> {
        &self.queue
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn shares(&self) -> u64 {
        self.queue.iter().map(|o| o.size).sum()
    }
}

#[derive(Debug, Clone)]
struct BookSide {
    side: Side,
    // Sorted by ascending priority key; the best level is last.
    levels: Vec<Level>,
    orders: usize,
    shares: u64,
}

impl BookSide {
    fn new(side: Side) -> Self {
        Self {
            side,
            levels: Vec::new(),
            orders: 0,
            shares: 0,
        }
    }

    #[inline]
    fn key(&self, price: Ticks) -> Ticks {
        match self.side {
            Side::Buy => price,
            Side::Sell => -price,
        }
    }

    fn best(&self) -> Option<Ticks> {
        self.levels.last().map(|l| l.price)
    }

    fn position(&self, price: Ticks) -> Result<usize, usize> {
        let key = self.key(price);
        self.levels
            .binary_search_by(|l| self.key(l.price).cmp(&key))
    }

    fn push(&mut self, order: Order) -> Result<(), LobError> {
        match self.position(order.price) {
            Ok(i) => {
                let level = &mut self.levels[i];
                if let Some(last) = level.queue.back() {
                    if last.id >= order.id || last.arrival_step > order.arrival_step {
                        return Err(LobError::OutOfOrder {
                            id: order.id,
                            price: order.price,
                        });
                    }
                }
                level.queue.push_back(order);
            }
            Err(i) => {
                let mut queue = VecDeque::with_capacity(4);
                queue.push_back(order);
                self.levels.insert(
                    i,
                    Level {
                        price: order.price,
                        queue,
                    },
                );
            }
        }
        self.orders += 1;
        self.shares += order.size;
        Ok(())
    }

    /// Vector index of the level `level_index` places from the best (1-based).
    fn index_from_best(&self, level_index: usize) -> Result<usize, LobError> {
        let n = self.levels.len();
        if level_index == 0 || level_index > n {
            return Err(LobError::LevelOutOfRange {
                side: self.side,
                level: level_index,
                levels: n,
            });
        }
        Ok(n - level_index)
    }

    fn remove_at(&mut self, vec_index: usize, queue_pos: usize) -> Order {
        let level = &mut self.levels[vec_index];
        let order = level
            .queue
            .remove(queue_pos)
            .expect("queue position checked");
        if level.queue.is_empty() {
            self.levels.remove(vec_index);
        }
        self.orders -= 1;
        self.shares -= order.size;
        order
    }
}

/// Two-sided limit order book with price-time priority.
#[derive(Debug, Clone)]
pub struct OrderBook {
    bids: BookSide,
    asks: BookSide,
}

impl Default for OrderBook {
    fn default() -> Self {
        Self::new()
    }
}

impl OrderBook {
    pub fn new() -> Self {
        Self {
            bids: BookSide::new(Side::Buy),
            asks: BookSide::new(Side::Sell),
        }
    }

    fn side(&self, side: Side) -> &BookSide {
        match side {
            Side::Buy => &self.bids,
            Side::Sell => &self.asks,
        }
    }

    fn side_mut(&mut self, side: Side) -> &mut BookSide {
        match side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        }
    }

    pub fn best_bid(&self) -> Option<Ticks> {
        self.bids.best()
    }

    pub fn best_ask(&self) -> Option<Ticks> {
        self.asks.best()
    }

    pub fn best(&self, side: Side) -> Option<Ticks> {
        self.side(side).best()
    }

    /// Number of distinct occupied price levels on `side`.
    pub fn level_count(&self, side: Side) -> usize {
        self.side(side).levels.len()
    }

    /// Number of resting orders on `side`.
    pub fn order_count(&self, side: Side) -> usize {
        self.side(side).orders
    }

    pub fn resting_shares(&self, side: Side) -> u64 {
        self.side(side).shares
    }

    /// Queue length at the level `level_index` places from the best (1-based).
    pub fn queue_len(&self, side: Side, level_index: usize) -> Result<usize, LobError> {
        let s = self.side(side);
        let i = s.index_from_best(level_index)?;
        Ok(s.levels[i].queue.len())
    }

    /// Levels of `side`, best first.
    pub fn levels(&self, side: Side) -> impl Iterator<Item = &Level> + '_ {
        self.side(side).levels.iter().rev()
    }

    /// Whether an order at `price` on `side` would trade immediately.
    pub fn crosses(&self, side: Side, price: Ticks) -> bool {
        match side {
            Side::Buy => self.asks.best().is_some_and(|a| price >= a),
            Side::Sell => self.bids.best().is_some_and(|b| price <= b),
        }
    }

    fn validate(order: &Order) -> Result<(), LobError> {
        if order.size == 0 {
            return Err(LobError::ZeroSize { id: order.id });
        }
        if order.price < 1 {
            return Err(LobError::NonPositivePrice {
                id: order.id,
                price: order.price,
            });
        }
        Ok(())
    }

    /// Rest a non-marketable order at the back of its price level.
    pub fn insert_limit(&mut self, order: Order) -> Result<(), LobError> {
        Self::validate(&order)?;
        if self.crosses(order.side, order.price) {
            let opposite = self
                .best(order.side.opposite())
                .expect("crossing implies a quote");
            return Err(LobError::WouldCross {
                id: order.id,
                side: order.side,
                price: order.price,
                opposite,
            });
        }
        self.side_mut(order.side).push(order)
    }

    /// Match a marketable order against the opposite side.
    ///
    /// Makers are consumed best price first and FIFO within a level, each
    /// fill at the maker's price. A fill that would remove a maker while the
    /// opposite side holds only `min_resting` orders halts execution and the
    /// rest of the order is discarded. If the order's limit price is
    /// exhausted instead, the remainder rests at that price.
    pub fn execute_marketable(
        &mut self,
        order: Order,
        min_resting: usize,
    ) -> Result<Execution, LobError> {
        let mut trades = Vec::new();
        let summary = self.execute_marketable_into(order, min_resting, &mut trades)?;
        Ok(Execution { trades, summary })
    }

    /// Same as [`OrderBook::execute_marketable`] but appends trades to `trades`.
    pub fn execute_marketable_into(
        &mut self,
        order: Order,
        min_resting: usize,
        trades: &mut Vec<Trade>,
    ) -> Result<ExecutionSummary, LobError> {
        Self::validate(&order)?;
        if !self.crosses(order.side, order.price) {
            return Err(LobError::NotMarketable {
                id: order.id,
                side: order.side,
                price: order.price,
            });
        }
        let mut summary = ExecutionSummary::default();
        let mut remaining = order.size;
        let opposite = self.side_mut(order.side.opposite());
        while remaining > 0 {
            let Some(level) = opposite.levels.last_mut() else {
                break;
            };
            let level_crosses = match order.side {
                Side::Buy => level.price <= order.price,
                Side::Sell => level.price >= order.price,
            };
            if !level_crosses {
                break;
            }
            let maker = level.queue.front_mut().expect("levels are never empty");
            if remaining < maker.size {
                maker.size -= remaining;
                opposite.shares -= remaining;
                trades.push(Trade {
                    maker_id: maker.id,
                    taker_id: order.id,
                    price: level.price,
                    size: remaining,
                    step: order.arrival_step,
                });
                summary.executed += remaining;
                summary.fills += 1;
                remaining = 0;
                break;
            }
            if opposite.orders <= min_resting {
                summary.halted = true;
                break;
            }
            let fill = maker.size;
            trades.push(Trade {
                maker_id: maker.id,
                taker_id: order.id,
                price: level.price,
                size: fill,
                step: order.arrival_step,
            });
            level.queue.pop_front();
            if level.queue.is_empty() {
                opposite.levels.pop();
            }
            opposite.orders -= 1;
            opposite.shares -= fill;
            summary.executed += fill;
            summary.fills += 1;
            remaining -= fill;
        }
        if remaining > 0 {
            if summary.halted {
                summary.discarded = remaining;
            } else {
                let rest = Order {
                    size: remaining,
                    ..order
                };
                self.side_mut(order.side).push(rest)?;
                summary.posted = remaining;
            }
        }
        Ok(summary)
    }

    /// Remove the order at `queue_index` (1 = earliest) of the level
    /// `level_index` places from the best (1 = best).
    pub fn cancel_at(
        &mut self,
        side: Side,
        level_index: usize,
        queue_index: usize,
    ) -> Result<Order, LobError> {
        let s = self.side_mut(side);
        let vi = s.index_from_best(level_index)?;
        let len = s.levels[vi].queue.len();
        if queue_index == 0 || queue_index > len {
            return Err(LobError::QueueOutOfRange {
                side,
                level: level_index,
                queue: queue_index,
                len,
            });
        }
        Ok(s.remove_at(vi, queue_index - 1))
    }

    /// Remove a resting order by id.
    pub fn cancel_order(&mut self, side: Side, price: Ticks, id: u64) -> Result<Order, LobError> {
        let s = self.side_mut(side);
        let unknown = LobError::UnknownOrder { side, id, price };
        let vi = s.position(price).map_err(|_| unknown.clone())?;
        let pos = s.levels[vi]
            .queue
            .iter()
            .position(|o| o.id == id)
            .ok_or(unknown)?;
        Ok(s.remove_at(vi, pos))
    }

    /// Drop every resting order priced outside `[lo, hi]`, returning them in
    /// book order (bids then asks, best first).
    pub fn retain_within(&mut self, lo: Ticks, hi: Ticks) -> Vec<Order> {
        let mut removed = Vec::new();
        for side in [Side::Buy, Side::Sell] {
            let s = self.side_mut(side);
            let mut kept = Vec::with_capacity(s.levels.len());
            for level in s.levels.drain(..).rev() {
                if level.price < lo || level.price > hi {
                    removed.extend(level.queue.iter().copied());
                } else {
                    kept.push(level);
                }
            }
            kept.reverse();
            s.levels = kept;
            s.orders = s.levels.iter().map(Level::len).sum();
            s.shares = s.levels.iter().map(Level::shares).sum();
        }
        removed
    }

    pub fn mid_price(&self) -> Result<MidPrice, LobError> {
        match (self.best_bid(), self.best_ask()) {
            (Some(b), Some(a)) => Ok(MidPrice::from_quotes(b, a)),
            _ => Err(LobError::EmptySide),
        }
    }

    /// Dump the book as CSV: `side,price_ticks,queue_index,order_id,size,arrival_step`.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "side,price_ticks,queue_index,order_id,size,arrival_step")?;
        for side in [Side::Buy, Side::Sell] {
            for level in self.levels(side) {
                for (q, o) in level.queue.iter().enumerate() {
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        side,
                        level.price,
                        q + 1,
                        o.id,
                        o.size,
                        o.arrival_step
                    )?;
                }
            }
        }
        Ok(())
    }

    /// Structural self-check used by tests and debug assertions.
    pub fn check_invariants(&self) -> Result<(), String> {
        if let (Some(b), Some(a)) = (self.best_bid(), self.best_ask()) {
            if b >= a {
                return Err(format!("crossed book: bid {b} >= ask {a}"));
            }
        }
        for s in [&self.bids, &self.asks] {
            let mut orders = 0;
            let mut shares = 0;
            for w in s.levels.windows(2) {
                if s.key(w[0].price) >= s.key(w[1].price) {
                    return Err(format!("{} levels out of priority order", s.side));
                }
            }
            for level in &s.levels {
                if level.queue.is_empty() {
                    return Err(format!("empty {} level at {}", s.side, level.price));
                }
                for w in level.queue.iter().collect::<Vec<_>>().windows(2) {
                    if w[0].id >= w[1].id || w[0].arrival_step > w[1].arrival_step {
                        return Err(format!("FIFO violated at {} {}", s.side, level.price));
                    }
                }
                for o in &level.queue {
                    if o.size == 0 || o.price != level.price || o.side != s.side {
                        return Err(format!("bad order {o:?} at level {}", level.price));
                    }
                }
                orders += level.queue.len();
                shares += level.shares();
            }
            if orders != s.orders || shares != s.shares {
                return Err(format!("{} counters out of sync", s.side));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(id: u64, side: Side, price: Ticks, size: u64) -> Order {
        Order {
            id,
            side,
            price,
            size,
            arrival_step: id,
        }
    }

    #[test]
    fn insert_into_empty_side() {
        let mut book = OrderBook::new();
        book.insert_limit(order(1, Side::Sell, 1001, 100)).unwrap();
        assert_eq!(book.best_ask(), Some(1001));
        assert_eq!(book.level_count(Side::Sell), 1);
        assert_eq!(book.queue_len(Side::Sell, 1).unwrap(), 1);
    }

    #[test]
    fn fifo_within_level() {
        let mut book = OrderBook::new();
        book.insert_limit(Order {
            arrival_step: 5,
            ..order(1, Side::Sell, 1001, 100)
        })
        .unwrap();
        book.insert_limit(Order {
            arrival_step: 7,
            ..order(2, Side::Sell, 1001, 100)
        })
        .unwrap();
        let steps: Vec<u64> = book
            .levels(Side::Sell)
            .next()
            .unwrap()
            .orders()
            .iter()
            .map(|o| o.arrival_step)
            .collect();
        assert_eq!(steps, vec![5, 7]);
    }

    #[test]
    fn crossing_insert_rejected() {
        let mut book = OrderBook::new();
        book.insert_limit(order(1, Side::Sell, 1001, 100)).unwrap();
        let err = book
            .insert_limit(order(2, Side::Buy, 1001, 100))
            .unwrap_err();
        assert!(matches!(err, LobError::WouldCross { opposite: 1001, .. }));
    }

    #[test]
    fn exact_fill_at_best() {
        let mut book = OrderBook::new();
        book.insert_limit(order(1, Side::Sell, 1001, 100)).unwrap();
        book.insert_limit(order(2, Side::Sell, 1002, 100)).unwrap();
        book.insert_limit(order(3, Side::Sell, 1003, 100)).unwrap();
        let ex = book
            .execute_marketable(order(4, Side::Buy, 1001, 100), 2)
            .unwrap();
        assert_eq!(ex.trades.len(), 1);
        assert_eq!(ex.trades[0].price, 1001);
        assert_eq!(ex.trades[0].size, 100);
        assert_eq!(ex.trades[0].maker_id, 1);
        assert_eq!(book.best_ask(), Some(1002));
    }

    #[test]
    fn min_resting_stops_walk() {
        // asks {1001: [100, 100], 1002: [100, 100, 100]}: three makers can be
        // removed before the side is down to two orders.
        let mut book = OrderBook::new();
        for (id, p) in [(1, 1001), (2, 1001), (3, 1002), (4, 1002), (5, 1002)] {
            book.insert_limit(order(id, Side::Sell, p, 100)).unwrap();
        }
        let ex = book
            .execute_marketable(order(6, Side::Buy, 1002, 300), 2)
            .unwrap();
        let fills: Vec<(Ticks, u64)> = ex.trades.iter().map(|t| (t.price, t.size)).collect();
        assert_eq!(fills, vec![(1001, 100), (1001, 100), (1002, 100)]);
        assert_eq!(book.order_count(Side::Sell), 2);
        assert_eq!(ex.summary.discarded, 0);

        let ex = book
            .execute_marketable(order(7, Side::Buy, 1002, 300), 2)
            .unwrap();
        assert!(ex.trades.is_empty());
        assert!(ex.summary.halted);
        assert_eq!(ex.summary.discarded, 300);
        assert_eq!(book.order_count(Side::Sell), 2);
    }

    #[test]
    fn huge_order_depletes_to_floor() {
        let mut book = OrderBook::new();
        for id in 1..=6 {
            book.insert_limit(order(id, Side::Sell, 1000 + id as Ticks, 50))
                .unwrap();
        }
        let ex = book
            .execute_marketable(order(10, Side::Buy, 2000, 1_000_000_000), 2)
            .unwrap();
        assert_eq!(ex.summary.executed, 200);
        assert_eq!(ex.summary.discarded, 1_000_000_000 - 200);
        assert_eq!(book.order_count(Side::Sell), 2);
        assert_eq!(book.best_ask(), Some(1005));
        assert!(book.best_bid().is_none());
    }

    #[test]
    fn partial_fill_keeps_maker() {
        let mut book = OrderBook::new();
        book.insert_limit(order(1, Side::Buy, 999, 100)).unwrap();
        book.insert_limit(order(2, Side::Buy, 998, 100)).unwrap();
        let ex = book
            .execute_marketable(order(3, Side::Sell, 999, 40), 2)
            .unwrap();
        assert_eq!(ex.summary.executed, 40);
        assert_eq!(book.resting_shares(Side::Buy), 160);
        assert_eq!(book.order_count(Side::Buy), 2);
    }

    #[test]
    fn price_exhausted_remainder_rests() {
        let mut book = OrderBook::new();
        for id in 1..=3 {
            book.insert_limit(order(id, Side::Sell, 1000 + id as Ticks, 100))
                .unwrap();
        }
        let ex = book
            .execute_marketable(order(4, Side::Buy, 1001, 250), 0)
            .unwrap();
        assert_eq!(ex.summary.executed, 100);
        assert_eq!(ex.summary.posted, 150);
        assert_eq!(book.best_bid(), Some(1001));
        assert_eq!(book.best_ask(), Some(1002));
        book.check_invariants().unwrap();
    }

    #[test]
    fn positional_cancel() {
        let mut book = OrderBook::new();
        book.insert_limit(order(1, Side::Sell, 1001, 100)).unwrap();
        book.insert_limit(order(2, Side::Sell, 1003, 100)).unwrap();
        let o = book.cancel_at(Side::Sell, 2, 1).unwrap();
        assert_eq!(o.price, 1003);
        assert_eq!(book.level_count(Side::Sell), 1);
    }

    #[test]
    fn cancel_last_order_removes_level() {
        let mut book = OrderBook::new();
        book.insert_limit(order(1, Side::Buy, 990, 100)).unwrap();
        book.insert_limit(order(2, Side::Buy, 995, 100)).unwrap();
        book.cancel_at(Side::Buy, 1, 1).unwrap();
        assert_eq!(book.level_count(Side::Buy), 1);
        assert_eq!(book.best_bid(), Some(990));
    }

    #[test]
    fn cancel_out_of_range() {
        let mut book = OrderBook::new();
        for id in 1..=3 {
            book.insert_limit(order(id, Side::Buy, 990 + id as Ticks, 100))
                .unwrap();
        }
        assert!(matches!(
            book.cancel_at(Side::Buy, 5, 1),
            Err(LobError::LevelOutOfRange { levels: 3, .. })
        ));
        assert!(matches!(
            book.cancel_at(Side::Buy, 1, 2),
            Err(LobError::QueueOutOfRange { len: 1, .. })
        ));
        assert!(book.cancel_at(Side::Buy, 0, 1).is_err());
    }

    #[test]
    fn mid_price_cases() {
        let mut book = OrderBook::new();
        book.insert_limit(order(1, Side::Buy, 999, 1)).unwrap();
        assert_eq!(book.mid_price(), Err(LobError::EmptySide));
        book.insert_limit(order(2, Side::Sell, 1001, 1)).unwrap();
        assert_eq!(book.mid_price().unwrap().ticks(), 1000.0);
        book.insert_limit(order(3, Side::Sell, 1000, 1)).unwrap();
        assert_eq!(book.mid_price().unwrap().ticks(), 999.5);
        assert_eq!(book.mid_price().unwrap().to_string(), "999.5");
    }

    #[test]
    fn retain_within_band() {
        let mut book = OrderBook::new();
        book.insert_limit(order(1, Side::Buy, 800, 1)).unwrap();
        book.insert_limit(order(2, Side::Buy, 950, 1)).unwrap();
        book.insert_limit(order(3, Side::Sell, 1050, 1)).unwrap();
        book.insert_limit(order(4, Side::Sell, 1200, 1)).unwrap();
        let removed = book.retain_within(900, 1100);
        assert_eq!(removed.iter().map(|o| o.id).collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(book.order_count(Side::Buy), 1);
        assert_eq!(book.order_count(Side::Sell), 1);
        book.check_invariants().unwrap();
    }

    #[test]
    fn snapshot_is_best_first() {
        let mut book = OrderBook::new();
        book.insert_limit(order(1, Side::Buy, 998, 5)).unwrap();
        book.insert_limit(order(2, Side::Buy, 999, 6)).unwrap();
        book.insert_limit(order(3, Side::Sell, 1001, 7)).unwrap();
        let mut out = Vec::new();
        book.write_snapshot(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "side,price_ticks,queue_index,order_id,size,arrival_step\n\
             buy,999,1,2,6,2\nbuy,998,1,1,5,1\nsell,1001,1,3,7,3\n"
        );
    }
}
