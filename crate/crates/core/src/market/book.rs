use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use super::order::{AgentId, Fill, Order, OrderId, OrderKind, Price, Qty, Side};
use super::snapshot::{Level, LobSnapshot};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BookError {
    #[error("order id {id} is not greater than the last accepted id {last}")]
    DuplicateOrderId { id: OrderId, last: OrderId },
    #[error("order {0} has zero size")]
    InvalidSize(OrderId),
    #[error("order {id} has non-positive price {price}")]
    InvalidPrice { id: OrderId, price: Price },
    #[error("order {id} is {kind:?}, expected {expected:?}")]
    WrongKind {
        id: OrderId,
        kind: OrderKind,
        expected: OrderKind,
    },
    #[error("limit order {0} has no price")]
    MissingPrice(OrderId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CancelOutcome {
    Cancelled,
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LimitOutcome {
    pub fills: Vec<Fill>,
    /// Size left resting on the book after matching.
    pub resting: Qty,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MarketOutcome {
    pub fills: Vec<Fill>,
    /// Size that found no liquidity. Market orders never rest.
    pub unfilled: Qty,
}

impl MarketOutcome {
    pub fn is_partial(&self) -> bool {
        self.unfilled > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Resting {
    id: OrderId,
    agent: AgentId,
    remaining: Qty,
}

/// Single-instrument limit order book with price-time priority.
#[derive(Debug, Clone, Default)]
pub struct Book {
    bids: BTreeMap<Price, VecDeque<Resting>>,
    asks: BTreeMap<Price, VecDeque<Resting>>,
    index: HashMap<OrderId, (Side, Price)>,
    last_id: Option<OrderId>,
    next_order_id: OrderId,
    event_counter: u64,
}

impl Book {
    pub fn new() -> Self {
        Self {
            next_order_id: 1,
            ..Default::default()
        }
    }

    /// Hands out the next unused order id.
    pub fn next_id(&mut self) -> OrderId {
        let id = self.next_order_id.max(self.last_id.map_or(1, |l| l + 1));
        self.next_order_id = id + 1;
        id
    }

    /// Number of operations the book has processed.
    pub fn sequence(&self) -> u64 {
        self.event_counter
    }

    pub fn best_bid(&self) -> Option<(Price, Qty)> {
        self.bids
            .iter()
            .next_back()
            .map(|(p, q)| (*p, q.iter().map(|r| r.remaining).sum()))
    }

    pub fn best_ask(&self) -> Option<(Price, Qty)> {
        self.asks
            .iter()
            .next()
            .map(|(p, q)| (*p, q.iter().map(|r| r.remaining).sum()))
    }

    pub fn is_crossed(&self) -> bool {
        match (self.bids.keys().next_back(), self.asks.keys().next()) {
            (Some(b), Some(a)) => b >= a,
            _ => false,
        }
    }

    pub fn resting_orders(&self) -> usize {
        self.index.len()
    }

    pub fn contains(&self, id: OrderId) -> bool {
        self.index.contains_key(&id)
    }

    /// Remaining size of a resting order, if it is still on the book.
    pub fn remaining(&self, id: OrderId) -> Option<Qty> {
        let (side, price) = self.index.get(&id)?;
        self.side(*side)
            .get(price)?
            .iter()
            .find(|r| r.id == id)
            .map(|r| r.remaining)
    }

    /// Total resting size per side.
    pub fn depth(&self, side: Side) -> Qty {
        self.side(side)
            .values()
            .flatten()
            .map(|r| r.remaining)
            .sum()
    }

    fn side(&self, side: Side) -> &BTreeMap<Price, VecDeque<Resting>> {
        match side {
            Side::Buy => &self.bids,
            Side::Sell => &self.asks,
        }
    }

    fn accept_id(&mut self, id: OrderId) -> Result<(), BookError> {
        if let Some(last) = self.last_id {
            if id <= last {
                return Err(BookError::DuplicateOrderId { id, last });
            }
        }
        self.last_id = Some(id);
        self.next_order_id = self.next_order_id.max(id + 1);
        Ok(())
    }

    pub fn submit_limit(&mut self, order: &Order) -> Result<LimitOutcome, BookError> {
        if order.kind != OrderKind::Limit {
            return Err(BookError::WrongKind {
                id: order.id,
                kind: order.kind,
                expected: OrderKind::Limit,
            });
        }
        let price = order.price.ok_or(BookError::MissingPrice(order.id))?;
        if price < 1 {
            return Err(BookError::InvalidPrice {
                id: order.id,
                price,
            });
        }
        if order.size == 0 {
            return Err(BookError::InvalidSize(order.id));
        }
        self.accept_id(order.id)?;
        self.event_counter += 1;

        let (fills, remaining) = self.match_against(order, Some(price));
        if remaining > 0 {
            let book_side = match order.side {
                Side::Buy => &mut self.bids,
                Side::Sell => &mut self.asks,
            };
            book_side.entry(price).or_default().push_back(Resting {
                id: order.id,
                agent: order.agent,
                remaining,
            });
            self.index.insert(order.id, (order.side, price));
        }
        debug_assert!(!self.is_crossed());
        Ok(LimitOutcome {
            fills,
            resting: remaining,
        })
    }

    pub fn submit_market(&mut self, order: &Order) -> Result<MarketOutcome, BookError> {
        if order.kind != OrderKind::Market {
            return Err(BookError::WrongKind {
                id: order.id,
                kind: order.kind,
                expected: OrderKind::Market,
            });
        }
        if order.size == 0 {
            return Err(BookError::InvalidSize(order.id));
        }
        self.accept_id(order.id)?;
        self.event_counter += 1;
        let (fills, unfilled) = self.match_against(order, None);
        Ok(MarketOutcome { fills, unfilled })
    }

    pub fn cancel(&mut self, id: OrderId) -> CancelOutcome {
        let Some((side, price)) = self.index.remove(&id) else {
            return CancelOutcome::NotFound;
        };
        self.event_counter += 1;
        let book_side = match side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        };
        if let Some(level) = book_side.get_mut(&price) {
            level.retain(|r| r.id != id);
            if level.is_empty() {
                book_side.remove(&price);
            }
        }
        CancelOutcome::Cancelled
    }

    /// Walks the opposite side from the best price outward. `limit` bounds
    /// the prices the taker accepts; `None` accepts any price.
    fn match_against(&mut self, order: &Order, limit: Option<Price>) -> (Vec<Fill>, Qty) {
        let mut remaining = order.size;
        let mut fills = Vec::new();
        let opposite = match order.side {
            Side::Buy => &mut self.asks,
            Side::Sell => &mut self.bids,
        };
        while remaining > 0 {
            let best = match order.side {
                Side::Buy => opposite.keys().next().copied(),
                Side::Sell => opposite.keys().next_back().copied(),
            };
            let Some(level_price) = best else { break };
            let acceptable = match (order.side, limit) {
                (_, None) => true,
                (Side::Buy, Some(p)) => level_price <= p,
                (Side::Sell, Some(p)) => level_price >= p,
            };
            if !acceptable {
                break;
            }
            let level = opposite.get_mut(&level_price).expect("level exists");
            while remaining > 0 {
                let Some(maker) = level.front_mut() else {
                    break;
                };
                let traded = remaining.min(maker.remaining);
                fills.push(Fill {
                    taker_order_id: order.id,
                    maker_order_id: maker.id,
                    taker_agent: order.agent,
                    maker_agent: maker.agent,
                    taker_side: order.side,
                    price: level_price,
                    size: traded,
                    timestamp: order.timestamp,
                });
                remaining -= traded;
                maker.remaining -= traded;
                if maker.remaining == 0 {
                    let done = level.pop_front().expect("front exists");
                    self.index.remove(&done.id);
                }
            }
            if level.is_empty() {
                opposite.remove(&level_price);
            }
        }
        (fills, remaining)
    }

    /// Top two aggregated levels per side.
    pub fn snapshot(&self, timestamp: u64) -> LobSnapshot {
        let agg = |q: &VecDeque<Resting>| q.iter().map(|r| r.remaining).sum::<Qty>();
        let mut bid = [Level::ABSENT; 2];
        for (slot, (p, q)) in bid.iter_mut().zip(self.bids.iter().rev()) {
            *slot = Level::new(*p, agg(q));
        }
        let mut ask = [Level::ABSENT; 2];
        for (slot, (p, q)) in ask.iter_mut().zip(self.asks.iter()) {
            *slot = Level::new(*p, agg(q));
        }
        LobSnapshot {
            timestamp,
            sequence: self.event_counter,
            bid,
            ask,
        }
    }

    /// Dispatches on `order.kind`. Cancels report through `cancelled`.
    pub fn submit(&mut self, order: &Order) -> Result<Submission, BookError> {
        match order.kind {
            OrderKind::Limit => self.submit_limit(order).map(Submission::Limit),
            OrderKind::Market => self.submit_market(order).map(Submission::Market),
            OrderKind::Cancel => Ok(Submission::Cancel(self.cancel(order.id))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Submission {
    Limit(LimitOutcome),
    Market(MarketOutcome),
    Cancel(CancelOutcome),
}

impl Submission {
    pub fn fills(&self) -> &[Fill] {
        match self {
            Submission::Limit(o) => &o.fills,
            Submission::Market(o) => &o.fills,
            Submission::Cancel(_) => &[],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(fills: &[Fill]) -> Vec<(Qty, Price)> {
        fills.iter().map(|f| (f.size, f.price)).collect()
    }

    fn lim(book: &mut Book, side: Side, price: Price, size: Qty) -> LimitOutcome {
        let id = book.next_id();
        book.submit_limit(&Order::limit(id, 0, side, price, size, 0))
            .unwrap()
    }

    #[test]
    fn limit_walks_levels_in_price_order() {
        let mut book = Book::new();
        lim(&mut book, Side::Sell, 101, 50);
        lim(&mut book, Side::Sell, 102, 40);
        let out = lim(&mut book, Side::Buy, 102, 80);
        assert_eq!(sizes(&out.fills), vec![(50, 101), (30, 102)]);
        assert_eq!(out.resting, 0);
        assert_eq!(book.best_ask(), Some((102, 10)));
        assert_eq!(book.best_bid(), None);
    }

    #[test]
    fn limit_rests_on_empty_book() {
        let mut book = Book::new();
        let out = lim(&mut book, Side::Buy, 100, 10);
        assert!(out.fills.is_empty());
        assert_eq!(out.resting, 10);
        assert_eq!(book.best_bid(), Some((100, 10)));
    }

    #[test]
    fn time_priority_within_level() {
        let mut book = Book::new();
        let first = book.next_id();
        book.submit_limit(&Order::limit(first, 1, Side::Sell, 101, 50, 0))
            .unwrap();
        let second = book.next_id();
        book.submit_limit(&Order::limit(second, 2, Side::Sell, 101, 40, 1))
            .unwrap();
        let out = lim(&mut book, Side::Buy, 101, 60);
        assert_eq!(out.fills.len(), 2);
        assert_eq!(
            (out.fills[0].maker_order_id, out.fills[0].size),
            (first, 50)
        );
        assert_eq!(
            (out.fills[1].maker_order_id, out.fills[1].size),
            (second, 10)
        );
        assert_eq!(book.remaining(second), Some(30));
    }

    #[test]
    fn unmatched_remainder_rests_at_limit() {
        let mut book = Book::new();
        lim(&mut book, Side::Sell, 101, 5);
        let out = lim(&mut book, Side::Buy, 103, 20);
        assert_eq!(out.resting, 15);
        assert_eq!(book.best_bid(), Some((103, 15)));
        assert!(!book.is_crossed());
    }

    #[test]
    fn market_orders() {
        let mut book = Book::new();
        lim(&mut book, Side::Sell, 101, 50);
        let id = book.next_id();
        let out = book
            .submit_market(&Order::market(id, 0, Side::Buy, 30, 0))
            .unwrap();
        assert_eq!(sizes(&out.fills), vec![(30, 101)]);
        assert_eq!(book.best_ask(), Some((101, 20)));

        let mut book = Book::new();
        lim(&mut book, Side::Sell, 101, 50);
        lim(&mut book, Side::Sell, 102, 40);
        let id = book.next_id();
        let out = book
            .submit_market(&Order::market(id, 0, Side::Buy, 70, 0))
            .unwrap();
        assert_eq!(sizes(&out.fills), vec![(50, 101), (20, 102)]);
        assert_eq!(out.unfilled, 0);

        let mut book = Book::new();
        let id = book.next_id();
        let out = book
            .submit_market(&Order::market(id, 0, Side::Buy, 10, 0))
            .unwrap();
        assert!(out.fills.is_empty());
        assert_eq!(out.unfilled, 10);
        assert!(out.is_partial());
        assert_eq!(book.resting_orders(), 0);
    }

    #[test]
    fn cancel_semantics() {
        let mut book = Book::new();
        let id = book.next_id();
        book.submit_limit(&Order::limit(id, 0, Side::Buy, 100, 10, 0))
            .unwrap();
        assert_eq!(book.cancel(id), CancelOutcome::Cancelled);
        assert_eq!(book.best_bid(), None);
        assert_eq!(book.cancel(id), CancelOutcome::NotFound);
        assert_eq!(book.cancel(9_999), CancelOutcome::NotFound);

        let a = book.next_id();
        book.submit_limit(&Order::limit(a, 0, Side::Buy, 100, 10, 0))
            .unwrap();
        let b = book.next_id();
        book.submit_limit(&Order::limit(b, 0, Side::Buy, 100, 7, 0))
            .unwrap();
        let c = book.next_id();
        book.submit_limit(&Order::limit(c, 0, Side::Buy, 100, 3, 0))
            .unwrap();
        book.cancel(a);
        let out = lim(&mut book, Side::Sell, 100, 8);
        assert_eq!(out.fills[0].maker_order_id, b);
        assert_eq!(out.fills[1].maker_order_id, c);
    }

    #[test]
    fn filled_order_cannot_be_cancelled() {
        let mut book = Book::new();
        let id = book.next_id();
        book.submit_limit(&Order::limit(id, 0, Side::Sell, 101, 5, 0))
            .unwrap();
        lim(&mut book, Side::Buy, 101, 5);
        assert_eq!(book.cancel(id), CancelOutcome::NotFound);
    }

    #[test]
    fn rejects_bad_orders() {
        let mut book = Book::new();
        assert_eq!(
            book.submit_limit(&Order::limit(1, 0, Side::Buy, 100, 0, 0)),
            Err(BookError::InvalidSize(1))
        );
        assert_eq!(
            book.submit_limit(&Order::limit(1, 0, Side::Buy, 0, 5, 0)),
            Err(BookError::InvalidPrice { id: 1, price: 0 })
        );
        book.submit_limit(&Order::limit(5, 0, Side::Buy, 100, 5, 0))
            .unwrap();
        assert_eq!(
            book.submit_limit(&Order::limit(5, 0, Side::Buy, 99, 5, 0)),
            Err(BookError::DuplicateOrderId { id: 5, last: 5 })
        );
        assert!(matches!(
            book.submit_market(&Order::limit(6, 0, Side::Buy, 99, 5, 0)),
            Err(BookError::WrongKind { .. })
        ));
        // rejected orders leave the book untouched
        assert_eq!(book.resting_orders(), 1);
        assert_eq!(book.next_id(), 6);
    }

    #[test]
    fn snapshot_levels() {
        let mut book = Book::new();
        lim(&mut book, Side::Buy, 100, 30);
        lim(&mut book, Side::Buy, 99, 20);
        lim(&mut book, Side::Buy, 98, 5);
        lim(&mut book, Side::Sell, 101, 40);
        let s = book.snapshot(7);
        assert_eq!(s.bid, [Level::new(100, 30), Level::new(99, 20)]);
        assert_eq!(s.ask, [Level::new(101, 40), Level::ABSENT]);
        assert_eq!(s.timestamp, 7);

        let empty = Book::new().snapshot(0);
        assert!(empty.bid.iter().chain(empty.ask.iter()).all(|l| !l.present));

        let mut book = Book::new();
        lim(&mut book, Side::Buy, 100, 10);
        lim(&mut book, Side::Buy, 100, 15);
        assert_eq!(book.snapshot(0).bid[0], Level::new(100, 25));
        assert_eq!(book.snapshot(0), book.snapshot(0));
    }
}
