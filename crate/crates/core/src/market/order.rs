use serde::{Deserialize, Serialize};

/// Price in integer ticks.
pub type Price = i64;
/// Order size in integer units.
pub type Qty = u64;
pub type OrderId = u64;
pub type AgentId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }

    /// +1 for buys, -1 for sells.
    pub fn sign(self) -> f64 {
        match self {
            Side::Buy => 1.0,
            Side::Sell => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderKind {
    Limit,
    Market,
    Cancel,
}

/// An instruction sent to the book.
///
/// `price` is set for limit orders only. For `Cancel`, `id` names the resting
/// order to remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub id: OrderId,
    pub agent: AgentId,
    pub side: Side,
    pub kind: OrderKind,
    pub price: Option<Price>,
    pub size: Qty,
    pub timestamp: u64,
}

impl Order {
    pub fn limit(
        id: OrderId,
        agent: AgentId,
        side: Side,
        price: Price,
        size: Qty,
        timestamp: u64,
    ) -> Self {
        Order {
            id,
            agent,
            side,
            kind: OrderKind::Limit,
            price: Some(price),
            size,
            timestamp,
        }
    }

    pub fn market(id: OrderId, agent: AgentId, side: Side, size: Qty, timestamp: u64) -> Self {
        Order {
            id,
            agent,
            side,
            kind: OrderKind::Market,
            price: None,
            size,
            timestamp,
        }
    }
}

/// One execution between an incoming (taker) order and a resting (maker) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fill {
    pub taker_order_id: OrderId,
    pub maker_order_id: OrderId,
    pub taker_agent: AgentId,
    pub maker_agent: AgentId,
    pub taker_side: Side,
    pub price: Price,
    pub size: Qty,
    pub timestamp: u64,
}
