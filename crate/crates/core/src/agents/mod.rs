//! Trading-agent archetypes and the discrete-event day simulator.

mod config;
mod history;
mod oracle;
mod reversion;
mod sim;
mod strategy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{Price, Qty, Side};

pub use config::{
    ConsumerConfig, MarketMakerConfig, MomentumConfig, ReversionConfig, SimConfig, ORACLE_AGENT,
};
pub use history::MidHistory;
pub use oracle::{Fundamental, Oracle, OracleConfig};
pub use reversion::{rsi, EwmaSignal, RsiSignal};
pub use sim::{simulate_day, OrderRecord, SimOutput};
pub use strategy::{
    avellaneda_stoikov, liquidity_consumer, mm_avellaneda_stoikov, mm_deep, mm_top_of_book,
    momentum, AsParams, AsQuote,
};

/// Trader archetype; the integer codes are stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Archetype {
    MM = 0,
    LC = 1,
    ME = 2,
    MO = 3,
}

impl Archetype {
    pub const ALL: [Archetype; 4] = [Archetype::MM, Archetype::LC, Archetype::ME, Archetype::MO];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Archetype> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Archetype::MM => "MM",
            Archetype::LC => "LC",
            Archetype::ME => "ME",
            Archetype::MO => "MO",
        }
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Archetype {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| AgentError::UnknownArchetype(s.to_string()))
    }
}

/// Strategy variant within an archetype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    TopOfBook,
    Deep,
    AvellanedaStoikov,
    Consumer,
    Ewma,
    Rsi,
    Momentum,
}

/// What a strategy wants to send; the simulator assigns ids and timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intent {
    pub side: Side,
    /// `None` for market orders.
    pub price: Option<Price>,
    pub size: Qty,
}

impl Intent {
    pub fn limit(side: Side, price: Price, size: Qty) -> Self {
        Intent {
            side,
            price: Some(price),
            size,
        }
    }

    pub fn market(side: Side, size: Qty) -> Self {
        Intent {
            side,
            price: None,
            size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("unknown archetype {0:?}")]
    UnknownArchetype(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Book(#[from] crate::market::BookError),
}
