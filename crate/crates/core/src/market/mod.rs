//! Limit order book with price-time priority matching, L2 snapshots and the
//! microstructure metrics derived from them.

mod book;
mod export;
mod order;
mod snapshot;

pub use book::{Book, BookError, CancelOutcome, LimitOutcome, MarketOutcome, Submission};
pub use export::{write_snapshots_csv, write_trades_csv, SNAPSHOT_HEADER, TRADE_HEADER};
pub use order::{AgentId, Fill, Order, OrderId, OrderKind, Price, Qty, Side};
pub use snapshot::{order_flow_imbalance, Level, LobSnapshot, MetricError};
