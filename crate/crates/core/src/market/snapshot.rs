use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::order::{Price, Qty};

/// One aggregated price level. Absent levels are `price = 0, size = 0` with
/// `present = false`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub price: Price,
    pub size: Qty,
    pub present: bool,
}

impl Level {
    pub const ABSENT: Level = Level {
        price: 0,
        size: 0,
        present: false,
    };

    pub fn new(price: Price, size: Qty) -> Self {
        Level {
            price,
            size,
            present: true,
        }
    }
}

/// L2 view: the two best levels on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LobSnapshot {
    pub timestamp: u64,
    /// Book operation count when the snapshot was taken.
    pub sequence: u64,
    pub bid: [Level; 2],
    pub ask: [Level; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("metric undefined: book is one-sided or empty")]
    OneSided,
    #[error("order flow imbalance needs at least 2 snapshots, got {0}")]
    WindowTooShort(usize),
}

impl LobSnapshot {
    pub fn is_two_sided(&self) -> bool {
        self.bid[0].present && self.ask[0].present
    }

    pub fn best_bid(&self) -> Option<Level> {
        self.bid[0].present.then_some(self.bid[0])
    }

    pub fn best_ask(&self) -> Option<Level> {
        self.ask[0].present.then_some(self.ask[0])
    }

    fn touch(&self) -> Result<(Level, Level), MetricError> {
        match (self.best_bid(), self.best_ask()) {
            (Some(b), Some(a)) => Ok((b, a)),
            _ => Err(MetricError::OneSided),
        }
    }

    /// (A + B) / 2 in ticks.
    pub fn mid_price(&self) -> Result<f64, MetricError> {
        let (b, a) = self.touch()?;
        Ok((a.price + b.price) as f64 / 2.0)
    }

    /// A - B in ticks.
    pub fn spread(&self) -> Result<Price, MetricError> {
        let (b, a) = self.touch()?;
        Ok(a.price - b.price)
    }

    /// Best ask size over best bid size.
    pub fn volume_imbalance(&self) -> Result<f64, MetricError> {
        let (b, a) = self.touch()?;
        Ok(a.size as f64 / b.size as f64)
    }
}

/// Best-level order flow contribution between two consecutive snapshots.
fn ofi_step(prev: &LobSnapshot, next: &LobSnapshot) -> Result<f64, MetricError> {
    let (pb, pa) = prev.touch()?;
    let (nb, na) = next.touch()?;
    let mut e = 0.0;
    if nb.price >= pb.price {
        e += nb.size as f64;
    }
    if nb.price <= pb.price {
        e -= pb.size as f64;
    }
    if na.price <= pa.price {
        e -= na.size as f64;
    }
    if na.price >= pa.price {
        e += pa.size as f64;
    }
    Ok(e)
}

/// Sum of best-level order flow events over consecutive snapshots.
pub fn order_flow_imbalance(window: &[LobSnapshot]) -> Result<f64, MetricError> {
    if window.len() < 2 {
        return Err(MetricError::WindowTooShort(window.len()));
    }
    window.windows(2).map(|w| ofi_step(&w[0], &w[1])).sum()
}
