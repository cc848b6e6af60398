use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::market::Side;

/// Mean-reversion signal against an exponentially weighted moving average.
///
/// Each observation updates EWMA_t = α m_t + (1 − α) EWMA_{t−1} and the
/// deviation m_t − EWMA_t. Once `window` mids are seen, a mid more than z
/// rolling standard deviations above the average is a sell, below is a buy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EwmaSignal {
    alpha: f64,
    z: f64,
    window: usize,
    ewma: Option<f64>,
    deviations: VecDeque<f64>,
    seen: usize,
}

impl EwmaSignal {
    pub fn new(alpha: f64, z: f64, window: usize) -> Self {
        assert!(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
        assert!(window >= 2, "std window must hold at least 2 deviations");
        EwmaSignal {
            alpha,
            z,
            window,
            ewma: None,
            deviations: VecDeque::with_capacity(window),
            seen: 0,
        }
    }

    pub fn ewma(&self) -> Option<f64> {
        self.ewma
    }

    /// Population standard deviation of the retained deviations.
    pub fn deviation_std(&self) -> f64 {
        let n = self.deviations.len();
        if n == 0 {
            return 0.0;
        }
        let mean = self.deviations.iter().sum::<f64>() / n as f64;
        (self
            .deviations
            .iter()
            .map(|d| (d - mean) * (d - mean))
            .sum::<f64>()
            / n as f64)
            .sqrt()
    }

    pub fn observe(&mut self, mid: f64) -> Option<Side> {
        let ewma = match self.ewma {
            None => mid,
            Some(prev) => self.alpha * mid + (1.0 - self.alpha) * prev,
        };
        self.ewma = Some(ewma);
        if self.deviations.len() == self.window {
            self.deviations.pop_front();
        }
        self.deviations.push_back(mid - ewma);
        self.seen += 1;
        if self.seen < self.window {
            return None;
        }
        let band = self.z * self.deviation_std();
        if mid > ewma + band {
            Some(Side::Sell)
        } else if mid < ewma - band {
            Some(Side::Buy)
        } else {
            None
        }
    }
}

/// Relative strength index of a mid series with Wilder smoothing, seeded by
/// the simple average of the first `period` changes.
///
/// Returns `None` with fewer than `period + 1` mids. A series without losses
/// scores 100 and one without any movement 50.
pub fn rsi(mids: &[f64], period: usize) -> Option<f64> {
    if period == 0 || mids.len() < period + 1 {
        return None;
    }
    let changes: Vec<f64> = mids.windows(2).map(|w| w[1] - w[0]).collect();
    let (seed, rest) = changes.split_at(period);
    let p = period as f64;
    let mut gain = seed.iter().map(|c| c.max(0.0)).sum::<f64>() / p;
    let mut loss = seed.iter().map(|c| (-c).max(0.0)).sum::<f64>() / p;
    for c in rest {
        gain = (gain * (p - 1.0) + c.max(0.0)) / p;
        loss = (loss * (p - 1.0) + (-c).max(0.0)) / p;
    }
    Some(if loss == 0.0 {
        if gain == 0.0 {
            50.0
        } else {
            100.0
        }
    } else {
        100.0 - 100.0 / (1.0 + gain / loss)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsiSignal {
    pub period: usize,
    pub overbought: f64,
    pub oversold: f64,
}

impl Default for RsiSignal {
    fn default() -> Self {
        RsiSignal {
            period: 14,
            overbought: 70.0,
            oversold: 30.0,
        }
    }
}

impl RsiSignal {
    /// Sell when overbought, buy when oversold.
    pub fn signal(&self, mids: &[f64]) -> Option<Side> {
        let r = rsi(mids, self.period)?;
        if r > self.overbought {
            Some(Side::Sell)
        } else if r < self.oversold {
            Some(Side::Buy)
        } else {
            None
        }
    }
}
