use serde::{Deserialize, Serialize};

use crate::agents::{Archetype, OrderRecord};
use crate::market::{Level, OrderKind, Side};

/// Total feature columns: 17 state then 5 action.
pub const FEATURES: usize = 22;
/// Trade direction, ±1. Passed through the scaler untouched.
pub const DIRECTION_COLUMN: usize = 17;

/// Column names in feature order. Prices are tick offsets from the current
/// mid; `mid` is the raw mid in ticks.
pub const COLUMNS: [&str; FEATURES] = [
    "bid1_price",
    "bid1_size",
    "bid2_price",
    "bid2_size",
    "ask1_price",
    "ask1_size",
    "ask2_price",
    "ask2_size",
    "mid",
    "mid_lag5",
    "mid_lag4",
    "mid_lag3",
    "mid_lag2",
    "mid_lag1",
    "spread",
    "volume_imbalance",
    "order_flow_imbalance",
    "direction",
    "order_price",
    "order_size",
    "relative_size",
    "price_minus_mid",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub label: Archetype,
    pub features: Vec<f64>,
    pub seed: u64,
    pub timestamp: u64,
    pub agent: u32,
    pub order_id: u64,
}

/// Why a record produced no sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Skip {
    OneSided,
    ShortHistory,
    NoFlowWindow,
    NotAnOrder,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractStats {
    pub kept: usize,
    pub one_sided: usize,
    pub short_history: usize,
    pub no_flow_window: usize,
    pub not_an_order: usize,
}

fn level(l: Level, mid: f64) -> [f64; 2] {
    if l.present {
        [l.price as f64 - mid, l.size as f64]
    } else {
        [0.0, 0.0]
    }
}

/// Builds the 22-column sample for one order record.
///
/// Absent second levels are encoded as a zero offset with zero size. A market
/// order's price is the best opposite price it would first trade at.
pub fn extract_sample(record: &OrderRecord) -> Result<LabeledSample, Skip> {
    let snap = &record.snapshot;
    let (Some(bid), Some(ask)) = (snap.best_bid(), snap.best_ask()) else {
        return Err(Skip::OneSided);
    };
    if record.mids.len() < 5 {
        return Err(Skip::ShortHistory);
    }
    let Some(ofi) = record.ofi.filter(|_| record.ofi_window >= 2) else {
        return Err(Skip::NoFlowWindow);
    };
    let order = &record.order;
    if order.kind == OrderKind::Cancel || order.size == 0 {
        return Err(Skip::NotAnOrder);
    }
    let mid = (bid.price + ask.price) as f64 / 2.0;
    let opposite = match order.side {
        Side::Buy => ask,
        Side::Sell => bid,
    };
    let price = order.price.unwrap_or(opposite.price) as f64;

    let mut f = Vec::with_capacity(FEATURES);
    f.extend(level(snap.bid[0], mid));
    f.extend(level(snap.bid[1], mid));
    f.extend(level(snap.ask[0], mid));
    f.extend(level(snap.ask[1], mid));
    f.push(mid);
    f.extend(record.mids[record.mids.len() - 5..].iter().map(|m| m - mid));
    f.push((ask.price - bid.price) as f64);
    f.push(ask.size as f64 / bid.size as f64);
    f.push(ofi);
    f.push(order.side.sign());
    f.push(price - mid);
    f.push(order.size as f64);
    f.push(order.size as f64 / opposite.size as f64);
    f.push(price - mid);
    debug_assert_eq!(f.len(), FEATURES);
    Ok(LabeledSample {
        label: record.archetype,
        features: f,
        seed: record.seed,
        timestamp: order.timestamp,
        agent: order.agent,
        order_id: order.id,
    })
}

/// Extracts every usable record, counting the skipped ones by reason.
pub fn extract_all(records: &[OrderRecord]) -> (Vec<LabeledSample>, ExtractStats) {
    let mut stats = ExtractStats::default();
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        match extract_sample(r) {
            Ok(s) => {
                stats.kept += 1;
                out.push(s);
            }
            Err(Skip::OneSided) => stats.one_sided += 1,
            Err(Skip::ShortHistory) => stats.short_history += 1,
            Err(Skip::NoFlowWindow) => stats.no_flow_window += 1,
            Err(Skip::NotAnOrder) => stats.not_an_order += 1,
        }
    }
    (out, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::Variant;
    use crate::market::{LobSnapshot, Order};

    fn record(order: Order, mids: Vec<f64>) -> OrderRecord {
        OrderRecord {
            seed: 3,
            archetype: Archetype::MM,
            variant: Variant::TopOfBook,
            order,
            snapshot: LobSnapshot {
                timestamp: 10,
                sequence: 4,
                bid: [Level::new(100, 100), Level::ABSENT],
                ask: [Level::new(102, 100), Level::new(104, 30)],
            },
            mids,
            ofi: Some(-12.0),
            ofi_window: 10,
        }
    }

    #[test]
    fn hand_computed_sell_limit() {
        let r = record(Order::limit(7, 2, Side::Sell, 102, 50, 10), vec![101.0; 5]);
        let s = extract_sample(&r).unwrap();
        let f = &s.features;
        assert_eq!(f.len(), FEATURES);
        assert_eq!(&f[0..4], &[-1.0, 100.0, 0.0, 0.0]);
        assert_eq!(&f[4..8], &[1.0, 100.0, 3.0, 30.0]);
        assert_eq!(f[8], 101.0);
        assert_eq!(&f[9..14], &[0.0; 5]);
        assert_eq!(f[14], 2.0);
        assert_eq!(f[15], 1.0);
        assert_eq!(f[16], -12.0);
        assert_eq!(f[DIRECTION_COLUMN], -1.0);
        assert_eq!(f[18], 1.0);
        assert_eq!(f[19], 50.0);
        assert_eq!(f[20], 0.5);
        assert_eq!(f[21], 1.0);
        assert_eq!((s.seed, s.timestamp, s.agent, s.order_id), (3, 10, 2, 7));
    }

    #[test]
    fn market_order_takes_the_touched_price() {
        let r = record(
            Order::market(8, 2, Side::Buy, 25, 10),
            vec![99.0, 100.0, 100.5, 101.0, 101.0],
        );
        let s = extract_sample(&r).unwrap();
        assert_eq!(s.features[DIRECTION_COLUMN], 1.0);
        assert_eq!(s.features[18], 1.0);
        assert_eq!(s.features[20], 0.25);
        assert_eq!(&s.features[9..14], &[-2.0, -1.0, -0.5, 0.0, 0.0]);
    }

    #[test]
    fn skips_incomplete_records() {
        let mut r = record(Order::market(8, 2, Side::Buy, 25, 10), vec![101.0; 5]);
        r.snapshot.ask = [Level::ABSENT; 2];
        assert_eq!(extract_sample(&r), Err(Skip::OneSided));
        let r = record(Order::market(8, 2, Side::Buy, 25, 10), vec![101.0; 4]);
        assert_eq!(extract_sample(&r), Err(Skip::ShortHistory));
        let mut r = record(Order::market(8, 2, Side::Buy, 25, 10), vec![101.0; 5]);
        r.ofi = None;
        assert_eq!(extract_sample(&r), Err(Skip::NoFlowWindow));
        let (kept, stats) = extract_all(&[r.clone(), record(r.order, vec![101.0; 5])]);
        assert_eq!(kept.len(), 1);
        assert_eq!((stats.kept, stats.no_flow_window), (1, 1));
    }
}
