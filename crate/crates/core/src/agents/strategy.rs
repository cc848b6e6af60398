use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{history::MidHistory, Intent};
use crate::market::{LobSnapshot, Price, Qty, Side};

pub(crate) fn draw_size<R: Rng + ?Sized>(rng: &mut R, bounds: [Qty; 2]) -> Qty {
    rng.random_range(bounds[0]..=bounds[1])
}

/// One buy at the best bid and one sell at the best ask. A missing side is
/// not quoted.
pub fn mm_top_of_book<R: Rng + ?Sized>(
    snapshot: &LobSnapshot,
    rng: &mut R,
    size: [Qty; 2],
) -> Vec<Intent> {
    let mut out = Vec::with_capacity(2);
    if let Some(b) = snapshot.best_bid() {
        out.push(Intent::limit(Side::Buy, b.price, draw_size(rng, size)));
    }
    if let Some(a) = snapshot.best_ask() {
        out.push(Intent::limit(Side::Sell, a.price, draw_size(rng, size)));
    }
    out
}

/// Ladders of N ~ U{levels} orders per side at 1..N ticks away from the mid.
///
/// A half-tick mid is rounded outward, so the first level of each ladder
/// sits at the touch instead of crossing it.
pub fn mm_deep<R: Rng + ?Sized>(
    snapshot: &LobSnapshot,
    rng: &mut R,
    size: [Qty; 2],
    levels: [u32; 2],
) -> Vec<Intent> {
    let n = rng.random_range(levels[0]..=levels[1]) as Price;
    let (bid_ref, ask_ref) = match (snapshot.best_bid(), snapshot.best_ask()) {
        (Some(b), Some(a)) => {
            let twice_mid = b.price + a.price;
            (
                Some(twice_mid.div_euclid(2) + twice_mid.rem_euclid(2)),
                Some(twice_mid.div_euclid(2)),
            )
        }
        (Some(b), None) => (Some(b.price + 1), None),
        (None, Some(a)) => (None, Some(a.price - 1)),
        (None, None) => (None, None),
    };
    let mut out = Vec::with_capacity(2 * n as usize);
    for i in 1..=n {
        if let Some(r) = bid_ref.filter(|r| r - i >= 1) {
            out.push(Intent::limit(Side::Buy, r - i, draw_size(rng, size)));
        }
        if let Some(r) = ask_ref {
            out.push(Intent::limit(Side::Sell, r + i, draw_size(rng, size)));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsParams {
    /// Risk aversion γ.
    pub gamma: f64,
    /// Order-arrival decay k.
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsQuote {
    pub reservation: f64,
    pub spread: f64,
    pub bid: f64,
    pub ask: f64,
}

/// Reservation price r = s − qγσ²τ and optimal total spread
/// δ = γσ²τ + (2/γ)ln(1 + γ/k), with τ = 1 − t the remaining fraction of the
/// day.
pub fn avellaneda_stoikov(
    mid: f64,
    inventory: i64,
    time_left: f64,
    sigma2: f64,
    p: AsParams,
) -> AsQuote {
    let risk = p.gamma * sigma2 * time_left;
    let reservation = mid - inventory as f64 * risk;
    let spread = risk + (2.0 / p.gamma) * (p.gamma / p.k).ln_1p();
    AsQuote {
        reservation,
        spread,
        bid: reservation - spread / 2.0,
        ask: reservation + spread / 2.0,
    }
}

/// Inventory-aware quotes rounded to ticks and kept passive: the bid stays
/// below the best ask and the ask above the best bid.
pub fn mm_avellaneda_stoikov<R: Rng + ?Sized>(
    snapshot: &LobSnapshot,
    inventory: i64,
    time_frac: f64,
    sigma2: f64,
    params: AsParams,
    rng: &mut R,
    size: [Qty; 2],
) -> Vec<Intent> {
    let (Some(b), Some(a)) = (snapshot.best_bid(), snapshot.best_ask()) else {
        return mm_top_of_book(snapshot, rng, size);
    };
    let mid = (a.price + b.price) as f64 / 2.0;
    let q = avellaneda_stoikov(
        mid,
        inventory,
        (1.0 - time_frac).clamp(0.0, 1.0),
        sigma2,
        params,
    );
    let bid = (q.bid.round() as Price).min(a.price - 1).max(1);
    let ask = (q.ask.round() as Price).max(b.price + 1).max(bid + 1);
    vec![
        Intent::limit(Side::Buy, bid, draw_size(rng, size)),
        Intent::limit(Side::Sell, ask, draw_size(rng, size)),
    ]
}

/// Market order of uniformly random side and size.
pub fn liquidity_consumer<R: Rng + ?Sized>(rng: &mut R, size: [Qty; 2]) -> Intent {
    let side = if rng.random_bool(0.5) {
        Side::Buy
    } else {
        Side::Sell
    };
    Intent::market(side, draw_size(rng, size))
}

/// Buys when the short moving average of observed mids is above the long
/// one and sells otherwise. Silent until `long` mids have been observed.
pub fn momentum<R: Rng + ?Sized>(
    history: &MidHistory,
    rng: &mut R,
    size: [Qty; 2],
    short: usize,
    long: usize,
) -> Option<Intent> {
    let fast = history.mean_last(short)?;
    let slow = history.mean_last(long)?;
    let side = if fast > slow { Side::Buy } else { Side::Sell };
    Some(Intent::market(side, draw_size(rng, size)))
}
