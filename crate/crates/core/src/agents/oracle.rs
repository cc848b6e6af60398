use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::strategy::draw_size;
use super::Intent;
use crate::market::{LobSnapshot, OrderId, Price, Qty, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Long-run fundamental F̄, in ticks.
    pub mean: f64,
    /// Reversion speed κ per tick.
    pub kappa: f64,
    /// Noise scale η per tick.
    pub eta: f64,
    /// Poisson rate of order arrivals per tick.
    pub arrival_rate: f64,
    /// Probability that an arrival is a market order.
    pub market_fraction: f64,
    pub size: [Qty; 2],
    /// Limit orders rest 1..=depth ticks away from the fundamental.
    pub depth: Price,
    /// Ticks before an unfilled oracle order is withdrawn.
    pub lifetime: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            mean: 10_000.0,
            kappa: 0.002,
            eta: 0.3,
            arrival_rate: 0.5,
            market_fraction: 0.05,
            size: [20, 60],
            depth: 3,
            lifetime: 600,
        }
    }
}

/// Ornstein-Uhlenbeck fundamental value:
/// F_{t+1} = F_t + κ(F̄ − F_t) + η ε, ε ~ N(0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fundamental {
    pub value: f64,
}

impl Fundamental {
    pub fn step<R: Rng + ?Sized>(&mut self, mean: f64, kappa: f64, eta: f64, rng: &mut R) -> f64 {
        let eps: f64 = if eta == 0.0 {
            0.0
        } else {
            rng.sample(StandardNormal)
        };
        self.value += kappa * (mean - self.value) + eta * eps;
        self.value
    }
}

/// Background liquidity around a mean-reverting fundamental.
#[derive(Debug, Clone)]
pub struct Oracle {
    cfg: OracleConfig,
    fundamental: Fundamental,
    arrivals: Option<Poisson<f64>>,
    live: VecDeque<(OrderId, u64)>,
}

impl Oracle {
    pub fn new(cfg: OracleConfig) -> Self {
        let arrivals = (cfg.arrival_rate > 0.0)
            .then(|| Poisson::new(cfg.arrival_rate).expect("positive finite arrival rate"));
        Oracle {
            cfg,
            fundamental: Fundamental { value: cfg.mean },
            arrivals,
            live: VecDeque::new(),
        }
    }

    pub fn fundamental(&self) -> f64 {
        self.fundamental.value
    }

    /// Advances the fundamental one tick and returns this tick's orders:
    /// Poisson arrivals, then a refill order for any empty side of `snapshot`.
    pub fn act<R: Rng + ?Sized>(&mut self, snapshot: &LobSnapshot, rng: &mut R) -> Vec<Intent> {
        let c = self.cfg;
        let f = self.fundamental.step(c.mean, c.kappa, c.eta, rng);
        let anchor = (f.round() as Price).max(c.depth + 1);
        let mut out = Vec::new();
        let n = self.arrivals.as_ref().map_or(0, |p| p.sample(rng) as usize);
        for _ in 0..n {
            let side = if rng.random_bool(0.5) {
                Side::Buy
            } else {
                Side::Sell
            };
            let size = draw_size(rng, c.size);
            if rng.random_bool(c.market_fraction) {
                out.push(Intent::market(side, size));
            } else {
                let offset = rng.random_range(1..=c.depth);
                let price = match side {
                    Side::Buy => anchor - offset,
                    Side::Sell => anchor + offset,
                };
                out.push(Intent::limit(side, price, size));
            }
        }
        if c.arrival_rate > 0.0 {
            if snapshot.best_bid().is_none() {
                out.push(Intent::limit(Side::Buy, anchor - 1, draw_size(rng, c.size)));
            }
            if snapshot.best_ask().is_none() {
                out.push(Intent::limit(
                    Side::Sell,
                    anchor + 1,
                    draw_size(rng, c.size),
                ));
            }
        }
        out
    }

    /// Registers a resting oracle order for later expiry.
    pub fn track(&mut self, id: OrderId, timestamp: u64) {
        self.live.push_back((id, timestamp));
    }

    /// Orders posted at least `lifetime` ticks before `now`, oldest first.
    pub fn expired(&mut self, now: u64) -> Vec<OrderId> {
        let mut out = Vec::new();
        while let Some(&(id, ts)) = self.live.front() {
            if ts + self.cfg.lifetime > now {
                break;
            }
            out.push(id);
            self.live.pop_front();
        }
        out
    }
}
