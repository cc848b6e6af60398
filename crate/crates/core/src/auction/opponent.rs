use serde::{Deserialize, Serialize};

use crate::numerics::{fit_mle, normal, NumericsError, TruncGauss};

/// Minimum revealed bids per opponent before a fit is attempted.
pub const MIN_OBSERVATIONS: usize = 10;

/// A model of one opponent's bid distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OpponentModel {
    TruncGauss(TruncGauss),
    Uniform {
        lower: f64,
        upper: f64,
    },
    /// Always bids exactly this value.
    PointMass(f64),
}

impl OpponentModel {
    /// P(opponent bid < b).
    pub fn prob_below(&self, b: f64) -> f64 {
        match self {
            OpponentModel::TruncGauss(p) => p.cdf(b),
            OpponentModel::Uniform { lower, upper } => {
                ((b - lower) / (upper - lower)).clamp(0.0, 1.0)
            }
            OpponentModel::PointMass(x) => {
                if *x < b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn prepare(&self) -> PreparedModel {
        match self {
            OpponentModel::TruncGauss(p) => {
                let alpha = (p.lower - p.mu) / p.sigma;
                let beta = (p.upper - p.mu) / p.sigma;
                let (phi_a, phi_b) = (normal::cdf(alpha), normal::cdf(beta));
                // direct differences are exact enough unless the mass sits in a far tail
                if phi_b - phi_a > 1e-8 {
                    PreparedModel::Direct {
                        params: *p,
                        phi_lower: phi_a,
                        mass: phi_b - phi_a,
                    }
                } else {
                    PreparedModel::Exact(*self)
                }
            }
            _ => PreparedModel::Exact(*self),
        }
    }
}

enum PreparedModel {
    Direct {
        params: TruncGauss,
        phi_lower: f64,
        mass: f64,
    },
    Exact(OpponentModel),
}

impl PreparedModel {
    fn prob_below(&self, b: f64) -> f64 {
        match self {
            PreparedModel::Direct {
                params,
                phi_lower,
                mass,
            } => {
                if b <= params.lower {
                    0.0
                } else if b >= params.upper {
                    1.0
                } else {
                    ((normal::cdf((b - params.mu) / params.sigma) - phi_lower) / mass)
                        .clamp(0.0, 1.0)
                }
            }
            PreparedModel::Exact(m) => m.prob_below(b),
        }
    }
}

/// Result of fitting every opponent.
#[derive(Debug, Clone, PartialEq)]
pub struct OpponentFit {
    /// One model per opponent; empty when `fallback` is set.
    pub models: Vec<TruncGauss>,
    /// Some opponent has fewer than `min_observations` revealed bids.
    pub fallback: bool,
}

/// Maximum-likelihood truncated-Gaussian fit on [0, 1] for each opponent's
/// revealed bids.
pub fn fit_opponents<H: AsRef<[f64]>>(
    histories: &[H],
    min_observations: usize,
) -> Result<OpponentFit, NumericsError> {
    let min_obs = min_observations.max(MIN_OBSERVATIONS);
    if histories.iter().any(|h| h.as_ref().len() < min_obs) {
        return Ok(OpponentFit {
            models: Vec::new(),
            fallback: true,
        });
    }
    let models = histories
        .iter()
        .map(|h| fit_mle(h.as_ref(), 0.0, 1.0))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OpponentFit {
        models,
        fallback: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub bid: f64,
    pub expected_payoff: f64,
}

/// Grid points 0, Δ, 2Δ, … up to `valuation`.
pub fn bid_grid(valuation: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = if valuation > 0.0 {
        (valuation / step + 1e-9).floor() as usize
    } else {
        0
    };
    (0..=n).map(move |k| k as f64 * step)
}

/// Expected margin of bidding `b`: (v − b) · Π_j P(opponent j bids below b),
/// opponents treated as independent.
pub fn expected_payoff(valuation: f64, bid: f64, models: &[OpponentModel]) -> f64 {
    (valuation - bid) * models.iter().map(|m| m.prob_below(bid)).product::<f64>()
}

/// Exhaustive grid search for the bid with the highest expected margin.
/// Ties go to the lowest bid.
pub fn best_response(valuation: f64, models: &[OpponentModel], step: f64) -> BestResponse {
    let prepared: Vec<PreparedModel> = models.iter().map(OpponentModel::prepare).collect();
    best_response_with(valuation, step, |b| {
        let mut p = 1.0;
        for m in &prepared {
            p *= m.prob_below(b);
            if p == 0.0 {
                break;
            }
        }
        p
    })
}

/// Grid search against an arbitrary probability-of-winning curve.
pub fn best_response_with<F: Fn(f64) -> f64>(
    valuation: f64,
    step: f64,
    win_prob: F,
) -> BestResponse {
    let mut best = BestResponse {
        bid: 0.0,
        expected_payoff: valuation.max(0.0) * win_prob(0.0),
    };
    for b in bid_grid(valuation, step).skip(1) {
        let payoff = (valuation - b) * win_prob(b);
        if payoff > best.expected_payoff {
            best = BestResponse {
                bid: b,
                expected_payoff: payoff,
            };
        }
    }
    best
}
