//! wasm-bindgen exports for the static demo page in `www/`. Every export
//! takes plain numbers or a JSON string and returns a JSON string.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use oppmod::agents::{simulate_day, Archetype, SimConfig};
use oppmod::auction::{
    best_response, bid_grid, expected_payoff, run_experiment, BidderKind, ExperimentConfig,
    OpponentModel,
};
use oppmod::numerics::TruncGauss;
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct AuctionSummary {
    pub om_share: f64,
    pub im_share: f64,
    pub random_share: f64,
    /// (episode, OM, IM, random) per episode.
    pub curves: Vec<(usize, f64, f64, f64)>,
    pub evaluation_start: usize,
}

pub fn sealed_bid_summary(
    agents: usize,
    episodes: usize,
    seed: u64,
) -> Result<AuctionSummary, String> {
    let cfg = ExperimentConfig {
        agents,
        episodes,
        ..ExperimentConfig::default()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let out = run_experiment(&cfg, seed).map_err(|e| e.to_string())?;
    let s = &out.win_stats;
    Ok(AuctionSummary {
        om_share: s.kind_share(BidderKind::Opponent),
        im_share: s.kind_share(BidderKind::Implicit),
        random_share: s.kind_share(BidderKind::Random),
        curves: out
            .curves
            .iter()
            .map(|r| (r.episode, r.om_share, r.im_share, r.random_share))
            .collect(),
        evaluation_start: cfg.evaluation_start(),
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpponentSpec {
    TruncGauss { mu: f64, sigma: f64 },
    Uniform { lower: f64, upper: f64 },
    Point { value: f64 },
}

impl OpponentSpec {
    fn model(&self) -> Result<OpponentModel, String> {
        Ok(match *self {
            OpponentSpec::TruncGauss { mu, sigma } => OpponentModel::TruncGauss(
                TruncGauss::new(mu, sigma, 0.0, 1.0).map_err(|e| e.to_string())?,
            ),
            OpponentSpec::Uniform { lower, upper } => {
                if !(lower < upper) {
                    return Err(format!("uniform bounds {lower} >= {upper}"));
                }
                OpponentModel::Uniform { lower, upper }
            }
            OpponentSpec::Point { value } => OpponentModel::PointMass(value),
        })
    }
}

#[derive(Debug, Serialize)]
pub struct PayoffCurve {
    /// (bid, expected payoff) on the grid.
    pub points: Vec<(f64, f64)>,
    pub best_bid: f64,
    pub best_payoff: f64,
}

pub fn payoff_curve(
    valuation: f64,
    opponents: &[OpponentSpec],
    step: f64,
) -> Result<PayoffCurve, String> {
    if !(valuation > 0.0 && valuation <= 1.0) || !(step > 0.0) {
        return Err("valuation must lie in (0, 1] and step be positive".into());
    }
    let models: Vec<OpponentModel> = opponents
        .iter()
        .map(|o| o.model())
        .collect::<Result<_, _>>()?;
    let br = best_response(valuation, &models, step);
    Ok(PayoffCurve {
        points: bid_grid(valuation, step)
            .map(|b| (b, expected_payoff(valuation, b, &models)))
            .collect(),
        best_bid: br.bid,
        best_payoff: br.expected_payoff,
    })
}

#[derive(Debug, Serialize)]
pub struct MidPath {
    /// (tick, mid) for two-sided ticks, thinned to at most `max_points`.
    pub mids: Vec<(u64, f64)>,
    pub trades: usize,
    /// Order records per archetype in MM, LC, ME, MO order.
    pub records: [usize; 4],
}

pub fn mid_path(ticks: u64, seed: u64, max_points: usize) -> Result<MidPath, String> {
    let cfg = SimConfig {
        day_ticks: ticks,
        seed,
        ..SimConfig::default()
    };
    let sim = simulate_day(&cfg).map_err(|e| e.to_string())?;
    let every = (sim.snapshots.len() / max_points.max(1)).max(1);
    let mids = sim
        .snapshots
        .iter()
        .step_by(every)
        .filter_map(|s| s.mid_price().ok().map(|m| (s.timestamp, m)))
        .collect();
    let mut records = [0; 4];
    for r in &sim.records {
        records[r.archetype.code()] += 1;
    }
    Ok(MidPath {
        mids,
        trades: sim.trades.len(),
        records,
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = runSealedBid)]
pub fn run_sealed_bid(agents: u32, episodes: u32, seed: u32) -> Result<String, JsError> {
    let s = sealed_bid_summary(agents as usize, episodes as usize, seed as u64)
        .map_err(|e| JsError::new(&e))?;
    to_json(&s)
}

/// `opponents` is a JSON array such as
/// `[{"kind":"uniform","lower":0,"upper":1},{"kind":"trunc_gauss","mu":0.4,"sigma":0.1}]`.
#[wasm_bindgen(js_name = bestResponseCurve)]
pub fn best_response_curve(valuation: f64, opponents: &str, step: f64) -> Result<String, JsError> {
    let specs: Vec<OpponentSpec> =
        serde_json::from_str(opponents).map_err(|e| JsError::new(&e.to_string()))?;
    let c = payoff_curve(valuation, &specs, step).map_err(|e| JsError::new(&e))?;
    to_json(&c)
}

#[wasm_bindgen(js_name = simulateLob)]
pub fn simulate_lob(ticks: u32, seed: u32) -> Result<String, JsError> {
    let p = mid_path(ticks as u64, seed as u64, 1500).map_err(|e| JsError::new(&e))?;
    to_json(&p)
}

#[wasm_bindgen(js_name = archetypeNames)]
pub fn archetype_names() -> String {
    Archetype::ALL.map(|a| a.name()).join(",")
}
