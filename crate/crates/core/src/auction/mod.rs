//! Iterated first-price sealed-bid auctions with revealed bids.
//!
//! Random bidders draw from fixed truncated Gaussians, the implicit modeler
//! learns its own policy by REINFORCE, and the opponent modeler fits every
//! rival's bid distribution and plays a grid best response.

mod experiment;
mod opponent;
mod reinforce;
mod round;

use thiserror::Error;

use crate::numerics::NumericsError;

pub use experiment::{
    draw_bidders, run_experiment, run_seeds, write_curves_csv, write_winstats_csv, Auction, Bidder,
    BidderKind, EpisodeRecord, ExperimentConfig, ExperimentOutput, WinStats,
};
pub use opponent::{
    best_response, best_response_with, bid_grid, expected_payoff, fit_opponents, BestResponse,
    OpponentFit, OpponentModel, MIN_OBSERVATIONS,
};
pub use reinforce::{reinforce_update, ReinforceConfig, RunningMean};
pub use round::{resolve, AuctionResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuctionError {
    #[error("an auction needs at least 2 bidders, got {0}")]
    TooFewBidders(usize),
    #[error("{bids} bids but {valuations} valuations")]
    LengthMismatch { bids: usize, valuations: usize },
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
