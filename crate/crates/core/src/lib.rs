//! Auction-market simulation and opponent modeling.
//!
//! * [`market`]: limit order book and microstructure metrics.
//! * [`agents`]: trading-agent archetypes and the day simulator.
//! * [`numerics`]: truncated Gaussians, MLP + Adam, PCA, confusion matrices.
//! * [`auction`]: iterated first-price sealed-bid auctions with implicit- and
//!   opponent-modeling learners.
//! * [`dataset`]: labeled state-action samples from simulated order flow.
//! * [`classifier`]: archetype classifier training and evaluation.

// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::excessive_precision)]

pub mod agents;
pub mod auction;
pub mod classifier;
pub mod dataset;
pub mod market;
pub mod numerics;
