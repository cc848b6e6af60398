use std::collections::VecDeque;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::opponent::{best_response, fit_opponents, OpponentModel, MIN_OBSERVATIONS};
use super::reinforce::{reinforce_update, ReinforceConfig, RunningMean};
use super::round::{resolve, AuctionResult};
use super::AuctionError;
use crate::numerics::TruncGauss;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Total bidders, learners included.
    pub agents: usize,
    /// Rounds per episode.
    pub rounds: usize,
    pub episodes: usize,
    /// Independent seeds averaged by [`run_seeds`].
    pub seeds: usize,
    /// Fraction of leading episodes left out of the win statistics.
    pub burn_in: f64,
    /// Discount on returns. Rounds are independent, so only the per-round
    /// reward enters the update.
    pub gamma: f64,
    pub opponent_modeler: bool,
    pub implicit_modeler: bool,
    pub learner_valuation: f64,
    pub random_valuation: [f64; 2],
    /// Random bidder means, as fractions of their valuation.
    pub random_mu_fraction: [f64; 2],
    pub random_sigma: [f64; 2],
    /// Starting policy of the implicit modeler, also played by the opponent
    /// modeler before it has enough reveals.
    pub initial_mu: f64,
    pub initial_sigma: f64,
    pub grid_step: f64,
    /// Most recent revealed bids kept per opponent.
    pub om_window: usize,
    pub reinforce: ReinforceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            agents: 10,
            rounds: 50,
            episodes: 400,
            seeds: 1,
            burn_in: 0.5,
            gamma: 1.0,
            opponent_modeler: true,
            implicit_modeler: true,
            learner_valuation: 1.0,
            random_valuation: [0.6, 0.9],
            random_mu_fraction: [0.3, 0.8],
            random_sigma: [0.05, 0.2],
            initial_mu: 0.5,
            initial_sigma: 0.2,
            grid_step: 1e-3,
            om_window: 150,
            reinforce: ReinforceConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), AuctionError> {
        let bad = |msg: String| Err(AuctionError::InvalidConfig(msg));
        let learners = self.opponent_modeler as usize + self.implicit_modeler as usize;
        if self.agents < 2 {
            return bad(format!("agents must be at least 2, got {}", self.agents));
        }
        if self.agents < learners {
            return bad(format!(
                "{} agents cannot hold {learners} learners",
                self.agents
            ));
        }
        if self.rounds == 0 || self.episodes == 0 || self.seeds == 0 {
            return bad("rounds, episodes and seeds must be positive".into());
        }
        if !(0.0..1.0).contains(&self.burn_in) || self.evaluation_start() >= self.episodes {
            return bad(format!(
                "burn_in {} leaves no evaluation episodes",
                self.burn_in
            ));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        let in_unit = |x: f64| x > 0.0 && x <= 1.0;
        if !in_unit(self.learner_valuation) {
            return bad(format!(
                "learner_valuation must lie in (0, 1], got {}",
                self.learner_valuation
            ));
        }
        let [v0, v1] = self.random_valuation;
        if !(in_unit(v0) && in_unit(v1) && v0 <= v1) {
            return bad(format!(
                "random_valuation {:?} must be an ordered range in (0, 1]",
                self.random_valuation
            ));
        }
        let [m0, m1] = self.random_mu_fraction;
        if !(0.0..=1.0).contains(&m0) || !(0.0..=1.0).contains(&m1) || m0 > m1 {
            return bad(format!(
                "random_mu_fraction {:?} must be an ordered range in [0, 1]",
                self.random_mu_fraction
            ));
        }
        let [s0, s1] = self.random_sigma;
        if !(s0 > 0.0 && s0 <= s1 && s1.is_finite()) {
            return bad(format!(
                "random_sigma {:?} must be an ordered positive range",
                self.random_sigma
            ));
        }
        TruncGauss::new(
            self.initial_mu,
            self.initial_sigma,
            0.0,
            self.learner_valuation,
        )?;
        if !(self.grid_step > 0.0 && self.grid_step <= self.learner_valuation) {
            return bad(format!(
                "grid_step must lie in (0, learner_valuation], got {}",
                self.grid_step
            ));
        }
        if self.om_window < MIN_OBSERVATIONS {
            return bad(format!(
                "om_window must be at least {MIN_OBSERVATIONS}, got {}",
                self.om_window
            ));
        }
        let rl = &self.reinforce;
        if !(rl.learning_rate.is_finite() && rl.learning_rate >= 0.0)
            || !(0.0..1.0).contains(&rl.baseline_decay)
        {
            return bad(
                "reinforce.learning_rate must be non-negative and baseline_decay in [0, 1)".into(),
            );
        }
        Ok(())
    }

    /// Index of the first episode counted in the win statistics.
    pub fn evaluation_start(&self) -> usize {
        (self.burn_in * self.episodes as f64).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BidderKind {
    Random,
    Implicit,
    Opponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bidder {
    pub kind: BidderKind,
    pub valuation: f64,
    /// Bid distribution on [0, valuation]. The opponent modeler only plays it
    /// during cold start.
    pub policy: TruncGauss,
}

impl Bidder {
    pub fn new(
        kind: BidderKind,
        valuation: f64,
        mu: f64,
        sigma: f64,
    ) -> Result<Self, AuctionError> {
        Ok(Bidder {
            kind,
            valuation,
            policy: TruncGauss::new(mu, sigma, 0.0, valuation)?,
        })
    }
}

/// Builds the bidder population: opponent modeler first, then the implicit
/// modeler, then random bidders with parameters drawn from `rng`.
pub fn draw_bidders<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    rng: &mut R,
) -> Result<Vec<Bidder>, AuctionError> {
    let mut bidders = Vec::with_capacity(cfg.agents);
    let learner = |kind| {
        Bidder::new(
            kind,
            cfg.learner_valuation,
            cfg.initial_mu,
            cfg.initial_sigma,
        )
    };
    if cfg.opponent_modeler {
        bidders.push(learner(BidderKind::Opponent)?);
    }
    if cfg.implicit_modeler {
        bidders.push(learner(BidderKind::Implicit)?);
    }
    while bidders.len() < cfg.agents {
        let v = rng.random_range(cfg.random_valuation[0]..=cfg.random_valuation[1]);
        let mu = v * rng.random_range(cfg.random_mu_fraction[0]..=cfg.random_mu_fraction[1]);
        let sigma = rng.random_range(cfg.random_sigma[0]..=cfg.random_sigma[1]);
        bidders.push(Bidder::new(BidderKind::Random, v, mu, sigma)?);
    }
    Ok(bidders)
}

/// Win counts per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinStats {
    pub kinds: Vec<BidderKind>,
    pub wins: Vec<u64>,
}

impl WinStats {
    pub fn new(kinds: Vec<BidderKind>) -> Self {
        let wins = vec![0; kinds.len()];
        WinStats { kinds, wins }
    }

    pub fn rounds(&self) -> u64 {
        self.wins.iter().sum()
    }

    pub fn shares(&self) -> Vec<f64> {
        let total = self.rounds().max(1) as f64;
        self.wins.iter().map(|&w| w as f64 / total).collect()
    }

    /// Pooled share of every agent of `kind`.
    pub fn kind_share(&self, kind: BidderKind) -> f64 {
        let total = self.rounds();
        if total == 0 {
            return 0.0;
        }
        let wins: u64 = self
            .kinds
            .iter()
            .zip(&self.wins)
            .filter(|(k, _)| **k == kind)
            .map(|(_, w)| w)
            .sum();
        wins as f64 / total as f64
    }

    pub fn merge(&mut self, other: &WinStats) {
        assert_eq!(
            self.kinds, other.kinds,
            "merging win stats of different populations"
        );
        for (a, b) in self.wins.iter_mut().zip(&other.wins) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub om_share: f64,
    pub im_share: f64,
    pub random_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    /// Wins over the evaluation episodes only.
    pub win_stats: WinStats,
    /// Per-episode shares over every episode, burn-in included.
    pub curves: Vec<EpisodeRecord>,
    pub bidders: Vec<Bidder>,
}

/// Live state of one seeded experiment.
pub struct Auction {
    cfg: ExperimentConfig,
    bidders: Vec<Bidder>,
    revealed: Vec<VecDeque<f64>>,
    baselines: Vec<RunningMean>,
    rng: ChaCha8Rng,
    round: usize,
}

impl Auction {
    pub fn new(cfg: &ExperimentConfig, seed: u64) -> Result<Self, AuctionError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bidders = draw_bidders(cfg, &mut rng)?;
        Ok(Self::with_bidders(cfg, bidders, rng))
    }

    pub fn with_bidders(cfg: &ExperimentConfig, bidders: Vec<Bidder>, rng: ChaCha8Rng) -> Self {
        let n = bidders.len();
        Auction {
            cfg: cfg.clone(),
            bidders,
            revealed: vec![VecDeque::with_capacity(cfg.om_window); n],
            baselines: vec![RunningMean::default(); n],
            rng,
            round: 0,
        }
    }

    pub fn bidders(&self) -> &[Bidder] {
        &self.bidders
    }

    fn opponent_bid(&mut self, i: usize) -> Result<f64, AuctionError> {
        let histories: Vec<&[f64]> = self
            .revealed
            .iter_mut()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, h)| &*h.make_contiguous())
            .collect();
        let fit = fit_opponents(&histories, MIN_OBSERVATIONS)?;
        let me = self.bidders[i];
        if fit.fallback {
            return Ok(me.policy.sample(&mut self.rng));
        }
        let models: Vec<OpponentModel> = fit
            .models
            .into_iter()
            .map(OpponentModel::TruncGauss)
            .collect();
        Ok(best_response(me.valuation, &models, self.cfg.grid_step).bid)
    }

    /// Collects one bid per agent, resolves the round and reveals every bid.
    pub fn run_round(&mut self) -> Result<AuctionResult, AuctionError> {
        let mut bids = Vec::with_capacity(self.bidders.len());
        for i in 0..self.bidders.len() {
            let b = self.bidders[i];
            let raw = match b.kind {
                BidderKind::Random | BidderKind::Implicit => b.policy.sample(&mut self.rng),
                BidderKind::Opponent => self.opponent_bid(i)?,
            };
            let bid = raw.clamp(0.0, b.valuation);
            if bid != raw {
                log::warn!("agent {i} bid {raw} outside [0, {}], clamped", b.valuation);
            }
            bids.push(bid);
        }
        let valuations: Vec<f64> = self.bidders.iter().map(|b| b.valuation).collect();
        let result = resolve(self.round, &bids, &valuations, &mut self.rng)?;
        for (h, &b) in self.revealed.iter_mut().zip(&bids) {
            if h.len() == self.cfg.om_window {
                h.pop_front();
            }
            h.push_back(b);
        }
        self.round += 1;
        Ok(result)
    }

    /// Plays one episode, updates the implicit modelers and returns the
    /// episode's win counts.
    pub fn run_episode(&mut self) -> Result<Vec<u64>, AuctionError> {
        let n = self.bidders.len();
        let mut wins = vec![0u64; n];
        let mut trajectories: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(self.cfg.rounds); n];
        for _ in 0..self.cfg.rounds {
            let r = self.run_round()?;
            wins[r.winner] += 1;
            for i in 0..n {
                if self.bidders[i].kind == BidderKind::Implicit {
                    trajectories[i].push((r.bids[i], r.rewards[i]));
                }
            }
        }
        for (i, traj) in trajectories.iter().enumerate() {
            if traj.is_empty() {
                continue;
            }
            let mean = traj.iter().map(|t| t.1).sum::<f64>() / traj.len() as f64;
            let b = &mut self.bidders[i];
            b.policy = reinforce_update(
                &b.policy,
                traj,
                self.baselines[i].get(),
                &self.cfg.reinforce,
            );
            self.baselines[i].update(mean, self.cfg.reinforce.baseline_decay);
        }
        Ok(wins)
    }
}

/// Runs every episode of one seeded experiment.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<ExperimentOutput, AuctionError> {
    let auction = Auction::new(cfg, seed)?;
    run_auction(auction)
}

fn run_auction(mut auction: Auction) -> Result<ExperimentOutput, AuctionError> {
    let kinds: Vec<BidderKind> = auction.bidders().iter().map(|b| b.kind).collect();
    let mut win_stats = WinStats::new(kinds.clone());
    let mut curves = Vec::with_capacity(auction.cfg.episodes);
    let start = auction.cfg.evaluation_start();
    for episode in 0..auction.cfg.episodes {
        let wins = auction.run_episode()?;
        let ep = WinStats {
            kinds: kinds.clone(),
            wins,
        };
        curves.push(EpisodeRecord {
            episode,
            om_share: ep.kind_share(BidderKind::Opponent),
            im_share: ep.kind_share(BidderKind::Implicit),
            random_share: ep.kind_share(BidderKind::Random),
        });
        if episode >= start {
            win_stats.merge(&ep);
        }
    }
    Ok(ExperimentOutput {
        win_stats,
        curves,
        bidders: auction.bidders,
    })
}

/// Runs `cfg.seeds` experiments on seeds `seed, seed + 1, …`, spread over up
/// to `jobs` threads. Win counts are pooled and curves averaged per episode;
/// the result does not depend on `jobs`.
pub fn run_seeds(
    cfg: &ExperimentConfig,
    seed: u64,
    jobs: usize,
) -> Result<ExperimentOutput, AuctionError> {
    cfg.validate()?;
    let seeds: Vec<u64> = (0..cfg.seeds as u64)
        .map(|k| seed.wrapping_add(k))
        .collect();
    let jobs = jobs.clamp(1, seeds.len());
    let chunk = seeds.len().div_ceil(jobs);
    let outputs: Vec<Result<ExperimentOutput, AuctionError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&s| run_experiment(cfg, s))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("experiment thread panicked"))
            .collect()
    });
    let mut outputs = outputs.into_iter();
    let mut total = outputs.next().expect("at least one seed")?;
    let mut count = 1.0;
    for out in outputs {
        let out = out?;
        total.win_stats.merge(&out.win_stats);
        for (acc, rec) in total.curves.iter_mut().zip(&out.curves) {
            acc.om_share += rec.om_share;
            acc.im_share += rec.im_share;
            acc.random_share += rec.random_share;
        }
        count += 1.0;
    }
    for rec in &mut total.curves {
        rec.om_share /= count;
        rec.im_share /= count;
        rec.random_share /= count;
    }
    Ok(total)
}

/// Three aggregate rows: OM, IM and pooled random bidders.
pub fn write_winstats_csv<W: Write>(mut w: W, stats: &WinStats) -> io::Result<()> {
    writeln!(w, "kind,wins,share")?;
    for (label, kind) in [
        ("OM", BidderKind::Opponent),
        ("IM", BidderKind::Implicit),
        ("Random", BidderKind::Random),
    ] {
        let wins: u64 = stats
            .kinds
            .iter()
            .zip(&stats.wins)
            .filter(|(k, _)| **k == kind)
            .map(|(_, w)| w)
            .sum();
        writeln!(w, "{label},{wins},{}", stats.kind_share(kind))?;
    }
    Ok(())
}

pub fn write_curves_csv<W: Write>(mut w: W, curves: &[EpisodeRecord]) -> io::Result<()> {
    writeln!(w, "episode,om_share,im_share,random_share")?;
    for r in curves {
        writeln!(
            w,
            "{},{},{},{}",
            r.episode, r.om_share, r.im_share, r.random_share
        )?;
    }
    Ok(())
}
