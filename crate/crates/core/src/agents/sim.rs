use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::config::{SimConfig, ORACLE_AGENT};
use super::history::MidHistory;
use super::oracle::Oracle;
use super::reversion::{EwmaSignal, RsiSignal};
use super::strategy::{
    draw_size, liquidity_consumer, mm_avellaneda_stoikov, mm_deep, mm_top_of_book, momentum,
    AsParams,
};
use super::{AgentError, Archetype, Intent, Variant};
use crate::market::{
    order_flow_imbalance, AgentId, Book, Fill, LobSnapshot, Order, OrderId, Side, Submission,
};

/// Number of agent-observed mids carried by each record.
pub const RECORD_MIDS: usize = 5;

/// One trader order with the context it was placed in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub seed: u64,
    pub archetype: Archetype,
    pub variant: Variant,
    pub order: Order,
    /// Book state immediately before submission.
    pub snapshot: LobSnapshot,
    /// The agent's latest observed mids, oldest first, up to 5.
    pub mids: Vec<f64>,
    /// Order flow imbalance over the agent's recently observed snapshots;
    /// `None` unless at least two were seen and all were two-sided.
    pub ofi: Option<f64>,
    pub ofi_window: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimOutput {
    pub trades: Vec<Fill>,
    /// End-of-tick book states.
    pub snapshots: Vec<LobSnapshot>,
    pub records: Vec<OrderRecord>,
}

struct Agent {
    id: AgentId,
    archetype: Archetype,
    variant: Variant,
    wake: Exp<f64>,
    history: MidHistory,
    observed: VecDeque<LobSnapshot>,
    ewma: Option<EwmaSignal>,
    quotes: Vec<OrderId>,
    inventory: i64,
}

struct Day<'a> {
    cfg: &'a SimConfig,
    book: Book,
    rng: ChaCha8Rng,
    out: SimOutput,
    agents: Vec<Agent>,
    last_mid: Option<f64>,
}

impl Day<'_> {
    fn submit(
        &mut self,
        agent: AgentId,
        intent: Intent,
        t: u64,
    ) -> Result<(Order, Submission), AgentError> {
        let id = self.book.next_id();
        let order = match intent.price {
            Some(p) => Order::limit(id, agent, intent.side, p, intent.size, t),
            None => Order::market(id, agent, intent.side, intent.size, t),
        };
        let sub = self.book.submit(&order)?;
        for f in sub.fills() {
            let q = f.size as i64;
            let (taker, maker) = match f.taker_side {
                Side::Buy => (q, -q),
                Side::Sell => (-q, q),
            };
            if f.taker_agent != ORACLE_AGENT {
                self.agents[f.taker_agent as usize - 1].inventory += taker;
            }
            if f.maker_agent != ORACLE_AGENT {
                self.agents[f.maker_agent as usize - 1].inventory += maker;
            }
        }
        self.out.trades.extend_from_slice(sub.fills());
        Ok((order, sub))
    }

    fn decide(&mut self, idx: usize, t: u64, signal: Option<Side>) -> Vec<Intent> {
        let cfg = self.cfg;
        let snap = self.book.snapshot(t);
        let a = &self.agents[idx];
        match a.variant {
            Variant::TopOfBook => mm_top_of_book(&snap, &mut self.rng, cfg.mm.size),
            Variant::Deep => mm_deep(&snap, &mut self.rng, cfg.mm.size, cfg.mm.levels),
            Variant::AvellanedaStoikov => {
                let sigma2 = a.history.return_variance(cfg.mm.vol_window).unwrap_or(0.0);
                let params = AsParams {
                    gamma: cfg.mm.gamma,
                    k: cfg.mm.k,
                };
                let frac = t as f64 / cfg.day_ticks as f64;
                mm_avellaneda_stoikov(
                    &snap,
                    a.inventory,
                    frac,
                    sigma2,
                    params,
                    &mut self.rng,
                    cfg.mm.size,
                )
            }
            Variant::Consumer => vec![liquidity_consumer(&mut self.rng, cfg.lc.size)],
            Variant::Ewma => signal
                .map(|side| Intent::market(side, draw_size(&mut self.rng, cfg.me.size)))
                .into_iter()
                .collect(),
            Variant::Rsi => {
                let rsi = RsiSignal {
                    period: cfg.me.rsi_period,
                    overbought: cfg.me.overbought,
                    oversold: cfg.me.oversold,
                };
                let mids: Vec<f64> = a.history.mids().collect();
                rsi.signal(&mids)
                    .map(|side| Intent::market(side, draw_size(&mut self.rng, cfg.me.size)))
                    .into_iter()
                    .collect()
            }
            Variant::Momentum => momentum(
                &a.history,
                &mut self.rng,
                cfg.mo.size,
                cfg.mo.short,
                cfg.mo.long,
            )
            .into_iter()
            .collect(),
        }
    }

    fn wake(&mut self, idx: usize, t: u64) -> Result<(), AgentError> {
        let snap = self.book.snapshot(t);
        let mid = snap.mid_price().ok().or(self.last_mid);
        let agent = &mut self.agents[idx];
        let mut signal = None;
        if let Some(m) = mid {
            agent.history.push(t, m);
            if let Some(e) = agent.ewma.as_mut() {
                signal = e.observe(m);
            }
        }
        if agent.observed.len() == self.cfg.ofi_window {
            agent.observed.pop_front();
        }
        agent.observed.push_back(snap);
        if agent.archetype == Archetype::MM {
            for id in std::mem::take(&mut agent.quotes) {
                self.book.cancel(id);
            }
        }

        let intents = self.decide(idx, t, signal);
        let (id, archetype, variant) = {
            let a = &self.agents[idx];
            (a.id, a.archetype, a.variant)
        };
        let mids: Vec<f64> = self.agents[idx].history.last_n(RECORD_MIDS).collect();
        let observed = &self.agents[idx].observed;
        let ofi_window = observed.len();
        let ofi = if ofi_window >= 2 && observed.iter().all(|s| s.is_two_sided()) {
            let window: Vec<LobSnapshot> = observed.iter().copied().collect();
            order_flow_imbalance(&window).ok()
        } else {
            None
        };
        for intent in intents {
            let pre = self.book.snapshot(t);
            let (order, sub) = self.submit(id, intent, t)?;
            if let Submission::Limit(o) = &sub {
                if o.resting > 0 {
                    self.agents[idx].quotes.push(order.id);
                }
            }
            self.out.records.push(OrderRecord {
                seed: self.cfg.seed,
                archetype,
                variant,
                order,
                snapshot: pre,
                mids: mids.clone(),
                ofi,
                ofi_window,
            });
        }
        Ok(())
    }
}

fn next_interval<R: Rng + ?Sized>(dist: &Exp<f64>, rng: &mut R) -> u64 {
    (dist.sample(rng).ceil() as u64).max(1)
}

/// Runs one seeded trading day.
///
/// Each tick the oracle withdraws stale orders and posts new ones, then every
/// trader due at that tick observes the book and acts, in wakeup order with
/// ties broken by agent id. A configuration with no traders yields empty
/// output.
pub fn simulate_day(cfg: &SimConfig) -> Result<SimOutput, AgentError> {
    cfg.validate()?;
    if cfg.total_agents() == 0 {
        return Ok(SimOutput::default());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let counts = cfg.counts();
    let mut agents = Vec::with_capacity(cfg.total_agents());
    let mut queue = BinaryHeap::new();
    for arch in Archetype::ALL {
        let (mean, variants): (f64, &[Variant]) = match arch {
            Archetype::MM => (cfg.mm.wake_mean, &cfg.mm.variants),
            Archetype::LC => (cfg.lc.wake_mean, &[Variant::Consumer]),
            Archetype::ME => (cfg.me.wake_mean, &cfg.me.variants),
            Archetype::MO => (cfg.mo.wake_mean, &[Variant::Momentum]),
        };
        for k in 0..counts[arch.code()] {
            let jitter = rng.random_range(1.0 - cfg.wake_jitter..=1.0 + cfg.wake_jitter);
            let wake = Exp::new(1.0 / (mean * jitter)).expect("positive wakeup mean");
            let variant = variants[k % variants.len()];
            let first = next_interval(&wake, &mut rng) - 1;
            let idx = agents.len();
            queue.push(Reverse((first, idx)));
            agents.push(Agent {
                id: idx as AgentId + 1,
                archetype: arch,
                variant,
                wake,
                history: MidHistory::new(cfg.history),
                observed: VecDeque::with_capacity(cfg.ofi_window),
                ewma: (variant == Variant::Ewma)
                    .then(|| EwmaSignal::new(cfg.me.alpha, cfg.me.z, cfg.me.std_window)),
                quotes: Vec::new(),
                inventory: 0,
            });
        }
    }

    let mut day = Day {
        cfg,
        book: Book::new(),
        rng,
        out: SimOutput::default(),
        agents,
        last_mid: None,
    };
    let mut oracle = Oracle::new(cfg.oracle);
    for t in 0..cfg.day_ticks {
        for id in oracle.expired(t) {
            day.book.cancel(id);
        }
        let snap = day.book.snapshot(t);
        for intent in oracle.act(&snap, &mut day.rng) {
            let (order, sub) = day.submit(ORACLE_AGENT, intent, t)?;
            if let Submission::Limit(o) = &sub {
                if o.resting > 0 {
                    oracle.track(order.id, t);
                }
            }
        }
        if let Ok(m) = day.book.snapshot(t).mid_price() {
            day.last_mid = Some(m);
        }
        while let Some(&Reverse((when, idx))) = queue.peek() {
            if when != t {
                break;
            }
            queue.pop();
            day.wake(idx, t)?;
            let next = t + next_interval(&day.agents[idx].wake, &mut day.rng);
            queue.push(Reverse((next, idx)));
            if let Ok(m) = day.book.snapshot(t).mid_price() {
                day.last_mid = Some(m);
            }
        }
        let end = day.book.snapshot(t);
        debug_assert!(!day.book.is_crossed());
        day.out.snapshots.push(end);
    }
    Ok(day.out)
}
