use serde::{Deserialize, Serialize};

use crate::numerics::TruncGauss;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReinforceConfig {
    pub learning_rate: f64,
    /// Subtract the running mean reward from every return.
    pub use_baseline: bool,
    /// Weight kept by the running baseline at each update.
    pub baseline_decay: f64,
}

impl Default for ReinforceConfig {
    fn default() -> Self {
        ReinforceConfig {
            learning_rate: 0.005,
            use_baseline: true,
            baseline_decay: 0.9,
        }
    }
}

/// Exponentially weighted running mean of episode rewards.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunningMean {
    value: Option<f64>,
}

impl RunningMean {
    pub fn get(&self) -> f64 {
        self.value.unwrap_or(0.0)
    }

    pub fn update(&mut self, x: f64, decay: f64) {
        self.value = Some(match self.value {
            None => x,
            Some(v) => decay * v + (1.0 - decay) * x,
        });
    }
}

/// One policy-gradient step on a truncated-Gaussian bidding policy over
/// `[0, v]`, parameterized by (μ, ln σ):
///
/// θ ← θ + lr · mean_t[(R_t − baseline) ∇θ ln π(b_t)]
///
/// μ is kept in [0, v] and σ in [1e-3, v].
pub fn reinforce_update(
    policy: &TruncGauss,
    trajectory: &[(f64, f64)],
    baseline: f64,
    config: &ReinforceConfig,
) -> TruncGauss {
    if trajectory.is_empty() {
        return *policy;
    }
    let baseline = if config.use_baseline { baseline } else { 0.0 };
    let (mut g_mu, mut g_ls) = (0.0, 0.0);
    for &(bid, reward) in trajectory {
        let advantage = reward - baseline;
        if advantage == 0.0 {
            continue;
        }
        let bid = bid.clamp(policy.lower, policy.upper);
        let (d_mu, d_ls) = policy
            .log_pdf_grad(bid)
            .expect("bid clamped into policy support");
        g_mu += advantage * d_mu;
        g_ls += advantage * d_ls;
    }
    let n = trajectory.len() as f64;
    let v = policy.upper;
    let mu = (policy.mu + config.learning_rate * g_mu / n).clamp(0.0, v);
    let log_sigma =
        (policy.sigma.ln() + config.learning_rate * g_ls / n).clamp(1e-3f64.ln(), v.ln());
    TruncGauss {
        mu,
        sigma: log_sigma.exp(),
        ..*policy
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn policy() -> TruncGauss {
        TruncGauss::new(0.5, 0.2, 0.0, 1.0).unwrap()
    }

    #[test]
    fn positive_advantage_above_mean_raises_mu() {
        let p = policy();
        let cfg = ReinforceConfig::default();
        let next = reinforce_update(&p, &[(0.7, 1.0)], 0.0, &cfg);
        assert!(next.mu > p.mu);
        let next = reinforce_update(&p, &[(0.3, 1.0)], 0.0, &cfg);
        assert!(next.mu < p.mu);
    }

    #[test]
    fn zero_advantage_is_a_no_op() {
        let p = policy();
        let cfg = ReinforceConfig::default();
        let traj = [(0.2, 0.4), (0.9, 0.4), (0.55, 0.4)];
        assert_eq!(reinforce_update(&p, &traj, 0.4, &cfg), p);
        let no_base = ReinforceConfig {
            use_baseline: false,
            ..cfg
        };
        assert_eq!(reinforce_update(&p, &[(0.3, 0.0)], 0.7, &no_base), p);
    }

    #[test]
    fn bandit_converges_to_reward_peak() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let cfg = ReinforceConfig {
            learning_rate: 0.02,
            ..ReinforceConfig::default()
        };
        let mut p = policy();
        let mut baseline = RunningMean::default();
        // 5,000 rounds in episodes of 50
        for _ in 0..100 {
            let traj: Vec<(f64, f64)> = (0..50)
                .map(|_| {
                    let b = p.sample(&mut rng);
                    (b, -(b - 0.3) * (b - 0.3))
                })
                .collect();
            let mean = traj.iter().map(|t| t.1).sum::<f64>() / traj.len() as f64;
            p = reinforce_update(&p, &traj, baseline.get(), &cfg);
            baseline.update(mean, cfg.baseline_decay);
        }
        assert!((0.25..=0.35).contains(&p.mu), "{p:?}");
    }
}
