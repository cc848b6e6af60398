use serde::{Deserialize, Serialize};

use super::oracle::OracleConfig;
use super::{AgentError, Archetype, Variant};
use crate::market::{AgentId, Qty};

/// Agent id used by the background oracle; traders are numbered from 1.
pub const ORACLE_AGENT: AgentId = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketMakerConfig {
    pub count: usize,
    /// Mean ticks between wakeups.
    pub wake_mean: f64,
    pub size: [Qty; 2],
    /// Assigned round-robin across the market makers.
    pub variants: Vec<Variant>,
    /// Ladder depth bounds for the deep variant.
    pub levels: [u32; 2],
    pub gamma: f64,
    pub k: f64,
    /// Mid observations used to estimate the variance of mid changes.
    pub vol_window: usize,
}

impl Default for MarketMakerConfig {
    fn default() -> Self {
        MarketMakerConfig {
            count: 5,
            wake_mean: 40.0,
            size: [5, 25],
            variants: vec![
                Variant::TopOfBook,
                Variant::Deep,
                Variant::AvellanedaStoikov,
            ],
            levels: [1, 3],
            gamma: 0.1,
            k: 1.5,
            vol_window: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsumerConfig {
    pub count: usize,
    pub wake_mean: f64,
    pub size: [Qty; 2],
}

impl Default for ConsumerConfig {
    fn default() -> Self {
        ConsumerConfig {
            count: 20,
            wake_mean: 200.0,
            size: [20, 60],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReversionConfig {
    pub count: usize,
    pub wake_mean: f64,
    pub size: [Qty; 2],
    pub variants: Vec<Variant>,
    pub alpha: f64,
    pub z: f64,
    pub std_window: usize,
    pub rsi_period: usize,
    pub overbought: f64,
    pub oversold: f64,
}

impl Default for ReversionConfig {
    fn default() -> Self {
        ReversionConfig {
            count: 20,
            wake_mean: 30.0,
            size: [1, 15],
            variants: vec![Variant::Ewma, Variant::Rsi],
            alpha: 0.06,
            z: 2.0,
            std_window: 50,
            rsi_period: 14,
            overbought: 70.0,
            oversold: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentumConfig {
    pub count: usize,
    pub wake_mean: f64,
    pub size: [Qty; 2],
    pub short: usize,
    pub long: usize,
}

impl Default for MomentumConfig {
    fn default() -> Self {
        MomentumConfig {
            count: 20,
            wake_mean: 100.0,
            size: [1, 15],
            short: 20,
            long: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    /// 09:30 to 16:00 at one tick per second.
    pub day_ticks: u64,
    /// Replace the archetype counts with 67 / 500 / 500 / 500.
    pub full_scale: bool,
    /// Per-agent wakeup means are scaled by U[1 − j, 1 + j] at setup.
    pub wake_jitter: f64,
    /// Mid observations each agent keeps.
    pub history: usize,
    /// Snapshots each agent keeps for order flow imbalance.
    pub ofi_window: usize,
    pub oracle: OracleConfig,
    pub mm: MarketMakerConfig,
    pub lc: ConsumerConfig,
    pub me: ReversionConfig,
    pub mo: MomentumConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 1,
            day_ticks: 23_400,
            full_scale: false,
            wake_jitter: 0.2,
            history: 64,
            ofi_window: 10,
            oracle: OracleConfig::default(),
            mm: MarketMakerConfig::default(),
            lc: ConsumerConfig::default(),
            me: ReversionConfig::default(),
            mo: MomentumConfig::default(),
        }
    }
}

fn check_size(name: &str, size: [Qty; 2]) -> Result<(), AgentError> {
    if size[0] == 0 || size[0] > size[1] {
        return Err(AgentError::InvalidConfig(format!(
            "{name}.size {size:?} must satisfy 1 <= min <= max"
        )));
    }
    Ok(())
}

fn check_wake(name: &str, mean: f64) -> Result<(), AgentError> {
    if !(mean >= 1.0 && mean.is_finite()) {
        return Err(AgentError::InvalidConfig(format!(
            "{name}.wake_mean must be at least 1, got {mean}"
        )));
    }
    Ok(())
}

impl SimConfig {
    /// Agents per archetype, in code order.
    pub fn counts(&self) -> [usize; 4] {
        if self.full_scale {
            [67, 500, 500, 500]
        } else {
            [self.mm.count, self.lc.count, self.me.count, self.mo.count]
        }
    }

    pub fn total_agents(&self) -> usize {
        self.counts().iter().sum()
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |msg: String| Err(AgentError::InvalidConfig(msg));
        if self.day_ticks == 0 {
            return bad("day_ticks must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.wake_jitter) {
            return bad(format!(
                "wake_jitter must lie in [0, 1), got {}",
                self.wake_jitter
            ));
        }
        if self.ofi_window < 2 {
            return bad(format!(
                "ofi_window must be at least 2, got {}",
                self.ofi_window
            ));
        }
        check_size("mm", self.mm.size)?;
        check_size("lc", self.lc.size)?;
        check_size("me", self.me.size)?;
        check_size("mo", self.mo.size)?;
        check_size("oracle", self.oracle.size)?;
        check_wake("mm", self.mm.wake_mean)?;
        check_wake("lc", self.lc.wake_mean)?;
        check_wake("me", self.me.wake_mean)?;
        check_wake("mo", self.mo.wake_mean)?;
        let allowed = |arch: Archetype, v: &[Variant], ok: &[Variant]| {
            if v.is_empty() || v.iter().any(|x| !ok.contains(x)) {
                bad(format!(
                    "{arch} variants {v:?} must be a non-empty subset of {ok:?}"
                ))
            } else {
                Ok(())
            }
        };
        allowed(
            Archetype::MM,
            &self.mm.variants,
            &[
                Variant::TopOfBook,
                Variant::Deep,
                Variant::AvellanedaStoikov,
            ],
        )?;
        allowed(
            Archetype::ME,
            &self.me.variants,
            &[Variant::Ewma, Variant::Rsi],
        )?;
        if self.mm.levels[0] == 0 || self.mm.levels[0] > self.mm.levels[1] {
            return bad(format!(
                "mm.levels {:?} must satisfy 1 <= min <= max",
                self.mm.levels
            ));
        }
        if !(self.mm.gamma > 0.0) || !(self.mm.k > 0.0) {
            return bad(format!(
                "mm.gamma and mm.k must be positive, got {} and {}",
                self.mm.gamma, self.mm.k
            ));
        }
        if !(self.me.alpha > 0.0 && self.me.alpha <= 1.0) || self.me.z.is_nan() || self.me.z < 0.0 {
            return bad("me.alpha must lie in (0, 1] and me.z be non-negative".into());
        }
        if self.me.std_window < 2 || self.me.rsi_period == 0 {
            return bad("me.std_window must be at least 2 and me.rsi_period positive".into());
        }
        if !(self.me.oversold <= self.me.overbought) {
            return bad("me.oversold must not exceed me.overbought".into());
        }
        if self.mo.short == 0 || self.mo.short > self.mo.long {
            return bad(format!(
                "mo.short {} must lie in 1..=mo.long {}",
                self.mo.short, self.mo.long
            ));
        }
        let need = [
            self.mo.long,
            self.me.rsi_period + 1,
            self.mm.vol_window + 1,
            5,
        ]
        .into_iter()
        .max()
        .unwrap_or(5);
        if self.history < need {
            return bad(format!("history {} must be at least {need}", self.history));
        }
        let o = &self.oracle;
        if !(0.0..=1.0).contains(&o.kappa) || !(o.eta >= 0.0 && o.eta.is_finite()) {
            return bad("oracle.kappa must lie in [0, 1] and oracle.eta be non-negative".into());
        }
        if !(o.arrival_rate >= 0.0 && o.arrival_rate.is_finite())
            || !(0.0..=1.0).contains(&o.market_fraction)
        {
            return bad(
                "oracle.arrival_rate must be non-negative and market_fraction in [0, 1]".into(),
            );
        }
        if o.depth < 1 || o.lifetime == 0 || !(o.mean >= 1.0 && o.mean.is_finite()) {
            return bad(
                "oracle.depth and oracle.lifetime must be positive and oracle.mean at least 1"
                    .into(),
            );
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SimConfig::default().validate().unwrap();
        assert_eq!(SimConfig::default().counts(), [5, 20, 20, 20]);
        let full = SimConfig {
            full_scale: true,
            ..SimConfig::default()
        };
        assert_eq!(full.counts(), [67, 500, 500, 500]);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = SimConfig::default();
        c.mm.gamma = 0.0;
        assert!(c.validate().is_err());
        let mut c = SimConfig::default();
        c.lc.size = [5, 4];
        assert!(c.validate().is_err());
        let mut c = SimConfig::default();
        c.me.variants = vec![Variant::Deep];
        assert!(c.validate().is_err());
        let c = SimConfig {
            history: 20,
            ..SimConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn toml_sections() {
        let text = "seed = 9\n[lc]\ncount = 3\n[me]\nvariants = [\"rsi\"]\n";
        let c: SimConfig = toml::from_str(text).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.lc.count, 3);
        assert_eq!(c.lc.size, ConsumerConfig::default().size);
        assert_eq!(c.me.variants, vec![Variant::Rsi]);
        let round: SimConfig =
            toml::from_str(&toml::to_string(&SimConfig::default()).unwrap()).unwrap();
        assert_eq!(round, SimConfig::default());
    }
}
