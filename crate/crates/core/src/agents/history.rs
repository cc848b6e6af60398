use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Fixed-capacity record of the mid prices one agent has observed, oldest
/// first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MidHistory {
    capacity: usize,
    obs: VecDeque<(u64, f64)>,
}

impl MidHistory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "history capacity must be positive");
        MidHistory {
            capacity,
            obs: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    /// Appends an observation. Timestamps must not go backwards.
    pub fn push(&mut self, timestamp: u64, mid: f64) {
        if let Some(&(last, _)) = self.obs.back() {
            assert!(timestamp >= last, "mid history must be chronological");
        }
        if self.obs.len() == self.capacity {
            self.obs.pop_front();
        }
        self.obs.push_back((timestamp, mid));
    }

    pub fn last(&self) -> Option<f64> {
        self.obs.back().map(|o| o.1)
    }

    /// The most recent `n` mids (fewer if not yet observed), oldest first.
    pub fn last_n(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        self.obs
            .iter()
            .skip(self.obs.len().saturating_sub(n))
            .map(|o| o.1)
    }

    pub fn mids(&self) -> impl Iterator<Item = f64> + '_ {
        self.obs.iter().map(|o| o.1)
    }

    pub fn timestamps(&self) -> impl Iterator<Item = u64> + '_ {
        self.obs.iter().map(|o| o.0)
    }

    /// Mean of the last `n` mids, if at least `n` are held.
    pub fn mean_last(&self, n: usize) -> Option<f64> {
        if n == 0 || self.obs.len() < n {
            return None;
        }
        Some(self.last_n(n).sum::<f64>() / n as f64)
    }

    /// Population variance of the last `n` mid-to-mid changes.
    pub fn return_variance(&self, n: usize) -> Option<f64> {
        let mids: Vec<f64> = self.last_n(n + 1).collect();
        if mids.len() < 3 {
            return None;
        }
        let diffs: Vec<f64> = mids.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        Some(diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / diffs.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_keeps_latest() {
        let mut h = MidHistory::new(3);
        for t in 0..5 {
            h.push(t, t as f64);
        }
        assert_eq!(h.mids().collect::<Vec<_>>(), vec![2.0, 3.0, 4.0]);
        assert_eq!(h.last_n(2).collect::<Vec<_>>(), vec![3.0, 4.0]);
        assert_eq!(h.last_n(10).count(), 3);
        assert_eq!(h.mean_last(3), Some(3.0));
        assert_eq!(h.mean_last(4), None);
    }

    #[test]
    fn return_variance_of_ramp_is_zero() {
        let mut h = MidHistory::new(60);
        for t in 0..60 {
            h.push(t, 100.0 + 0.5 * t as f64);
        }
        assert_eq!(h.return_variance(50), Some(0.0));
        let mut h = MidHistory::new(10);
        for (t, m) in [100.0, 101.0, 100.0, 101.0, 100.0].into_iter().enumerate() {
            h.push(t as u64, m);
        }
        assert!((h.return_variance(4).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    #[should_panic(expected = "chronological")]
    fn rejects_time_travel() {
        let mut h = MidHistory::new(4);
        h.push(5, 1.0);
        h.push(4, 1.0);
    }
}
