use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AuctionError;

/// Outcome of one sealed-bid round. All bids are revealed afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionResult {
    pub round: usize,
    pub bids: Vec<f64>,
    pub winner: usize,
    pub rewards: Vec<f64>,
}

/// First-price rule: the highest bid wins and pays its own bid. Ties are
/// broken uniformly at random; `rng` is only consumed when a tie occurs.
pub fn resolve<R: Rng + ?Sized>(
    round: usize,
    bids: &[f64],
    valuations: &[f64],
    rng: &mut R,
) -> Result<AuctionResult, AuctionError> {
    if bids.len() < 2 {
        return Err(AuctionError::TooFewBidders(bids.len()));
    }
    if bids.len() != valuations.len() {
        return Err(AuctionError::LengthMismatch {
            bids: bids.len(),
            valuations: valuations.len(),
        });
    }
    let max = bids.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let leaders: Vec<usize> = (0..bids.len()).filter(|&i| bids[i] == max).collect();
    let winner = if leaders.len() == 1 {
        leaders[0]
    } else {
        leaders[rng.random_range(0..leaders.len())]
    };
    let mut rewards = vec![0.0; bids.len()];
    rewards[winner] = valuations[winner] - bids[winner];
    Ok(AuctionResult {
        round,
        bids: bids.to_vec(),
        winner,
        rewards,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn highest_bid_wins_and_pays_its_bid() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = resolve(0, &[0.5, 0.3, 0.2], &[0.8, 0.9, 0.4], &mut rng).unwrap();
        assert_eq!(r.winner, 0);
        assert!((r.rewards[0] - 0.3).abs() < 1e-15);
        assert_eq!(&r.rewards[1..], &[0.0, 0.0]);
    }

    #[test]
    fn ties_are_seeded_and_fair() {
        let mut counts = [0u32; 2];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            counts[resolve(0, &[0.4, 0.4], &[1.0, 1.0], &mut rng)
                .unwrap()
                .winner] += 1;
        }
        assert!((counts[0] as f64 / 10_000.0 - 0.5).abs() < 0.02);
        let pick = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            resolve(0, &[0.4, 0.4], &[1.0, 1.0], &mut rng)
                .unwrap()
                .winner
        };
        assert_eq!(pick(5), pick(5));
    }

    #[test]
    fn any_positive_bid_beats_zero_bidders() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = resolve(0, &[0.0, 0.0, 1e-3, 0.0], &[1.0; 4], &mut rng).unwrap();
        assert_eq!(r.winner, 2);
    }

    #[test]
    fn needs_two_bidders() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            resolve(0, &[0.5], &[1.0], &mut rng),
            Err(AuctionError::TooFewBidders(1))
        ));
    }
}
