//! Simulate one trading day, build a balanced dataset and train the
//! archetype classifier in-process.
//!
//! cargo run --release -p oppmod --example desk_pipeline -- [epochs] [per_class]

use oppmod::agents::{simulate_day, Archetype, SimConfig};
use oppmod::classifier::{evaluate, train, TrainConfig};
use oppmod::dataset::{
    balance_downsample, class_counts, extract_all, split, Scaler, DEFAULT_RATIOS,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().map_or(Ok(100), |s| s.parse())?;
    let per_class: usize = args.next().map_or(Ok(1000), |s| s.parse())?;

    let sim = simulate_day(&SimConfig::default())?;
    let (samples, stats) = extract_all(&sim.records);
    println!(
        "extracted {stats:?}, per class {:?}",
        class_counts(&samples)
    );

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let balanced = balance_downsample(&samples, per_class, &mut rng)?;
    let splits = split(&balanced, DEFAULT_RATIOS, &mut rng)?;
    let scaler = Scaler::fit(&splits.train)?;
    let (tr, va, te) = (
        scaler.apply(&splits.train)?,
        scaler.apply(&splits.val)?,
        scaler.apply(&splits.test)?,
    );

    let out = train(
        &tr,
        &va,
        &TrainConfig {
            epochs,
            ..TrainConfig::default()
        },
    )?;
    let cm = evaluate(&out.model, &te)?;
    println!(
        "kept epoch {}, test accuracy {:.3}",
        out.best_epoch,
        cm.accuracy()
    );
    for a in Archetype::ALL {
        println!(
            "{a}: {:?} recall {:.3}",
            cm.counts[a.code()],
            cm.recall(a.code())
        );
    }
    Ok(())
}
