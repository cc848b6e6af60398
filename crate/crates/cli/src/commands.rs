use std::fs;
use std::path::Path;
use std::time::Instant;

use oppmod::agents::{simulate_day, Archetype, SimConfig};
use oppmod::auction::{run_seeds, write_curves_csv, write_winstats_csv, ExperimentConfig};
use oppmod::classifier::{
    evaluate, project_penultimate, read_model_csv, train, write_confusion_csv, write_history_csv,
    write_model_csv, write_projection_csv, TrainConfig,
};
use oppmod::dataset::{
    balance_downsample, class_counts, extract_all, read_records_jsonl, read_samples_jsonl, split,
    write_records_jsonl, write_samples_jsonl, ExtractStats, LabeledSample, Scaler,
};
use oppmod::market::{write_snapshots_csv, write_trades_csv};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::manifest::{InputHasher, OutDir, RunManifest};
use crate::{CliError, Common};

fn io_err(context: impl std::fmt::Display) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.to_string();
    move |source| CliError::Io { context, source }
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(io_err(format!("reading {}", path.display())))
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

fn to_toml<T: Serialize>(cfg: &T) -> Result<String, CliError> {
    toml::to_string(cfg).map_err(|e| CliError::Config(e.to_string()))
}

/// Builds the manifest pieces shared by every subcommand.
struct Run {
    start: Instant,
    subcommand: &'static str,
    config: Option<String>,
    seed: Option<u64>,
    hasher: InputHasher,
    inputs: Vec<String>,
}

impl Run {
    fn new(subcommand: &'static str, config: Option<&Path>, seed: Option<u64>) -> Run {
        let mut hasher = InputHasher::default();
        hasher.field("subcommand", subcommand.as_bytes());
        if let Some(s) = seed {
            hasher.field("seed", &s.to_le_bytes());
        }
        Run {
            start: Instant::now(),
            subcommand,
            config: config.map(|p| p.display().to_string()),
            seed,
            hasher,
            inputs: Vec::new(),
        }
    }

    fn config_text(&mut self, text: &str) {
        self.hasher.field("config", text.as_bytes());
    }

    fn input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = read_input(path)?;
        self.hasher.field("input", &bytes);
        self.inputs.push(path.display().to_string());
        Ok(bytes)
    }

    fn finish(self, out: OutDir, details: serde_json::Value) -> Result<(), CliError> {
        let manifest = RunManifest {
            subcommand: self.subcommand.to_string(),
            config: self.config,
            seed: self.seed,
            input_hash: self.hasher.finish(),
            inputs: self.inputs,
            outputs: Vec::new(),
            details,
            duration_ms: self.start.elapsed().as_millis() as u64,
        };
        out.finish(manifest).map_err(io_err("writing manifest"))?;
        Ok(())
    }
}

fn out_dir(path: &Path) -> Result<OutDir, CliError> {
    OutDir::create(path).map_err(io_err(format!("creating {}", path.display())))
}

fn put(out: &mut OutDir, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    out.write(name, bytes)
        .map_err(io_err(format!("writing {name}")))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    buf
}

fn print_or_out<'a, T: Serialize>(
    common: &'a Common,
    cfg: &T,
) -> Result<Option<&'a Path>, CliError> {
    if common.print_config {
        print!("{}", to_toml(cfg)?);
        return Ok(None);
    }
    Ok(common.out.as_deref())
}

pub fn sealed_bid_run(common: &Common, jobs: usize) -> Result<(), CliError> {
    let cfg: ExperimentConfig = load_config(common.config.as_deref())?;
    cfg.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let Some(out_path) = print_or_out(common, &cfg)? else {
        return Ok(());
    };
    if jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let seed = common.seed.unwrap_or(0);
    let mut run = Run::new("sealed-bid run", common.config.as_deref(), Some(seed));
    run.config_text(&to_toml(&cfg)?);
    let result = run_seeds(&cfg, seed, jobs)?;
    let mut out = out_dir(out_path)?;
    put(
        &mut out,
        "winstats.csv",
        &csv_bytes(|w| write_winstats_csv(w, &result.win_stats)),
    )?;
    put(
        &mut out,
        "training_curves.csv",
        &csv_bytes(|w| write_curves_csv(w, &result.curves)),
    )?;
    let s = &result.win_stats;
    use oppmod::auction::BidderKind::*;
    let shares = [Opponent, Implicit, Random].map(|k| s.kind_share(k));
    println!(
        "win share OM {:.3} IM {:.3} Random {:.3}",
        shares[0], shares[1], shares[2]
    );
    run.finish(
        out,
        json!({ "seeds": cfg.seeds, "om_share": shares[0], "im_share": shares[1], "random_share": shares[2] }),
    )
}

pub fn lob_simulate(common: &Common) -> Result<(), CliError> {
    let mut cfg: SimConfig = load_config(common.config.as_deref())?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let Some(out_path) = print_or_out(common, &cfg)? else {
        return Ok(());
    };
    let mut run = Run::new("lob simulate", common.config.as_deref(), Some(cfg.seed));
    run.config_text(&to_toml(&cfg)?);
    let sim = simulate_day(&cfg)?;
    let mut out = out_dir(out_path)?;
    put(
        &mut out,
        "trades.csv",
        &csv_bytes(|w| write_trades_csv(w, &sim.trades)),
    )?;
    put(
        &mut out,
        "snapshots.csv",
        &csv_bytes(|w| write_snapshots_csv(w, &sim.snapshots)),
    )?;
    let mut records = Vec::new();
    write_records_jsonl(&mut records, &sim.records)?;
    put(&mut out, "records.jsonl", &records)?;
    let mut per_class = [0usize; 4];
    for r in &sim.records {
        per_class[r.archetype.code()] += 1;
    }
    println!(
        "{} trades, {} order records {:?}",
        sim.trades.len(),
        sim.records.len(),
        per_class
    );
    run.finish(
        out,
        json!({
            "trades": sim.trades.len(),
            "snapshots": sim.snapshots.len(),
            "records": named_counts(per_class),
        }),
    )
}

fn named_counts(counts: [usize; 4]) -> serde_json::Value {
    Archetype::ALL
        .iter()
        .map(|a| (a.name().to_string(), json!(counts[a.code()])))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

pub fn dataset_generate(
    inputs: &[std::path::PathBuf],
    per_class: usize,
    ratios: [f64; 3],
    seed: u64,
    out_path: &Path,
) -> Result<(), CliError> {
    let mut run = Run::new("dataset generate", None, Some(seed));
    run.config_text(&format!("per_class={per_class} ratios={ratios:?}"));
    let mut samples = Vec::new();
    let mut stats = ExtractStats::default();
    for path in inputs {
        let bytes = run.input(path)?;
        let records = read_records_jsonl(&bytes[..])?;
        let (s, st) = extract_all(&records);
        samples.extend(s);
        stats.kept += st.kept;
        stats.one_sided += st.one_sided;
        stats.short_history += st.short_history;
        stats.no_flow_window += st.no_flow_window;
        stats.not_an_order += st.not_an_order;
    }
    let available = class_counts(&samples);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let balanced = balance_downsample(&samples, per_class, &mut rng)?;
    let splits = split(&balanced, ratios, &mut rng)?;
    let scaler = Scaler::fit(&splits.train)?;
    let mut out = out_dir(out_path)?;
    for (name, part) in [
        ("train.jsonl", &splits.train),
        ("val.jsonl", &splits.val),
        ("test.jsonl", &splits.test),
    ] {
        let mut buf = Vec::new();
        write_samples_jsonl(&mut buf, &scaler.apply(part)?)?;
        put(&mut out, name, &buf)?;
    }
    put(&mut out, "scaler.csv", &csv_bytes(|w| scaler.write_csv(w)))?;
    let sizes = splits.sizes();
    println!(
        "{} samples: train {} val {} test {}",
        balanced.len(),
        sizes[0],
        sizes[1],
        sizes[2]
    );
    run.finish(
        out,
        json!({
            "per_class": per_class,
            "ratios": ratios,
            "available": named_counts(available),
            "extract": stats,
            "split_sizes": { "train": sizes[0], "val": sizes[1], "test": sizes[2] },
        }),
    )
}

fn read_samples(run: &mut Run, path: &Path) -> Result<Vec<LabeledSample>, CliError> {
    let bytes = run.input(path)?;
    Ok(read_samples_jsonl(&bytes[..])?)
}

pub fn classify_train(
    train_path: Option<&Path>,
    val_path: Option<&Path>,
    common: &Common,
) -> Result<(), CliError> {
    let mut cfg: TrainConfig = load_config(common.config.as_deref())?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let Some(out_path) = print_or_out(common, &cfg)? else {
        return Ok(());
    };
    let Some(train_path) = train_path else {
        return Err(CliError::Config("--train is required".into()));
    };
    let mut run = Run::new("classify train", common.config.as_deref(), Some(cfg.seed));
    run.config_text(&to_toml(&cfg)?);
    let train_set = read_samples(&mut run, train_path)?;
    let val_set = match val_path {
        Some(p) => read_samples(&mut run, p)?,
        None => Vec::new(),
    };
    let result = train(&train_set, &val_set, &cfg)?;
    let mut out = out_dir(out_path)?;
    put(
        &mut out,
        "model.csv",
        &csv_bytes(|w| write_model_csv(w, &result.model)),
    )?;
    put(
        &mut out,
        "loss_curve.csv",
        &csv_bytes(|w| write_history_csv(w, &result.history)),
    )?;
    let best = &result.history[result.best_epoch - 1];
    println!(
        "kept epoch {} of {}: train loss {:.4}, val accuracy {}",
        result.best_epoch,
        cfg.epochs,
        best.train_loss,
        best.val_accuracy
            .map_or("n/a".into(), |a| format!("{a:.4}"))
    );
    run.finish(
        out,
        json!({
            "train_samples": train_set.len(),
            "val_samples": val_set.len(),
            "best_epoch": result.best_epoch,
            "val_loss": best.val_loss,
            "val_accuracy": best.val_accuracy,
        }),
    )
}

fn read_model(run: &mut Run, path: &Path) -> Result<oppmod::numerics::MlpParams<f32>, CliError> {
    let bytes = run.input(path)?;
    Ok(read_model_csv(&bytes[..])?)
}

pub fn classify_eval(model_path: &Path, data_path: &Path, out_path: &Path) -> Result<(), CliError> {
    let mut run = Run::new("classify eval", None, None);
    let model = read_model(&mut run, model_path)?;
    let data = read_samples(&mut run, data_path)?;
    let cm = evaluate(&model, &data)?;
    let mut out = out_dir(out_path)?;
    put(
        &mut out,
        "confusion_matrix.csv",
        &csv_bytes(|w| write_confusion_csv(w, &cm)),
    )?;
    let recall: serde_json::Map<String, serde_json::Value> = Archetype::ALL
        .iter()
        .map(|a| (a.name().to_string(), json!(cm.recall(a.code()))))
        .collect();
    let largest = cm.largest_confusion().map(
        |(t, p)| json!({ "true": Archetype::ALL[t].name(), "predicted": Archetype::ALL[p].name() }),
    );
    let metrics = json!({
        "samples": data.len(),
        "accuracy": cm.accuracy(),
        "recall": recall,
        "largest_confusion": largest,
    });
    let mut text = serde_json::to_vec_pretty(&metrics).expect("metrics serialize");
    text.push(b'\n');
    put(&mut out, "metrics.json", &text)?;
    println!("accuracy {:.4} on {} samples", cm.accuracy(), data.len());
    run.finish(out, metrics)
}

pub fn pca_project(
    model_path: &Path,
    data_path: &Path,
    components: usize,
    out_path: &Path,
) -> Result<(), CliError> {
    let mut run = Run::new("pca project", None, None);
    run.config_text(&format!("components={components}"));
    let model = read_model(&mut run, model_path)?;
    let data = read_samples(&mut run, data_path)?;
    let (pca, projected) = project_penultimate(&model, &data, components)?;
    let labels: Vec<Archetype> = data.iter().map(|s| s.label).collect();
    let mut out = out_dir(out_path)?;
    put(
        &mut out,
        "projection.csv",
        &csv_bytes(|w| write_projection_csv(w, &projected, &labels)),
    )?;
    let explained: Vec<f64> = pca
        .explained_variance
        .iter()
        .map(|v| v / pca.total_variance)
        .collect();
    println!("explained variance ratio {explained:?}");
    run.finish(
        out,
        json!({ "samples": data.len(), "explained_variance_ratio": explained }),
    )
}
