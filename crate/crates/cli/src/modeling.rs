use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use anyhow::Context as _;
use jitminer_core::dataset::import_csv;
use jitminer_core::model::{ablate, train, TrainConfig, TrainedModel};
use jitminer_core::{EvalMetrics, Feature};
use serde::Serialize;

use crate::{AblateArgs, Context, EvalArgs, TrainArgs, TrainFlags, UsageError};

fn apply_train_flags(config: &mut TrainConfig, flags: &TrainFlags) -> anyhow::Result<()> {
    if let Some(f) = &flags.features {
        config.features = f.0.clone();
    }
    if let Some(v) = flags.epochs {
        config.epochs = v;
    }
    if let Some(v) = flags.lr {
        config.learning_rate = v;
    }
    if let Some(v) = flags.split {
        config.split_ratio = v;
    }
    if let Some(v) = flags.hidden_width {
        config.hidden_width = v;
    }
    if let Some(v) = flags.layers {
        config.weight_layers = v;
    }
    if let Some(v) = flags.norm_fit {
        config.norm_fit = v;
    }
    if let Some(v) = flags.threshold {
        config.threshold = v;
    }
    config.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(())
}

fn write_json(path: &std::path::Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("writing {}", path.display()))?);
    serde_json::to_writer(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TrainReport<'a> {
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    features: &'a [Feature],
    layer_sizes: &'a [usize],
    epochs: usize,
    train_rows: usize,
    balanced_rows: usize,
    test_rows: usize,
    final_train_loss: f64,
    test: &'a EvalMetrics,
}

pub fn run_train(ctx: &mut Context, args: TrainArgs) -> anyhow::Result<()> {
    apply_train_flags(&mut ctx.config.train, &args.flags)?;
    let config = &ctx.config.train;
    let matrix = import_csv(&args.dataset).with_context(|| format!("dataset: {}", args.dataset.display()))?;
    let outcome = train(&matrix, config).context("model: training")?;
    if let Some(path) = &args.model_out {
        write_json(path, &outcome.model)?;
    }
    if let Some(path) = &args.loss_out {
        write_json(path, &outcome.loss_history)?;
    }
    let report = TrainReport {
        seed: config.seed,
        generated_at: ctx.stamp,
        features: &config.features,
        layer_sizes: &outcome.model.layer_sizes,
        epochs: config.epochs,
        train_rows: outcome.train_rows,
        balanced_rows: outcome.balanced_rows,
        test_rows: outcome.test.len(),
        final_train_loss: outcome.loss_history.last().copied().unwrap_or(0.0),
        test: &outcome.test_metrics,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

#[derive(Serialize)]
struct EvalReport<'a> {
    seed: u64,
    rows: usize,
    metrics: &'a EvalMetrics,
}

pub fn run_eval(args: EvalArgs) -> anyhow::Result<()> {
    let file = File::open(&args.model).with_context(|| format!("model: reading {}", args.model.display()))?;
    let model: TrainedModel =
        serde_json::from_reader(BufReader::new(file)).with_context(|| format!("model: parsing {}", args.model.display()))?;
    model.validate().context("model")?;
    let matrix = import_csv(&args.dataset).with_context(|| format!("dataset: {}", args.dataset.display()))?;
    let threshold = args.threshold.unwrap_or(model.config.threshold);
    let metrics = model.evaluate(&matrix, threshold).context("model: evaluating")?;
    let report = EvalReport {
        seed: model.config.seed,
        rows: matrix.len(),
        metrics: &metrics,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

pub fn run_ablate(ctx: &mut Context, args: AblateArgs) -> anyhow::Result<()> {
    apply_train_flags(&mut ctx.config.train, &args.flags)?;
    let config = &ctx.config.train;
    let matrix = import_csv(&args.dataset).with_context(|| format!("dataset: {}", args.dataset.display()))?;
    let report = ablate(&matrix, &config.features, config).context("model: ablation")?;
    if args.json {
        #[derive(Serialize)]
        struct Out<'a> {
            seed: u64,
            #[serde(flatten)]
            report: &'a jitminer_core::model::AblationReport,
        }
        let out = Out {
            seed: config.seed,
            report: &report,
        };
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    }
    println!("seed {}", config.seed);
    println!("{:<12} {:>8} {:>10}  features", "removed", "recall", "loss");
    for row in &report.rows {
        let removed = row.removed.map_or("(none)", Feature::name);
        let names: Vec<&str> = row.features.iter().map(|f| f.name()).collect();
        println!("{:<12} {:>8.4} {:>10.6}  {}", removed, row.recall, row.mean_loss, names.join(","));
    }
    Ok(())
}
