use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context as _};
use jitminer_core::dataset::{export_csv, extension_report, summarize, DatasetSummary, ExtensionReport};
use jitminer_core::metrics::FeatureExtractor;
use jitminer_core::szz::run_szz;
use jitminer_core::tracker::{link_fixes, parse_ticket_export, parse_timestamp};
use jitminer_core::{FeatureMatrix, FileDelta, MetricsConfig, RepoHandle};
use rayon::prelude::*;
use serde::Serialize;

use crate::{Context, MetricsArgs, MineArgs, UsageError};

const SZZ_NOTE: &str = "SZZ labels depend on blame heuristics, linking rules and date filtering; \
counts from different SZZ implementations are not expected to match exactly";

#[derive(Serialize)]
struct InvalidRow {
    commit: String,
    reason: String,
}

#[derive(Serialize)]
struct MineSummary<'a> {
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    repository: String,
    commits: usize,
    rows: usize,
    tickets: usize,
    fix_links: usize,
    inducing_pairs: usize,
    invalid_rows: Vec<InvalidRow>,
    warnings: Vec<String>,
    summary: Option<DatasetSummary>,
    extensions: ExtensionReport,
    metrics_config: &'a MetricsConfig,
    note: &'static str,
}

fn apply_metrics_flags(config: &mut MetricsConfig, flags: &MetricsArgs) {
    if let Some(v) = flags.entropy_mode {
        config.entropy_mode = v;
    }
    if let Some(v) = flags.window_days {
        config.window_days = v;
    }
    if let Some(v) = flags.la_ld_norm {
        config.la_ld_norm = v;
    }
    if let Some(v) = flags.lt_norm {
        config.lt_norm = v;
    }
    if let Some(v) = flags.nf_norm {
        config.nf_norm = v;
    }
    if let Some(v) = flags.nuc_norm {
        config.nuc_norm = v;
    }
    if let Some(v) = flags.rexp_year_offset {
        config.rexp_year_offset = v;
    }
}

fn time_bound(text: Option<&str>, flag: &str) -> anyhow::Result<Option<i64>> {
    text.map(|t| parse_timestamp(t).ok_or_else(|| UsageError(format!("--{flag}: unreadable time {t:?}")).into()))
        .transpose()
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("writing {}", path.display()))?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn run(ctx: &mut Context, args: MineArgs) -> anyhow::Result<()> {
    let (seed, stamp) = (ctx.seed(), ctx.stamp);
    let cfg = &mut ctx.config;
    if let Some(p) = args.repo {
        cfg.repo_path = Some(p);
    }
    if let Some(p) = args.tickets {
        cfg.tickets_path = Some(p);
    }
    if let Some(f) = args.tickets_format {
        cfg.tickets_format = f;
    }
    if let Some(o) = args.out {
        cfg.output_dir = o;
    }
    if let Some(m) = args.links {
        cfg.links.mode = m;
    }
    apply_metrics_flags(&mut cfg.metrics, &args.metrics);
    cfg.metrics.validate().map_err(|e| UsageError(e.to_string()))?;
    let repo_path = cfg.repo_path.clone().ok_or_else(|| UsageError("mine needs --repo".into()))?;
    let tickets_path = cfg
        .tickets_path
        .clone()
        .ok_or_else(|| UsageError("mine needs --tickets".into()))?;
    let since = time_bound(args.since.as_deref(), "since")?;
    let until = time_bound(args.until.as_deref(), "until")?;
    let out_dir = cfg.output_dir.clone();
    let pairs_path = args.pairs_out.unwrap_or_else(|| out_dir.join("pairs.jsonl"));

    let handle = RepoHandle::open(&repo_path).context("vcs: opening repository")?;
    let file = File::open(&tickets_path).with_context(|| format!("tracker: reading {}", tickets_path.display()))?;
    let export = parse_ticket_export(file, cfg.tickets_format).context("tracker: parsing ticket export")?;
    let mut warnings: Vec<String> = export.warnings.iter().map(|w| format!("tracker: {w}")).collect();

    let commits = handle.list_commits(since, until).context("vcs: listing commits")?;
    if commits.is_empty() {
        let w = "vcs: no commits found, writing an empty dataset".to_owned();
        log::warn!("{w}");
        eprintln!("warning: {w}");
        warnings.push(w);
    }
    log::info!("mine: {} commits, {} tickets", commits.len(), export.tickets.len());

    let deltas: Vec<Result<Vec<FileDelta>, String>> = commits
        .par_iter()
        .map(|c| handle.commit_diff(&c.hash).map_err(|e| format!("vcs: {e}")))
        .collect();
    let empty: Vec<FileDelta> = Vec::new();
    let delta_refs: Vec<&[FileDelta]> = deltas
        .iter()
        .map(|d| d.as_ref().map_or(empty.as_slice(), Vec::as_slice))
        .collect();

    let links = link_fixes(&commits, &export.tickets, &cfg.links).context("tracker: linking fixes")?;
    let szz = run_szz(&handle, &commits, &links, &export.tickets, &cfg.szz);
    warnings.extend(szz.warnings.iter().cloned());

    let extractor = FeatureExtractor::new(&handle, &commits, &delta_refs, &szz.labels, &links, cfg.metrics.clone())
        .context("metrics: configuring extraction")?;
    let extracted = extractor.extract_all(&delta_refs);
    let mut rows = Vec::with_capacity(commits.len());
    let mut invalid = Vec::new();
    for ((commit, delta), row) in commits.iter().zip(&deltas).zip(extracted) {
        match (delta, row) {
            (Err(reason), _) => invalid.push(InvalidRow {
                commit: commit.hash.clone(),
                reason: reason.clone(),
            }),
            (Ok(_), Err(e)) => invalid.push(InvalidRow {
                commit: commit.hash.clone(),
                reason: format!("metrics: {e}"),
            }),
            (Ok(_), Ok(row)) => rows.push(row),
        }
    }
    for bad in &invalid {
        log::warn!("mine: skipping {}: {}", bad.commit, bad.reason);
    }
    let matrix = FeatureMatrix::new(rows);

    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let dataset_path = out_dir.join("dataset.csv");
    export_csv(&matrix, &dataset_path).context("dataset: writing dataset.csv")?;

    if let Some(parent) = pairs_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut pairs_out = BufWriter::new(File::create(&pairs_path).with_context(|| format!("writing {}", pairs_path.display()))?);
    for pair in &szz.pairs {
        serde_json::to_writer(&mut pairs_out, pair)?;
        pairs_out.write_all(b"\n")?;
    }
    pairs_out.flush()?;

    let summary = match summarize(&matrix) {
        Ok(mut s) => {
            s.period = commits.first().zip(commits.last()).map(|(a, b)| (a.timestamp, b.timestamp));
            Some(s)
        }
        Err(_) => None,
    };
    let report = MineSummary {
        seed,
        generated_at: stamp,
        repository: handle.root().display().to_string(),
        commits: commits.len(),
        rows: matrix.len(),
        tickets: export.tickets.len(),
        fix_links: links.len(),
        inducing_pairs: szz.pairs.len(),
        invalid_rows: invalid,
        warnings,
        summary,
        extensions: extension_report(&handle, &szz.labels),
        metrics_config: &cfg.metrics,
        note: SZZ_NOTE,
    };
    write_json(&out_dir.join("summary.json"), &report)?;

    println!(
        "mined {} commits: {} rows, {} defective, {} fixes, {} inducing pairs",
        report.commits,
        report.rows,
        matrix.rows.iter().filter(|r| r.defective).count(),
        matrix.rows.iter().filter(|r| r.fix).count(),
        report.inducing_pairs
    );
    println!("wrote {}", dataset_path.display());
    if report.rows == 0 && report.commits > 0 {
        return Err(anyhow!("every commit failed extraction; see summary.json"));
    }
    Ok(())
}
