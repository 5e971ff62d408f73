use std::fs::File;
use std::io::Write;

use anyhow::Context as _;
use jitminer_core::dataset::{export_csv, extension_report_for_commits, import_csv, summarize, ExtensionReport};
use jitminer_core::metrics::min_max_normalize;
use jitminer_core::{DatasetSummary, Feature, RepoHandle};
use serde::Serialize;

use crate::{Context, NormalizeArgs, StatsArgs};

#[derive(Serialize)]
struct StatsReport {
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    summary: DatasetSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    extensions: Option<ExtensionReport>,
}

fn percent(ratio: f64) -> String {
    format!("{:.2}%", ratio * 100.0)
}

fn print_table(report: &StatsReport) {
    let s = &report.summary;
    println!("rows            {}", s.row_count);
    println!("defective       {} ({})", s.defective_count, percent(s.defective_ratio));
    println!("fix commits     {} ({})", s.fix_count, percent(s.fix_ratio));
    println!();
    println!("{:<10} {:>14} {:>14} {:>14} {:>14}", "feature", "min", "max", "mean", "stddev");
    for f in &s.features {
        println!(
            "{:<10} {:>14.6} {:>14.6} {:>14.6} {:>14.6}",
            f.feature.name(),
            f.min,
            f.max,
            f.mean,
            f.stddev
        );
    }
    if let Some(ext) = &report.extensions {
        println!();
        println!("defective commits examined  {}", ext.defective_commits);
        println!("mean files changed          {:.2}", ext.mean_files_changed);
        println!("mean distinct extensions    {:.2}", ext.mean_distinct_extensions);
        println!("{:<16} {:>10}", "extension", "mean files");
        for row in &ext.rows {
            println!("{:<16} {:>10.2}", row.extension, row.mean_files_changed_per_defective_commit);
        }
    }
}

pub fn run_stats(ctx: &Context, args: StatsArgs) -> anyhow::Result<()> {
    let matrix = import_csv(&args.dataset).with_context(|| format!("dataset: {}", args.dataset.display()))?;
    let summary = summarize(&matrix).context("dataset")?;
    let extensions = match &args.repo {
        Some(path) => {
            let handle = RepoHandle::open(path).context("vcs: opening repository")?;
            let defective: Vec<&str> = matrix
                .rows
                .iter()
                .filter(|r| r.defective)
                .map(|r| r.commit_hash.as_str())
                .collect();
            Some(extension_report_for_commits(&handle, &defective))
        }
        None => None,
    };
    let report = StatsReport {
        seed: ctx.seed(),
        generated_at: ctx.stamp,
        summary,
        extensions,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print_table(&report);
    }
    Ok(())
}

pub fn run_normalize(args: NormalizeArgs) -> anyhow::Result<()> {
    let matrix = import_csv(&args.dataset).with_context(|| format!("dataset: {}", args.dataset.display()))?;
    let columns = args.features.map_or_else(|| Feature::ALL.to_vec(), |f| f.0);
    let (scaled, scaler) = min_max_normalize(&matrix, &columns).context("metrics: normalizing")?;
    export_csv(&scaled, &args.out).with_context(|| format!("dataset: writing {}", args.out.display()))?;
    if let Some(path) = &args.ranges_out {
        let mut file = File::create(path).with_context(|| format!("writing {}", path.display()))?;
        serde_json::to_writer_pretty(&mut file, &scaler)?;
        file.write_all(b"\n")?;
    }
    println!("normalized {} rows into {}", scaled.len(), args.out.display());
    Ok(())
}
