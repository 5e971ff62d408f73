use super::{LaLdNorm, LtNorm, MetricsConfig};
use crate::vcs::{ChangeKind, CommitRecord, FileDelta, RepoHandle};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SizeMetrics {
    pub la: f64,
    pub ld: f64,
    pub lt: f64,
}

/// LA, LD and LT for a commit, reading pre-change file sizes from the
/// commit's first parent.
pub fn size_metrics(
    handle: &RepoHandle,
    commit: &CommitRecord,
    delta: &[FileDelta],
    config: &MetricsConfig,
) -> Result<SizeMetrics> {
    let before = match commit.first_parent() {
        None => vec![0; delta.len()],
        Some(parent) => {
            let paths: Vec<String> = delta.iter().map(|d| d.source_path().to_owned()).collect();
            let mut counts = handle.line_counts_unchecked(parent, &paths)?;
            for (count, d) in counts.iter_mut().zip(delta) {
                if d.kind == ChangeKind::Added {
                    *count = 0;
                }
            }
            counts
        }
    };
    Ok(size_metrics_from_counts(delta, &before, config))
}

/// Pure part of [`size_metrics`]: `lines_before[k]` is the pre-change line
/// count of `delta[k]`.
pub fn size_metrics_from_counts(delta: &[FileDelta], lines_before: &[u32], config: &MetricsConfig) -> SizeMetrics {
    let raw_la: f64 = delta.iter().map(|d| f64::from(d.lines_added)).sum();
    let raw_ld: f64 = delta.iter().map(|d| f64::from(d.lines_deleted)).sum();
    let raw_lt = if delta.is_empty() {
        0.0
    } else {
        lines_before.iter().map(|&n| f64::from(n)).sum::<f64>() / delta.len() as f64
    };

    let (la, ld) = match config.la_ld_norm {
        LaLdNorm::Raw => (raw_la, raw_ld),
        LaLdNorm::ByNewFileSize => delta.iter().fold((0.0, 0.0), |(la, ld), d| {
            let denom = if d.kind == ChangeKind::Deleted || d.new_file_lines == 0 {
                log::debug!("size: {} has no new-side lines, ratio falls back to raw count", d.path);
                1.0
            } else {
                f64::from(d.new_file_lines)
            };
            (la + f64::from(d.lines_added) / denom, ld + f64::from(d.lines_deleted) / denom)
        }),
        LaLdNorm::ByLt if raw_lt > 0.0 => (raw_la / raw_lt, raw_ld / raw_lt),
        LaLdNorm::ByLt => (raw_la, raw_ld),
    };
    let lt = match config.lt_norm {
        LtNorm::ByNf if !delta.is_empty() => raw_lt / delta.len() as f64,
        _ => raw_lt,
    };
    SizeMetrics { la, ld, lt }
}
