use std::collections::{BTreeSet, HashMap, HashSet};

use super::{subsystem_of, window_entropy, NucNorm};
use crate::vcs::{ChangeKind, CommitRecord, FileDelta};

const DAY_SECONDS: f64 = 86_400.0;
/// Length of a year used for REXP recency buckets.
pub const YEAR_SECONDS: f64 = 365.25 * DAY_SECONDS;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HistoryMetrics {
    pub ndev: f64,
    pub age: f64,
    pub nuc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExperienceMetrics {
    pub exp: f64,
    pub rexp: f64,
    pub sexp: f64,
}

#[derive(Debug)]
struct CommitEntry {
    timestamp: i64,
    author: usize,
    subsystems: BTreeSet<String>,
    files: Vec<String>,
}

/// Who touched which file when, built in one pass over the history.
///
/// Commits are addressed by their position in the list passed to
/// [`HistoryIndex::build`]; "prior" means an earlier position. Renamed files
/// inherit the history of their previous path.
#[derive(Debug, Default)]
pub struct HistoryIndex {
    commits: Vec<CommitEntry>,
    file_touches: HashMap<String, Vec<usize>>,
    author_commits: Vec<Vec<usize>>,
}

impl HistoryIndex {
    pub fn build(commits: &[CommitRecord], deltas: &[&[FileDelta]]) -> Self {
        assert_eq!(commits.len(), deltas.len(), "one delta list per commit");
        let mut authors: HashMap<&str, usize> = HashMap::new();
        let mut index = Self::default();
        for (i, (commit, delta)) in commits.iter().zip(deltas).enumerate() {
            let next_author = authors.len();
            let author = *authors.entry(commit.author_id.as_str()).or_insert(next_author);
            if author == index.author_commits.len() {
                index.author_commits.push(Vec::new());
            }
            index.author_commits[author].push(i);

            for d in delta.iter() {
                if d.kind == ChangeKind::Renamed {
                    if let Some(old) = &d.old_path {
                        let inherited = index.file_touches.get(old).cloned().unwrap_or_default();
                        let target = index.file_touches.entry(d.path.clone()).or_default();
                        target.extend(inherited);
                        target.sort_unstable();
                        target.dedup();
                    }
                }
                let touches = index.file_touches.entry(d.path.clone()).or_default();
                if touches.last() != Some(&i) {
                    touches.push(i);
                }
            }
            index.commits.push(CommitEntry {
                timestamp: commit.timestamp,
                author,
                subsystems: delta.iter().map(|d| subsystem_of(&d.path).to_owned()).collect(),
                files: delta.iter().map(|d| d.path.clone()).collect(),
            });
        }
        index
    }

    pub fn len(&self) -> usize {
        self.commits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commits.is_empty()
    }

    fn prior_touches(&self, path: &str, before: usize) -> &[usize] {
        match self.file_touches.get(path) {
            Some(t) => &t[..t.partition_point(|&j| j < before)],
            None => &[],
        }
    }

    /// NDEV, AGE (days) and NUC for commit `i` modifying `delta`.
    pub fn history_metrics(&self, i: usize, delta: &[FileDelta], nuc_norm: NucNorm) -> HistoryMetrics {
        let now = self.commits[i].timestamp;
        let mut developers = HashSet::new();
        let mut changes = HashSet::new();
        let mut ages = Vec::new();
        for d in delta {
            let prior = self.prior_touches(&d.path, i);
            for &j in prior {
                developers.insert(self.commits[j].author);
                changes.insert(j);
            }
            if let Some(&last) = prior.last() {
                let days = (now - self.commits[last].timestamp) as f64 / DAY_SECONDS;
                ages.push(days.max(0.0));
            }
        }
        let age = if ages.is_empty() {
            0.0
        } else {
            ages.iter().sum::<f64>() / ages.len() as f64
        };
        let mut nuc = changes.len() as f64;
        if nuc_norm == NucNorm::ByNf && !delta.is_empty() {
            nuc /= delta.len() as f64;
        }
        HistoryMetrics {
            ndev: developers.len() as f64,
            age,
            nuc,
        }
    }

    /// EXP, REXP and SEXP for the author of commit `i`.
    ///
    /// Each prior commit by the author adds `1 / (n + 1)` to REXP, where `n`
    /// is the number of whole years since it plus `year_offset`; the
    /// denominator never drops below 1.
    pub fn experience_metrics(&self, i: usize, year_offset: i32) -> ExperienceMetrics {
        let current = &self.commits[i];
        let authored = &self.author_commits[current.author];
        let prior = &authored[..authored.partition_point(|&j| j < i)];
        let mut rexp = 0.0;
        let mut sexp = 0;
        for &j in prior {
            let earlier = &self.commits[j];
            let years = ((current.timestamp - earlier.timestamp) as f64 / YEAR_SECONDS).max(0.0).floor();
            let denom = (years + f64::from(year_offset) + 1.0).max(1.0);
            rexp += 1.0 / denom;
            if !earlier.subsystems.is_disjoint(&current.subsystems) {
                sexp += 1;
            }
        }
        ExperienceMetrics {
            exp: prior.len() as f64,
            rexp,
            sexp: f64::from(sexp),
        }
    }

    /// Entropy of file touches over commits in the `window_days` ending at
    /// commit `i`, inclusive.
    pub fn windowed_entropy(&self, i: usize, window_days: f64) -> f64 {
        let now = self.commits[i].timestamp;
        let start = now as f64 - window_days * DAY_SECONDS;
        let mut counts: HashMap<&str, u32> = HashMap::new();
        for entry in self.commits[..=i].iter().rev() {
            if (entry.timestamp as f64) < start {
                continue;
            }
            for f in &entry.files {
                *counts.entry(f.as_str()).or_default() += 1;
            }
        }
        let mut values: Vec<u32> = counts.into_values().collect();
        values.sort_unstable();
        window_entropy(&values)
    }
}
