use std::collections::HashSet;

use rayon::prelude::*;

use super::{
    change_entropy, diffusion_metrics, size_metrics, EntropyMode, FeatureVector, HistoryIndex, MetricsConfig, NfNorm,
};
use crate::szz::CommitLabel;
use crate::tracker::FixLink;
use crate::vcs::{CommitRecord, FileDelta, RepoHandle};
use crate::Result;

/// Assembles feature rows for a fixed commit history.
///
/// The history index is built once, sequentially, at construction; rows can
/// then be extracted in any order or in parallel.
pub struct FeatureExtractor<'a> {
    handle: &'a RepoHandle,
    commits: &'a [CommitRecord],
    index: HistoryIndex,
    defective: HashSet<&'a str>,
    fixes: HashSet<&'a str>,
    config: MetricsConfig,
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(
        handle: &'a RepoHandle,
        commits: &'a [CommitRecord],
        deltas: &[&[FileDelta]],
        labels: &'a [CommitLabel],
        fix_links: &'a [FixLink],
        config: MetricsConfig,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            handle,
            commits,
            index: HistoryIndex::build(commits, deltas),
            defective: labels
                .iter()
                .filter(|l| l.defective)
                .map(|l| l.commit_hash.as_str())
                .collect(),
            fixes: fix_links.iter().map(|l| l.commit_hash.as_str()).collect(),
            config,
        })
    }

    pub fn index(&self) -> &HistoryIndex {
        &self.index
    }

    /// Feature row for commit `i` of the history.
    pub fn extract(&self, i: usize, delta: &[FileDelta]) -> Result<FeatureVector> {
        let commit = &self.commits[i];
        let diffusion = diffusion_metrics(delta);
        let entropy = match self.config.entropy_mode {
            EntropyMode::PerCommit => change_entropy(delta),
            EntropyMode::Windowed => self.index.windowed_entropy(i, self.config.window_days),
        };
        let size = size_metrics(self.handle, commit, delta, &self.config)?;
        let mut nf = diffusion.nf as f64;
        if self.config.nf_norm == NfNorm::ByRepoFileCount {
            let total = self.handle.repo_file_count_unchecked(&commit.hash)?;
            if total > 0 {
                nf /= total as f64;
            } else {
                log::debug!("features: {} leaves an empty tree, nf not normalized", commit.hash);
            }
        }
        let history = self.index.history_metrics(i, delta, self.config.nuc_norm);
        let experience = self.index.experience_metrics(i, self.config.rexp_year_offset);
        Ok(FeatureVector {
            commit_hash: commit.hash.clone(),
            ns: diffusion.ns as f64,
            nd: diffusion.nd as f64,
            nf,
            entropy,
            la: size.la,
            ld: size.ld,
            lt: size.lt,
            fix: self.fixes.contains(commit.hash.as_str()),
            ndev: history.ndev,
            age: history.age,
            nuc: history.nuc,
            exp: experience.exp,
            rexp: experience.rexp,
            sexp: experience.sexp,
            defective: self.defective.contains(commit.hash.as_str()),
        })
    }

    /// Rows for every commit, in history order. Extraction runs on the
    /// current rayon pool; the output order does not depend on it.
    pub fn extract_all(&self, deltas: &[&[FileDelta]]) -> Vec<Result<FeatureVector>> {
        (0..self.commits.len())
            .into_par_iter()
            .map(|i| self.extract(i, deltas[i]))
            .collect()
    }
}

