//! Bug-inducing commit identification (SZZ).
//!
//! For every linked fix commit, the old-side lines it deletes are blamed at
//! the fix's parent. Each blamed commit is a candidate; candidates committed
//! after the ticket was opened are dropped unless they are themselves linked
//! fixes (an earlier, incomplete repair of the same bug).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::tracker::{BugTicket, FixLink};
use crate::vcs::{ChangeKind, CommitRecord, LineRef, RepoHandle, Side};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SzzConfig {
    /// Ignore deleted lines that contain only whitespace.
    pub skip_whitespace: bool,
    /// Keep post-ticket candidates that are themselves linked fixes.
    pub partial_fix: bool,
}

impl Default for SzzConfig {
    fn default() -> Self {
        Self {
            skip_whitespace: true,
            partial_fix: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct InducingCandidate {
    pub candidate_hash: String,
    pub fix_hash: String,
    pub path: String,
    pub old_line_no: u32,
    pub candidate_timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InducingPair {
    pub inducing_hash: String,
    pub fix_hash: String,
    pub ticket_id: Option<String>,
    /// Old-side lines of the fix that blamed to `inducing_hash`.
    pub evidence: Vec<LineRef>,
    pub partial_fix: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitLabel {
    pub commit_hash: String,
    pub defective: bool,
    pub fix: bool,
    /// Indices into the pair list returned alongside the labels.
    pub inducing_pairs: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct SzzOutcome {
    pub pairs: Vec<InducingPair>,
    pub labels: Vec<CommitLabel>,
    pub warnings: Vec<String>,
}

/// Blames every deleted line of the fix commit and returns one candidate per
/// (blamed commit, path, line).
pub fn candidate_inducers(handle: &RepoHandle, fix: &FixLink, config: &SzzConfig) -> Result<Vec<InducingCandidate>> {
    let fix_hash = handle.resolve_commit(&fix.commit_hash)?;
    let deltas = handle.commit_diff(&fix_hash)?;
    let mut candidates = BTreeSet::new();
    for delta in deltas.iter().filter(|d| d.kind != ChangeKind::Added && !d.binary) {
        let lines: Vec<u32> = delta
            .deleted_lines()
            .filter(|(_, text)| !config.skip_whitespace || !text.trim().is_empty())
            .map(|(n, _)| *n)
            .collect();
        if lines.is_empty() {
            continue;
        }
        let path = delta.source_path();
        for blamed in handle.blame_lines(path, &lines, &fix_hash)? {
            if blamed.commit == fix_hash {
                continue;
            }
            candidates.insert(InducingCandidate {
                candidate_hash: blamed.commit,
                fix_hash: fix_hash.clone(),
                path: path.to_owned(),
                old_line_no: blamed.final_line,
                candidate_timestamp: blamed.author_time,
            });
        }
    }
    Ok(candidates.into_iter().collect())
}

/// Applies the ticket date rule and groups surviving candidates into pairs,
/// one per inducing commit, ordered by inducing hash.
pub fn filter_candidates(
    candidates: &[InducingCandidate],
    ticket: Option<&BugTicket>,
    fix_links: &[FixLink],
    config: &SzzConfig,
) -> Vec<InducingPair> {
    let fixes: HashSet<&str> = fix_links.iter().map(|l| l.commit_hash.as_str()).collect();
    let mut grouped: BTreeMap<&str, Vec<&InducingCandidate>> = BTreeMap::new();
    for c in candidates {
        grouped.entry(c.candidate_hash.as_str()).or_default().push(c);
    }
    grouped
        .into_iter()
        .filter_map(|(hash, group)| {
            let first = group[0];
            let partial_fix = match ticket {
                None => false,
                Some(t) if first.candidate_timestamp < t.created_at => false,
                Some(_) if config.partial_fix && fixes.contains(hash) => true,
                Some(_) => return None,
            };
            let mut evidence: Vec<LineRef> = group
                .iter()
                .map(|c| LineRef {
                    path: c.path.clone(),
                    line_no: c.old_line_no,
                    side: Side::Old,
                })
                .collect();
            evidence.sort();
            evidence.dedup();
            Some(InducingPair {
                inducing_hash: hash.to_owned(),
                fix_hash: first.fix_hash.clone(),
                ticket_id: ticket.map(|t| t.ticket_id.clone()),
                evidence,
                partial_fix,
            })
        })
        .collect()
}

/// End-to-end labeling: candidates for every fix commit, date filtering per
/// link, then one label per commit.
///
/// Per-fix failures become warnings; the run continues with the remaining
/// fixes. Pairs come back ordered by (fix hash, inducing hash, ticket id).
pub fn run_szz(
    handle: &RepoHandle,
    commits: &[CommitRecord],
    fix_links: &[FixLink],
    tickets: &[BugTicket],
    config: &SzzConfig,
) -> SzzOutcome {
    let ticket_by_id: HashMap<&str, &BugTicket> = tickets.iter().map(|t| (t.ticket_id.as_str(), t)).collect();
    let commit_time: HashMap<&str, i64> = commits.iter().map(|c| (c.hash.as_str(), c.timestamp)).collect();

    let mut fix_commits: Vec<&FixLink> = Vec::new();
    let mut seen = HashSet::new();
    for link in fix_links {
        if seen.insert(link.commit_hash.as_str()) {
            fix_commits.push(link);
        }
    }

    let traced: Vec<(String, Result<Vec<InducingCandidate>>)> = fix_commits
        .par_iter()
        .map(|link| (link.commit_hash.clone(), candidate_inducers(handle, link, config)))
        .collect();

    let mut outcome = SzzOutcome::default();
    let mut candidates_by_fix: HashMap<String, Vec<InducingCandidate>> = HashMap::new();
    for (hash, result) in traced {
        match result {
            Ok(c) => {
                candidates_by_fix.insert(hash, c);
            }
            Err(e) => outcome.warnings.push(format!("szz: fix {hash}: {e}")),
        }
    }

    for link in fix_links {
        let Some(candidates) = candidates_by_fix.get(&link.commit_hash) else {
            continue;
        };
        let ticket = link.ticket_id.as_deref().and_then(|id| ticket_by_id.get(id).copied());
        let fix_time = commit_time.get(link.commit_hash.as_str()).copied();
        for pair in filter_candidates(candidates, ticket, fix_links, config) {
            let inducing_time = commit_time.get(pair.inducing_hash.as_str()).copied();
            if let (Some(fix_time), Some(inducing_time)) = (fix_time, inducing_time) {
                if inducing_time > fix_time {
                    outcome.warnings.push(format!(
                        "szz: inducing {} dated after fix {}, dropped",
                        pair.inducing_hash, pair.fix_hash
                    ));
                    continue;
                }
            }
            outcome.pairs.push(pair);
        }
    }
    outcome.pairs.sort_by(|a, b| {
        (&a.fix_hash, &a.inducing_hash, &a.ticket_id).cmp(&(&b.fix_hash, &b.inducing_hash, &b.ticket_id))
    });
    outcome.pairs.dedup();

    let mut pairs_by_inducing: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, p) in outcome.pairs.iter().enumerate() {
        pairs_by_inducing.entry(p.inducing_hash.as_str()).or_default().push(i);
    }
    let fixes: HashSet<&str> = fix_links.iter().map(|l| l.commit_hash.as_str()).collect();
    outcome.labels = commits
        .iter()
        .map(|c| {
            let inducing_pairs = pairs_by_inducing.get(c.hash.as_str()).cloned().unwrap_or_default();
            CommitLabel {
                commit_hash: c.hash.clone(),
                defective: !inducing_pairs.is_empty(),
                fix: fixes.contains(c.hash.as_str()),
                inducing_pairs,
            }
        })
        .collect();
    for w in &outcome.warnings {
        log::warn!("{w}");
    }
    outcome
}

/// Lines added by the inducing commit that the fix later deleted or
/// rewrote, as new-side references into the inducing commit.
pub fn defect_lines(handle: &RepoHandle, pair: &InducingPair) -> Result<Vec<LineRef>> {
    let inducing = handle.resolve_commit(&pair.inducing_hash)?;
    let mut by_path: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    for e in &pair.evidence {
        by_path.entry(e.path.as_str()).or_default().push(e.line_no);
    }
    let mut traced = BTreeSet::new();
    for (path, lines) in by_path {
        for blamed in handle.blame_lines(path, &lines, &pair.fix_hash)? {
            if blamed.commit == inducing {
                traced.insert(LineRef {
                    path: blamed.orig_path,
                    line_no: blamed.orig_line,
                    side: Side::New,
                });
            }
        }
    }
    let added: HashSet<(String, u32)> = handle
        .commit_diff(&inducing)?
        .iter()
        .flat_map(|d| d.added_lines().map(move |(n, _)| (d.path.clone(), *n)))
        .collect();
    let lines: Vec<LineRef> = traced
        .into_iter()
        .filter(|l| added.contains(&(l.path.clone(), l.line_no)))
        .collect();
    if lines.is_empty() {
        log::warn!(
            "no defect lines attributable to {} for fix {}",
            pair.inducing_hash,
            pair.fix_hash
        );
    }
    Ok(lines)
}
