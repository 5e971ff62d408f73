//! Repository access.
//!
//! Everything here is read-only. Repository queries shell out to the `git`
//! executable; [`parse_unified_diff`] is a pure parser that also works on
//! stored patch files.

mod diff;
mod repo;

pub use diff::{parse_unified_diff, write_unified_diff};
pub use repo::{BlameLine, RepoHandle};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub hash: String,
    /// Lowercased `name <email>`.
    pub author_id: String,
    /// Author time, seconds since the epoch (UTC).
    pub timestamp: i64,
    pub message: String,
    pub parents: Vec<String>,
}

impl CommitRecord {
    pub fn first_parent(&self) -> Option<&str> {
        self.parents.first().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeKind {
    Added,
    Modified,
    Deleted,
    Renamed,
}

/// Changes to one file within a commit.
///
/// `path` is the new-side path, except for deletions where it is the removed
/// path. `old_path` is set for renames and deletions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDelta {
    pub path: String,
    pub old_path: Option<String>,
    pub kind: ChangeKind,
    pub binary: bool,
    pub hunks: Vec<Hunk>,
    pub lines_added: u32,
    pub lines_deleted: u32,
    /// Line count of the file after the change, 0 when deleted.
    pub new_file_lines: u32,
}

impl FileDelta {
    /// Path of the file before the change.
    pub fn source_path(&self) -> &str {
        self.old_path.as_deref().unwrap_or(&self.path)
    }

    pub fn deleted_lines(&self) -> impl Iterator<Item = &(u32, String)> {
        self.hunks.iter().flat_map(|h| h.deleted_lines.iter())
    }

    pub fn added_lines(&self) -> impl Iterator<Item = &(u32, String)> {
        self.hunks.iter().flat_map(|h| h.added_lines.iter())
    }

    pub(crate) fn recount(&mut self) {
        self.lines_added = self.hunks.iter().map(|h| h.added_lines.len() as u32).sum();
        self.lines_deleted = self.hunks.iter().map(|h| h.deleted_lines.len() as u32).sum();
    }
}

/// A zero-context hunk: a run of deleted lines followed by added lines.
///
/// Start values follow git's `-U0` convention, so an empty side points at
/// the line before the change.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub old_start: u32,
    pub old_count: u32,
    pub new_start: u32,
    pub new_count: u32,
    pub deleted_lines: Vec<(u32, String)>,
    pub added_lines: Vec<(u32, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Old,
    New,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineRef {
    pub path: String,
    pub line_no: u32,
    pub side: Side,
}

/// Number of text lines in `bytes`; a missing trailing newline still counts
/// the final line. Content git would treat as binary counts as 0.
pub fn count_text_lines(bytes: &[u8]) -> u32 {
    if is_binary(bytes) {
        return 0;
    }
    let newlines = bytes.iter().filter(|&&b| b == b'\n').count() as u32;
    match bytes.last() {
        Some(b'\n') | None => newlines,
        Some(_) => newlines + 1,
    }
}

fn is_binary(bytes: &[u8]) -> bool {
    // Same heuristic as git: a NUL within the first 8000 bytes.
    bytes.iter().take(8000).any(|&b| b == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_counting() {
        assert_eq!(count_text_lines(b""), 0);
        assert_eq!(count_text_lines(b"a\nb\n"), 2);
        assert_eq!(count_text_lines(b"a\nb"), 2);
        assert_eq!(count_text_lines(b"\x00\x01\n"), 0);
    }
}
