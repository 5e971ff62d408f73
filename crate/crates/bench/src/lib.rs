//! Deterministic inputs for the benchmarks.

use jitminer_core::metrics::HistoryIndex;
use jitminer_core::vcs::ChangeKind;
use jitminer_core::{CommitRecord, FileDelta};

/// A multi-file diff with `files` files of `hunks` single-line replacements each.
pub fn synthetic_diff(files: usize, hunks: usize) -> String {
    let mut out = String::new();
    for f in 0..files {
        out.push_str(&format!("diff --git a/src/f{f}.rs b/src/f{f}.rs\n"));
        out.push_str(&format!("--- a/src/f{f}.rs\n+++ b/src/f{f}.rs\n"));
        for h in 0..hunks {
            let line = h * 10 + 1;
            out.push_str(&format!("@@ -{line},3 +{line},3 @@\n let a = {h};\n-old({f}, {h});\n+new({f}, {h});\n let b = {h};\n"));
        }
    }
    out
}

fn delta(path: String, added: u32) -> FileDelta {
    FileDelta {
        path,
        old_path: None,
        kind: ChangeKind::Modified,
        binary: false,
        hunks: Vec::new(),
        lines_added: added,
        lines_deleted: added / 2,
        new_file_lines: 100,
    }
}

/// `n` commits by eight authors touching files from a pool of 200.
pub fn synthetic_history(n: usize) -> (Vec<CommitRecord>, Vec<Vec<FileDelta>>) {
    let commits = (0..n)
        .map(|i| CommitRecord {
            hash: format!("{i:040x}"),
            author_id: format!("dev{}", i % 8),
            timestamp: 1_577_836_800 + i as i64 * 3_600,
            message: String::new(),
            parents: Vec::new(),
        })
        .collect();
    let deltas = (0..n)
        .map(|i| {
            (0..1 + i % 5)
                .map(|k| delta(format!("dir{}/f{}.rs", (i + k) % 7, (i * 31 + k * 17) % 200), (1 + i % 13) as u32))
                .collect()
        })
        .collect();
    (commits, deltas)
}

pub fn index_for(commits: &[CommitRecord], deltas: &[Vec<FileDelta>]) -> HistoryIndex {
    let refs: Vec<&[FileDelta]> = deltas.iter().map(Vec::as_slice).collect();
    HistoryIndex::build(commits, &refs)
}
