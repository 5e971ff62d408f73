//! Scripted git repositories for tests.
//!
//! Commits get explicit author/committer dates so histories are fully
//! reproducible; the hash of every commit is a pure function of the script.

use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

/// Seconds in a day.
pub const DAY: i64 = 86_400;
/// A fixed origin for fixture timelines (2020-01-01T00:00:00Z).
pub const EPOCH: i64 = 1_577_836_800;

pub struct FixtureRepo {
    dir: TempDir,
}

impl FixtureRepo {
    pub fn new() -> Self {
        let dir = TempDir::new().expect("tempdir");
        let repo = Self { dir };
        repo.git(&["init", "-q", "-b", "main"], 0, "");
        repo
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    fn git(&self, args: &[&str], ts: i64, author: &str) -> String {
        let (name, email) = split_author(author);
        let date = format!("@{ts} +0000");
        let out = Command::new("git")
            .arg("-C")
            .arg(self.dir.path())
            .args(["-c", "commit.gpgsign=false", "-c", "core.autocrlf=false"])
            .args(args)
            .env("GIT_AUTHOR_NAME", name)
            .env("GIT_AUTHOR_EMAIL", email)
            .env("GIT_COMMITTER_NAME", name)
            .env("GIT_COMMITTER_EMAIL", email)
            .env("GIT_AUTHOR_DATE", &date)
            .env("GIT_COMMITTER_DATE", &date)
            .env("GIT_CONFIG_NOSYSTEM", "1")
            .env("GIT_CONFIG_GLOBAL", "/dev/null")
            .output()
            .expect("run git");
        assert!(
            out.status.success(),
            "git {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8_lossy(&out.stdout).trim().to_owned()
    }

    /// Writes (`Some`) or removes (`None`) files, then commits everything.
    /// Returns the new commit hash.
    pub fn commit(&self, files: &[(&str, Option<&str>)], message: &str, author: &str, ts: i64) -> String {
        for (path, content) in files {
            let full = self.dir.path().join(path);
            match content {
                Some(text) => {
                    if let Some(parent) = full.parent() {
                        std::fs::create_dir_all(parent).expect("mkdir");
                    }
                    std::fs::write(&full, text).expect("write fixture file");
                }
                None => {
                    std::fs::remove_file(&full).expect("remove fixture file");
                }
            }
        }
        self.git(&["add", "-A"], ts, author);
        self.git(&["commit", "-q", "--allow-empty", "-m", message], ts, author);
        self.head()
    }

    /// Renames a file with `git mv`, optionally rewriting its content.
    pub fn rename(&self, from: &str, to: &str, content: Option<&str>, message: &str, author: &str, ts: i64) -> String {
        if let Some(parent) = self.dir.path().join(to).parent() {
            std::fs::create_dir_all(parent).expect("mkdir");
        }
        self.git(&["mv", from, to], ts, author);
        if let Some(text) = content {
            std::fs::write(self.dir.path().join(to), text).expect("write fixture file");
        }
        self.git(&["add", "-A"], ts, author);
        self.git(&["commit", "-q", "-m", message], ts, author);
        self.head()
    }

    /// Writes raw bytes (e.g. binary content) and commits.
    pub fn commit_bytes(&self, path: &str, bytes: &[u8], message: &str, author: &str, ts: i64) -> String {
        let full = self.dir.path().join(path);
        if let Some(parent) = full.parent() {
            std::fs::create_dir_all(parent).expect("mkdir");
        }
        std::fs::write(full, bytes).expect("write fixture file");
        self.git(&["add", "-A"], ts, author);
        self.git(&["commit", "-q", "-m", message], ts, author);
        self.head()
    }

    pub fn head(&self) -> String {
        self.git(&["rev-parse", "HEAD"], 0, "")
    }

    /// Runs an arbitrary git command in the fixture and returns stdout.
    pub fn run(&self, args: &[&str]) -> String {
        self.git(args, 0, "")
    }
}

impl Default for FixtureRepo {
    fn default() -> Self {
        Self::new()
    }
}

fn split_author(author: &str) -> (&str, &str) {
    match author.split_once('<') {
        Some((name, rest)) => (name.trim(), rest.trim_end_matches('>').trim()),
        None if author.is_empty() => ("Fixture", "fixture@example.com"),
        None => (author, "dev@example.com"),
    }
}

/// `n` numbered lines `"{prefix} {i}"`, newline-terminated.
pub fn numbered(prefix: &str, n: usize) -> String {
    (1..=n).map(|i| format!("{prefix} {i}\n")).collect()
}

/// Twelve-commit history with known bug-inducing commits.
///
/// Three bugs are planted and fixed. Ticket 2 is first fixed only partially
/// (the partial fix is itself blamed by the final fix), and an unrelated
/// refactor after ticket 2 was filed touches a line the final fix deletes.
/// (inducing, fix) commit hashes.
pub type PairKey = (String, String);

pub struct SzzScenario {
    pub repo: FixtureRepo,
    /// Commit hashes in history order.
    pub commits: Vec<String>,
    pub tickets_csv: String,
    /// Expected (inducing, fix, partial_fix) triples.
    pub expected_pairs: Vec<(String, String, bool)>,
    /// Commit dated after ticket 2 that the date filter must exclude.
    pub red_herring: String,
    /// Expected defect lines (path, new-side line) keyed by (inducing, fix).
    pub expected_defect_lines: Vec<(PairKey, Vec<(String, u32)>)>,
}

impl SzzScenario {
    #[allow(clippy::vec_init_then_push)]
    pub fn build() -> Self {
        const ALICE: &str = "Alice <alice@example.com>";
        const BOB: &str = "Bob <bob@example.com>";
        const CAROL: &str = "Carol <carol@example.com>";
        const DAVE: &str = "Dave <dave@example.com>";
        let day = |d: i64| EPOCH + d * DAY;
        let lines = |prefix: &str, n: usize, edits: &[(usize, &str)]| -> String {
            (1..=n)
                .map(|i| match edits.iter().find(|(k, _)| *k == i) {
                    Some((_, text)) => format!("{text}\n"),
                    None => format!("{prefix} {i}\n"),
                })
                .collect()
        };

        let repo = FixtureRepo::new();
        let mut c = Vec::with_capacity(12);
        c.push(repo.commit(
            &[
                ("src/parser.c", Some(&lines("p", 10, &[]))),
                ("src/net.c", Some(&lines("n", 10, &[]))),
                ("docs/readme.md", Some("readme\n")),
            ],
            "Initial import",
            ALICE,
            day(0),
        ));
        c.push(repo.commit(
            &[("src/parser.c", Some(&lines("p", 10, &[(4, "p 4 overflow")])))],
            "Speed up the tokenizer",
            BOB,
            day(1),
        ));
        c.push(repo.commit(&[("util/log.c", Some(&lines("l", 8, &[])))], "Add logging helpers", CAROL, day(2)));
        c.push(repo.commit(
            &[("src/net.c", Some(&lines("n", 10, &[(6, "n 6 leak"), (7, "n 7 leak")])))],
            "Reuse connection buffers",
            BOB,
            day(3),
        ));
        c.push(repo.commit(
            &[("src/parser.c", Some(&lines("p", 10, &[(4, "p 4 checked")])))],
            "Fix parser overflow (#1)",
            ALICE,
            day(6),
        ));
        c.push(repo.commit(&[("docs/readme.md", Some("readme\nusage\n"))], "Document usage", CAROL, day(7)));
        c.push(repo.commit(
            &[("src/net.c", Some(&lines("n", 10, &[(6, "n 6 half"), (7, "n 7 leak")])))],
            "Partial fix for #2",
            ALICE,
            day(8),
        ));
        c.push(repo.commit(
            &[("src/net.c", Some(&lines("n", 10, &[(6, "n 6 half"), (7, "n 7 tweak")])))],
            "Refactor connection setup",
            DAVE,
            day(9),
        ));
        c.push(repo.commit(
            &[("src/net.c", Some(&lines("n", 10, &[(6, "n 6 ok"), (7, "n 7 ok")])))],
            "Release buffers on close, closes ticket:2",
            BOB,
            day(10),
        ));
        c.push(repo.commit(
            &[("util/log.c", Some(&lines("l", 9, &[(3, "l 3 race"), (9, "l 9 extra")])))],
            "Flush logs from worker threads",
            CAROL,
            day(11),
        ));
        c.push(repo.commit(&[("docs/changes.md", Some("changes\n"))], "Add changelog", DAVE, day(13)));
        c.push(repo.commit(
            &[("util/log.c", Some(&lines("l", 9, &[(3, "l 3 locked"), (9, "l 9 extra")])))],
            "fix #3 race in logger",
            ALICE,
            day(14),
        ));

        let tickets_csv = format!(
            "id,type,time,changetime,status,summary\n\
             1,defect,{},{},closed,Parser overflow\n\
             2,defect,{},{},closed,Connection leak\n\
             3,defect,{},{},closed,Logger race\n\
             4,enhancement,{},,new,Faster tokenizer\n",
            day(4),
            day(6) + 60,
            day(5),
            day(10) + 60,
            day(12),
            day(14) + 60,
            day(1),
        );
        let pair = |i: usize, f: usize, partial: bool| (c[i].clone(), c[f].clone(), partial);
        let expected_pairs = vec![pair(1, 4, false), pair(3, 6, false), pair(6, 8, true), pair(9, 11, false)];
        let defect = |i: usize, f: usize, path: &str, line: u32| ((c[i].clone(), c[f].clone()), vec![(path.to_owned(), line)]);
        let expected_defect_lines = vec![
            defect(1, 4, "src/parser.c", 4),
            defect(3, 6, "src/net.c", 6),
            defect(6, 8, "src/net.c", 6),
            defect(9, 11, "util/log.c", 3),
        ];
        Self {
            red_herring: c[7].clone(),
            repo,
            commits: c,
            tickets_csv,
            expected_pairs,
            expected_defect_lines,
        }
    }
}
