use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use super::{count_text_lines, parse_unified_diff, CommitRecord, FileDelta};
use crate::{Error, Result};

/// Read-only handle on a git repository.
///
/// Every query runs the `git` executable with explicit flags; the handle
/// holds no mutable state and can be shared across threads.
#[derive(Debug, Clone)]
pub struct RepoHandle {
    root: PathBuf,
    default_branch: String,
    empty_tree: String,
}

/// One line of blame output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlameLine {
    /// Line number in the blamed revision.
    pub final_line: u32,
    pub commit: String,
    /// Path and line number in `commit` where the line was introduced.
    pub orig_path: String,
    pub orig_line: u32,
    pub author_time: i64,
}

const FIELD: char = '\u{1f}';
const RECORD: char = '\u{1e}';

impl RepoHandle {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let meta = std::fs::metadata(path)?;
        if !meta.is_dir() {
            return Err(Error::NotARepository(path.to_owned()));
        }
        let canonical = path.canonicalize()?;
        let probe = Self {
            root: canonical.clone(),
            default_branch: String::new(),
            empty_tree: String::new(),
        };
        let top = probe
            .git(&["rev-parse", "--show-toplevel"])
            .map_err(|_| Error::NotARepository(path.to_owned()))?;
        if Path::new(top.trim()).canonicalize()? != canonical {
            return Err(Error::NotARepository(path.to_owned()));
        }
        let default_branch = probe
            .git(&["symbolic-ref", "--quiet", "--short", "HEAD"])
            .map(|s| s.trim().to_owned())
            .unwrap_or_else(|_| "HEAD".to_owned());
        let empty_tree = probe
            .git(&["hash-object", "-t", "tree", "/dev/null"])?
            .trim()
            .to_owned();
        Ok(Self {
            root: canonical,
            default_branch,
            empty_tree,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn default_branch(&self) -> &str {
        &self.default_branch
    }

    fn command(&self) -> Command {
        let mut cmd = Command::new("git");
        cmd.arg("-C")
            .arg(&self.root)
            .args([
                "-c",
                "core.quotepath=false",
                "-c",
                "blame.ignoreRevsFile=",
                "-c",
                "log.showSignature=false",
            ])
            .env("LC_ALL", "C")
            .env("GIT_PAGER", "cat")
            .env_remove("GIT_DIR")
            .env_remove("GIT_WORK_TREE");
        cmd
    }

    fn git_bytes(&self, args: &[&str]) -> Result<Vec<u8>> {
        let output = self.command().args(args).stdin(Stdio::null()).output()?;
        if !output.status.success() {
            return Err(Error::Git {
                command: args.first().copied().unwrap_or_default().to_owned(),
                stderr: String::from_utf8_lossy(&output.stderr).trim().to_owned(),
            });
        }
        Ok(output.stdout)
    }

    fn git(&self, args: &[&str]) -> Result<String> {
        self.git_bytes(args)
            .map(|b| String::from_utf8_lossy(&b).into_owned())
    }

    /// Resolves `rev` to a full commit hash.
    pub fn resolve_commit(&self, rev: &str) -> Result<String> {
        let spec = format!("{rev}^{{commit}}");
        match self.git(&["rev-parse", "--verify", "--quiet", &spec]) {
            Ok(s) if !s.trim().is_empty() => Ok(s.trim().to_owned()),
            _ => Err(Error::UnknownCommit(rev.to_owned())),
        }
    }

    fn has_commits(&self) -> bool {
        self.resolve_commit(&self.default_branch).is_ok()
    }

    /// First-parent history of the default branch, ascending by author time
    /// (ties by hash), optionally clipped to `[since, until]`.
    pub fn list_commits(&self, since: Option<i64>, until: Option<i64>) -> Result<Vec<CommitRecord>> {
        if !self.has_commits() {
            return Ok(Vec::new());
        }
        let format = "--format=%H%x1f%an%x1f%ae%x1f%at%x1f%P%x1f%B%x1e";
        let out = self.git(&["log", "--first-parent", "--no-color", format, &self.default_branch, "--"])?;
        let mut commits = Vec::new();
        for record in out.split(RECORD) {
            let record = record.trim_start_matches('\n');
            if record.is_empty() {
                continue;
            }
            let fields: Vec<&str> = record.splitn(6, FIELD).collect();
            if fields.len() != 6 {
                return Err(Error::Git {
                    command: "log".into(),
                    stderr: format!("unexpected log record: {record:?}"),
                });
            }
            let timestamp = fields[3].trim().parse::<i64>().map_err(|_| Error::Git {
                command: "log".into(),
                stderr: format!("bad author time {:?}", fields[3]),
            })?;
            commits.push(CommitRecord {
                hash: fields[0].to_owned(),
                author_id: format!("{} <{}>", fields[1].trim(), fields[2].trim()).to_lowercase(),
                timestamp,
                message: fields[5].trim_end_matches('\n').to_owned(),
                parents: fields[4].split_whitespace().map(str::to_owned).collect(),
            });
        }
        commits.retain(|c| since.is_none_or(|s| c.timestamp >= s) && until.is_none_or(|u| c.timestamp <= u));
        commits.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.hash.cmp(&b.hash)));
        Ok(commits)
    }

    fn first_parent_of(&self, commit: &str) -> Result<Option<String>> {
        let out = self.git(&["rev-list", "--parents", "-n", "1", commit])?;
        Ok(out.split_whitespace().nth(1).map(str::to_owned))
    }

    /// Raw `-U0` diff of `hash` against its first parent (or the empty tree).
    pub fn commit_diff_text(&self, hash: &str) -> Result<String> {
        let hash = self.resolve_commit(hash)?;
        let base = self.first_parent_of(&hash)?.unwrap_or_else(|| self.empty_tree.clone());
        self.git(&[
            "diff-tree",
            "-r",
            "-p",
            "-M",
            "-U0",
            "--no-color",
            "--no-ext-diff",
            "--no-textconv",
            "--full-index",
            "--src-prefix=a/",
            "--dst-prefix=b/",
            &base,
            &hash,
        ])
    }

    /// Per-file changes of `hash` against its first parent. Root commits are
    /// diffed against the empty tree.
    pub fn commit_diff(&self, hash: &str) -> Result<Vec<FileDelta>> {
        let text = self.commit_diff_text(hash)?;
        let mut deltas = parse_unified_diff(&text)?;
        let targets: Vec<String> = deltas
            .iter()
            .filter(|d| d.kind != super::ChangeKind::Deleted)
            .map(|d| d.path.clone())
            .collect();
        let counts = self.line_counts_unchecked(hash, &targets)?;
        let mut counts = targets.into_iter().zip(counts).collect::<HashMap<_, _>>();
        for d in &mut deltas {
            d.new_file_lines = match d.kind {
                super::ChangeKind::Deleted => 0,
                _ => counts.remove(&d.path).unwrap_or(0),
            };
        }
        Ok(deltas)
    }

    /// Total text lines of `path` at `hash`; 0 when absent or binary.
    pub fn file_line_count_at(&self, hash: &str, path: &str) -> Result<u32> {
        let hash = self.resolve_commit(hash)?;
        Ok(self.line_counts_unchecked(&hash, &[path.to_owned()])?[0])
    }

    /// Batched [`Self::file_line_count_at`] for a commit known to exist.
    pub fn line_counts_unchecked(&self, hash: &str, paths: &[String]) -> Result<Vec<u32>> {
        let specs: Vec<String> = paths.iter().map(|p| format!("{hash}:{p}")).collect();
        Ok(self
            .read_blobs(&specs)?
            .into_iter()
            .map(|b| b.map_or(0, |bytes| count_text_lines(&bytes)))
            .collect())
    }

    /// Contents of `path` at `hash`, if present.
    pub fn file_at(&self, hash: &str, path: &str) -> Result<Option<Vec<u8>>> {
        let hash = self.resolve_commit(hash)?;
        Ok(self.read_blobs(&[format!("{hash}:{path}")])?.pop().flatten())
    }

    fn read_blobs(&self, specs: &[String]) -> Result<Vec<Option<Vec<u8>>>> {
        if specs.is_empty() {
            return Ok(Vec::new());
        }
        let mut child = self
            .command()
            .args(["cat-file", "--batch"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let input: String = specs.iter().map(|s| format!("{s}\n")).collect();
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let mut reader = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut blobs = Vec::with_capacity(specs.len());
        let mut header = String::new();
        for _ in specs {
            header.clear();
            reader.read_line(&mut header)?;
            let parts: Vec<&str> = header.split_whitespace().collect();
            match parts.as_slice() {
                [_, kind, size] if *kind != "missing" => {
                    let size: usize = size.parse().map_err(|_| Error::Git {
                        command: "cat-file".into(),
                        stderr: format!("bad header {header:?}"),
                    })?;
                    let mut buf = vec![0; size + 1];
                    reader.read_exact(&mut buf)?;
                    buf.pop();
                    blobs.push((*kind == "blob").then_some(buf));
                }
                _ => blobs.push(None),
            }
        }
        writer.join().expect("writer thread")?;
        child.wait()?;
        Ok(blobs)
    }

    /// Number of tracked files in the tree of `hash`.
    pub fn repo_file_count_at(&self, hash: &str) -> Result<usize> {
        let hash = self.resolve_commit(hash)?;
        self.repo_file_count_unchecked(&hash)
    }

    pub fn repo_file_count_unchecked(&self, hash: &str) -> Result<usize> {
        let out = self.git_bytes(&["ls-tree", "-r", "-z", hash])?;
        Ok(out
            .split(|&b| b == 0)
            .filter(|entry| {
                let meta = entry.split(|&b| b == b'\t').next().unwrap_or_default();
                meta.split(|&b| b == b' ').nth(1) == Some(b"blob")
            })
            .count())
    }

    /// Commit that last touched old-side line `line_no` of `path`, looking
    /// at the first parent of `at_commit`.
    pub fn blame_line(&self, path: &str, line_no: u32, at_commit: &str) -> Result<String> {
        let mut lines = self.blame_lines(path, &[line_no], at_commit)?;
        Ok(lines.remove(0).commit)
    }

    /// Blames several old-side lines of `path` in one pass, against the
    /// first parent of `at_commit`. Output follows the order of `line_nos`
    /// after sorting and deduplication.
    pub fn blame_lines(&self, path: &str, line_nos: &[u32], at_commit: &str) -> Result<Vec<BlameLine>> {
        let at = self.resolve_commit(at_commit)?;
        let parent = self.first_parent_of(&at)?.ok_or_else(|| Error::FileAbsent {
            path: path.to_owned(),
            commit: at.clone(),
        })?;
        self.blame_at(path, line_nos, &parent)
    }

    /// Blames lines of `path` as they exist at `rev` itself.
    pub fn blame_at(&self, path: &str, line_nos: &[u32], rev: &str) -> Result<Vec<BlameLine>> {
        let rev = self.resolve_commit(rev)?;
        let wanted: BTreeSet<u32> = line_nos.iter().copied().collect();
        if wanted.is_empty() {
            return Ok(Vec::new());
        }
        let Some(content) = self.read_blobs(&[format!("{rev}:{path}")])?.pop().flatten() else {
            return Err(Error::FileAbsent {
                path: path.to_owned(),
                commit: rev,
            });
        };
        let len = count_text_lines(&content);
        if let Some(&bad) = wanted.iter().find(|&&n| n == 0 || n > len) {
            return Err(Error::LineOutOfRange {
                path: path.to_owned(),
                line_no: bad,
                len,
            });
        }
        let mut args: Vec<String> = vec![
            "blame".into(),
            "--line-porcelain".into(),
            "--first-parent".into(),
        ];
        for (start, end) in contiguous_ranges(&wanted) {
            args.push("-L".into());
            args.push(format!("{start},{end}"));
        }
        args.push(rev.clone());
        args.push("--".into());
        args.push(path.to_owned());
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = self.git(&argv)?;
        parse_line_porcelain(&out)
    }
}

fn contiguous_ranges(lines: &BTreeSet<u32>) -> Vec<(u32, u32)> {
    let mut ranges: Vec<(u32, u32)> = Vec::new();
    for &n in lines {
        match ranges.last_mut() {
            Some((_, end)) if *end + 1 == n => *end = n,
            _ => ranges.push((n, n)),
        }
    }
    ranges
}

fn parse_line_porcelain(out: &str) -> Result<Vec<BlameLine>> {
    let bad = |msg: String| Error::Git {
        command: "blame".into(),
        stderr: msg,
    };
    let mut result = Vec::new();
    let mut current: Option<BlameLine> = None;
    for line in out.split('\n') {
        if let Some(entry) = current.as_mut() {
            if line.starts_with('\t') {
                result.push(current.take().expect("entry in progress"));
            } else if let Some(t) = line.strip_prefix("author-time ") {
                entry.author_time = t.trim().parse().map_err(|_| bad(format!("bad author-time {t:?}")))?;
            } else if let Some(p) = line.strip_prefix("filename ") {
                entry.orig_path = p.to_owned();
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let (Some(hash), Some(orig), Some(fin)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad(format!("unexpected blame header {line:?}")));
        };
        current = Some(BlameLine {
            commit: hash.to_owned(),
            orig_line: orig.parse().map_err(|_| bad(format!("bad line {orig:?}")))?,
            final_line: fin.parse().map_err(|_| bad(format!("bad line {fin:?}")))?,
            orig_path: String::new(),
            author_time: 0,
        });
    }
    Ok(result)
}
