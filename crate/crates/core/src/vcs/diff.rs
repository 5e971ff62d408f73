use std::fmt::Write as _;
use std::sync::OnceLock;

use regex::Regex;

use super::{ChangeKind, FileDelta, Hunk};
use crate::{Error, Result};

fn hunk_header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@").expect("valid hunk regex")
    })
}

/// Parses git or GNU unified diff text into per-file deltas.
///
/// Hunks carrying context lines are split into zero-context hunks, one per
/// contiguous run of changed lines, so the result matches what `git diff -U0`
/// would have produced for the same change.
pub fn parse_unified_diff(text: &str) -> Result<Vec<FileDelta>> {
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    Parser {
        lines,
        pos: 0,
        deltas: Vec::new(),
        current: None,
    }
    .run()
}

#[derive(Default)]
struct FileBuilder {
    git: bool,
    header_old: Option<String>,
    header_new: Option<String>,
    minus: Option<Option<String>>,
    plus: Option<Option<String>>,
    rename_from: Option<String>,
    rename_to: Option<String>,
    new_file: bool,
    deleted_file: bool,
    binary: bool,
    hunks: Vec<Hunk>,
}

impl FileBuilder {
    fn finish(self) -> FileDelta {
        // plain unified diffs with a/ and b/ markers are read like `patch -p1`
        let prefixed = |side: &Option<Option<String>>, prefix: &str| match side {
            Some(Some(p)) => p.starts_with(prefix),
            _ => true,
        };
        let p1 = self.git || (prefixed(&self.minus, "a/") && prefixed(&self.plus, "b/"));
        let strip = |p: String, prefix: &str| -> String {
            if p1 {
                p.strip_prefix(prefix).map(str::to_owned).unwrap_or(p)
            } else {
                p
            }
        };
        let old = self
            .rename_from
            .clone()
            .or_else(|| self.minus.clone().flatten().map(|p| strip(p, "a/")))
            .or_else(|| self.header_old.clone());
        let new = self
            .rename_to
            .clone()
            .or_else(|| self.plus.clone().flatten().map(|p| strip(p, "b/")))
            .or_else(|| self.header_new.clone());

        let added = self.new_file || matches!(self.minus, Some(None));
        let deleted = self.deleted_file || matches!(self.plus, Some(None));
        let renamed = self.rename_from.is_some() || self.rename_to.is_some();

        let (kind, path, old_path) = if added {
            (ChangeKind::Added, new.or(old).unwrap_or_default(), None)
        } else if deleted {
            let p = old.or(new).unwrap_or_default();
            (ChangeKind::Deleted, p.clone(), Some(p))
        } else if renamed {
            (ChangeKind::Renamed, new.clone().or(old.clone()).unwrap_or_default(), old)
        } else {
            (ChangeKind::Modified, new.or(old).unwrap_or_default(), None)
        };

        let mut delta = FileDelta {
            path,
            old_path,
            kind,
            binary: self.binary,
            hunks: self.hunks,
            lines_added: 0,
            lines_deleted: 0,
            new_file_lines: 0,
        };
        delta.recount();
        if kind == ChangeKind::Added {
            delta.new_file_lines = delta.lines_added;
        }
        delta
    }
}

struct Parser<'a> {
    lines: Vec<&'a str>,
    pos: usize,
    deltas: Vec<FileDelta>,
    current: Option<FileBuilder>,
}

impl<'a> Parser<'a> {
    fn malformed(line: usize, reason: impl Into<String>) -> Error {
        Error::MalformedDiff {
            line,
            reason: reason.into(),
        }
    }

    fn flush(&mut self) {
        if let Some(builder) = self.current.take() {
            self.deltas.push(builder.finish());
        }
    }

    fn run(mut self) -> Result<Vec<FileDelta>> {
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos];
            let line_no = self.pos + 1;

            if let Some(rest) = line.strip_prefix("diff --git ") {
                self.flush();
                let (a, b) = split_git_header(rest);
                self.current = Some(FileBuilder {
                    git: true,
                    header_old: a,
                    header_new: b,
                    ..Default::default()
                });
                self.pos += 1;
                continue;
            }
            if line.starts_with("diff --cc ") || line.starts_with("diff --combined ") {
                return Err(Self::malformed(line_no, "combined diffs are not supported"));
            }
            if line.starts_with("diff ") {
                self.flush();
                self.current = Some(FileBuilder::default());
                self.pos += 1;
                continue;
            }
            if line == "-- " && self.current.is_some() {
                // format-patch signature separator
                break;
            }
            if let Some(rest) = line.strip_prefix("--- ") {
                let starts_new = match &self.current {
                    None => true,
                    Some(b) => b.minus.is_some() || b.binary,
                };
                if starts_new {
                    self.flush();
                    self.current = Some(FileBuilder::default());
                }
                let current = self.current.as_mut().expect("file section");
                current.minus = Some(parse_marker_path(rest));
                self.pos += 1;
                continue;
            }
            if let Some(rest) = line.strip_prefix("+++ ") {
                match self.current.as_mut() {
                    Some(b) if b.minus.is_some() && b.plus.is_none() => {
                        b.plus = Some(parse_marker_path(rest));
                    }
                    _ => return Err(Self::malformed(line_no, "'+++' without preceding '---'")),
                }
                self.pos += 1;
                continue;
            }
            if line.starts_with("@@") {
                self.parse_hunk()?;
                continue;
            }

            let Some(current) = self.current.as_mut() else {
                // Preamble before the first file (commit headers, mail text).
                self.pos += 1;
                continue;
            };
            if let Some(p) = line.strip_prefix("rename from ") {
                current.rename_from = Some(unquote(p));
            } else if let Some(p) = line.strip_prefix("rename to ") {
                current.rename_to = Some(unquote(p));
            } else if line.starts_with("new file mode") {
                current.new_file = true;
            } else if line.starts_with("deleted file mode") {
                current.deleted_file = true;
            } else if line.starts_with("Binary files ") && line.ends_with(" differ") {
                current.binary = true;
                if line.starts_with("Binary files /dev/null ") {
                    current.new_file = true;
                } else if line.ends_with(" and /dev/null differ") {
                    current.deleted_file = true;
                }
            } else if line == "GIT binary patch" {
                current.binary = true;
                self.pos += 1;
                while self.pos < self.lines.len() && !self.lines[self.pos].starts_with("diff ") {
                    self.pos += 1;
                }
                continue;
            } else if line.starts_with('+') || line.starts_with('-') || line.starts_with(' ') {
                return Err(Self::malformed(line_no, "diff body line outside of a hunk"));
            } else if line.starts_with('\\') {
                // stray "\ No newline at end of file"
            }
            // Remaining extended headers (index, mode, similarity, copy) carry
            // nothing the deltas record.
            self.pos += 1;
        }
        self.flush();
        Ok(self.deltas)
    }

    fn parse_hunk(&mut self) -> Result<()> {
        let header_line = self.pos + 1;
        let line = self.lines[self.pos];
        if self.current.is_none() {
            return Err(Self::malformed(header_line, "hunk outside of a file section"));
        }
        let caps = hunk_header_re()
            .captures(line)
            .ok_or_else(|| Self::malformed(header_line, "unparseable hunk header"))?;
        let num = |i: usize| -> Result<u32> {
            match caps.get(i) {
                None => Ok(1),
                Some(m) => m
                    .as_str()
                    .parse()
                    .map_err(|_| Self::malformed(header_line, "hunk header number out of range")),
            }
        };
        let (old_start, old_count, new_start, new_count) = (num(1)?, num(2)?, num(3)?, num(4)?);
        self.pos += 1;

        let mut old_next = if old_count == 0 { old_start + 1 } else { old_start };
        let mut new_next = if new_count == 0 { new_start + 1 } else { new_start };
        let (mut old_rem, mut new_rem) = (old_count, new_count);
        let mut run = Run::default();
        let mut hunks = Vec::new();

        while old_rem > 0 || new_rem > 0 {
            let line_no = self.pos + 1;
            let Some(&body) = self.lines.get(self.pos) else {
                return Err(Self::malformed(
                    line_no,
                    format!("hunk ends early: {old_rem} old and {new_rem} new lines missing"),
                ));
            };
            match body.as_bytes().first() {
                None | Some(b' ') => {
                    if old_rem == 0 || new_rem == 0 {
                        return Err(Self::malformed(line_no, "context line exceeds hunk counts"));
                    }
                    run.flush_into(&mut hunks);
                    old_next += 1;
                    new_next += 1;
                    old_rem -= 1;
                    new_rem -= 1;
                }
                Some(b'-') => {
                    if old_rem == 0 {
                        return Err(Self::malformed(line_no, "deleted line exceeds hunk old count"));
                    }
                    run.start(old_next, new_next);
                    run.deleted.push((old_next, body[1..].to_owned()));
                    old_next += 1;
                    old_rem -= 1;
                }
                Some(b'+') => {
                    if new_rem == 0 {
                        return Err(Self::malformed(line_no, "added line exceeds hunk new count"));
                    }
                    run.start(old_next, new_next);
                    run.added.push((new_next, body[1..].to_owned()));
                    new_next += 1;
                    new_rem -= 1;
                }
                Some(b'\\') => {}
                Some(_) => {
                    return Err(Self::malformed(
                        line_no,
                        format!("hunk ends early: {old_rem} old and {new_rem} new lines missing"),
                    ))
                }
            }
            self.pos += 1;
        }
        run.flush_into(&mut hunks);
        while self.lines.get(self.pos).is_some_and(|l| l.starts_with('\\')) {
            self.pos += 1;
        }
        self.current
            .as_mut()
            .expect("checked above")
            .hunks
            .extend(hunks);
        Ok(())
    }
}

#[derive(Default)]
struct Run {
    origin: Option<(u32, u32)>,
    deleted: Vec<(u32, String)>,
    added: Vec<(u32, String)>,
}

impl Run {
    fn start(&mut self, old_next: u32, new_next: u32) {
        if self.origin.is_none() {
            self.origin = Some((old_next, new_next));
        }
    }

    fn flush_into(&mut self, hunks: &mut Vec<Hunk>) {
        let Some((old_origin, new_origin)) = self.origin.take() else {
            return;
        };
        let deleted = std::mem::take(&mut self.deleted);
        let added = std::mem::take(&mut self.added);
        hunks.push(Hunk {
            old_start: if deleted.is_empty() { old_origin - 1 } else { old_origin },
            old_count: deleted.len() as u32,
            new_start: if added.is_empty() { new_origin - 1 } else { new_origin },
            new_count: added.len() as u32,
            deleted_lines: deleted,
            added_lines: added,
        });
    }
}

/// Path after `--- ` / `+++ `; `None` for `/dev/null`.
fn parse_marker_path(rest: &str) -> Option<String> {
    let rest = if rest.starts_with('"') {
        rest
    } else {
        rest.split('\t').next().unwrap_or(rest)
    };
    let path = unquote(rest.trim_end_matches('\t'));
    (path != "/dev/null").then_some(path)
}

fn split_git_header(rest: &str) -> (Option<String>, Option<String>) {
    let strip = |p: String, prefix: &str| p.strip_prefix(prefix).map(str::to_owned).unwrap_or(p);
    if rest.starts_with('"') {
        if let Some((first, tail)) = take_quoted(rest) {
            let second = unquote(tail.trim_start());
            return (Some(strip(first, "a/")), Some(strip(second, "b/")));
        }
    }
    // Unquoted: prefer the split where both sides name the same file.
    let bytes = rest.len();
    if bytes % 2 == 1 {
        let (a, b) = rest.split_at(bytes / 2);
        if let (Some(a), Some(b)) = (a.strip_prefix("a/"), b.strip_prefix(" b/")) {
            if a == b {
                return (Some(a.to_owned()), Some(b.to_owned()));
            }
        }
    }
    match rest.find(" b/").or_else(|| rest.find(" \"b/")) {
        Some(i) => {
            let a = strip(unquote(&rest[..i]), "a/");
            let b = strip(unquote(&rest[i + 1..]), "b/");
            (Some(a), Some(b))
        }
        None => (None, None),
    }
}

/// Reads a leading C-quoted token and returns it with the remaining text.
fn take_quoted(s: &str) -> Option<(String, &str)> {
    let bytes = s.as_bytes();
    let mut i = 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => return Some((unquote(&s[..=i]), &s[i + 1..])),
            _ => i += 1,
        }
    }
    None
}

/// Undoes git's C-style path quoting; unquoted input is returned as is.
fn unquote(s: &str) -> String {
    let Some(inner) = s.strip_prefix('"').and_then(|t| t.strip_suffix('"')) else {
        return s.to_owned();
    };
    let mut out = Vec::with_capacity(inner.len());
    let bytes = inner.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'\\' || i + 1 == bytes.len() {
            out.push(bytes[i]);
            i += 1;
            continue;
        }
        let c = bytes[i + 1];
        i += 2;
        match c {
            b'n' => out.push(b'\n'),
            b't' => out.push(b'\t'),
            b'r' => out.push(b'\r'),
            b'a' => out.push(0x07),
            b'b' => out.push(0x08),
            b'f' => out.push(0x0c),
            b'v' => out.push(0x0b),
            b'0'..=b'7' => {
                let mut value = u32::from(c - b'0');
                let mut digits = 1;
                while digits < 3 && i < bytes.len() && (b'0'..=b'7').contains(&bytes[i]) {
                    value = value * 8 + u32::from(bytes[i] - b'0');
                    i += 1;
                    digits += 1;
                }
                out.push(value as u8);
            }
            other => out.push(other),
        }
    }
    String::from_utf8_lossy(&out).into_owned()
}

fn quote(path: &str) -> String {
    let needs = path
        .chars()
        .any(|c| c == '"' || c == '\\' || c.is_control());
    if !needs {
        return path.to_owned();
    }
    let mut out = String::from("\"");
    for c in path.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => {
                let _ = write!(out, "\\{:03o}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn prefixed(prefix: &str, path: &str) -> String {
    quote(&format!("{prefix}{path}"))
}

fn marker(prefix: &str, path: &str) -> String {
    let p = prefixed(prefix, path);
    if p.contains(' ') && !p.starts_with('"') {
        format!("{p}\t")
    } else {
        p
    }
}

fn range(start: u32, count: u32) -> String {
    if count == 1 {
        start.to_string()
    } else {
        format!("{start},{count}")
    }
}

/// Renders deltas as git-style `-U0` unified diff text.
pub fn write_unified_diff(deltas: &[FileDelta]) -> String {
    let mut out = String::new();
    for d in deltas {
        let src = d.old_path.as_deref().unwrap_or(&d.path);
        let dst = &d.path;
        let _ = writeln!(out, "diff --git {} {}", prefixed("a/", src), prefixed("b/", dst));
        match d.kind {
            ChangeKind::Added => out.push_str("new file mode 100644\n"),
            ChangeKind::Deleted => out.push_str("deleted file mode 100644\n"),
            ChangeKind::Renamed => {
                let _ = writeln!(out, "rename from {}", quote(src));
                let _ = writeln!(out, "rename to {}", quote(dst));
            }
            ChangeKind::Modified => {}
        }
        let old_marker = if d.kind == ChangeKind::Added {
            "/dev/null".to_owned()
        } else {
            marker("a/", src)
        };
        let new_marker = if d.kind == ChangeKind::Deleted {
            "/dev/null".to_owned()
        } else {
            marker("b/", dst)
        };
        if d.binary {
            let _ = writeln!(
                out,
                "Binary files {} and {} differ",
                old_marker.trim_end_matches('\t'),
                new_marker.trim_end_matches('\t')
            );
            continue;
        }
        if d.hunks.is_empty() {
            continue;
        }
        let _ = writeln!(out, "--- {old_marker}");
        let _ = writeln!(out, "+++ {new_marker}");
        for h in &d.hunks {
            let _ = writeln!(
                out,
                "@@ -{} +{} @@",
                range(h.old_start, h.old_count),
                range(h.new_start, h.new_count)
            );
            for (_, text) in &h.deleted_lines {
                let _ = writeln!(out, "-{text}");
            }
            for (_, text) in &h.added_lines {
                let _ = writeln!(out, "+{text}");
            }
        }
    }
    out
}
