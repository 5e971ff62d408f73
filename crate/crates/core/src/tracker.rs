//! Bug-tracker exports and fix-commit linking.
//!
//! Tickets come from a Trac-style query export (CSV or JSON). A commit is
//! linked to a closed ticket when its message names the ticket id; commits
//! that mention no known ticket but use a fix keyword get a keyword link.

use std::collections::{HashMap, HashSet};
use std::io::Read;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use crate::vcs::CommitRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugTicket {
    pub ticket_id: String,
    pub created_at: i64,
    pub closed_at: Option<i64>,
    pub status: String,
    pub ticket_type: String,
    pub summary: String,
}

impl BugTicket {
    pub fn is_closed(&self) -> bool {
        self.closed_at.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkMethod {
    TicketIdMatch,
    Keyword,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixLink {
    pub commit_hash: String,
    pub ticket_id: Option<String>,
    pub method: LinkMethod,
    pub matched_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LinkMode {
    IdOnly,
    #[default]
    IdAndKeyword,
}

impl FromStr for LinkMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id-only" => Ok(Self::IdOnly),
            "id+keyword" => Ok(Self::IdAndKeyword),
            other => Err(Error::Config(format!("unknown link mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown ticket format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinkConfig {
    /// Patterns with one capture group holding the ticket id.
    pub id_patterns: Vec<String>,
    pub fix_keywords: Vec<String>,
    pub require_defect_type: bool,
    pub word_boundary_match: bool,
    pub mode: LinkMode,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            id_patterns: vec![
                r"#(\d+)".into(),
                r"\bticket:(\d+)".into(),
                r"\bticket\s+(\d+)".into(),
            ],
            fix_keywords: vec!["fix".into(), "fixed".into(), "fixes".into(), "bug".into()],
            require_defect_type: false,
            word_boundary_match: true,
            mode: LinkMode::IdAndKeyword,
        }
    }
}

/// Compiled form of a [`LinkConfig`].
#[derive(Debug, Clone)]
pub struct Linker {
    ids: Vec<Regex>,
    keyword: Regex,
    require_defect_type: bool,
    mode: LinkMode,
}

impl Linker {
    pub fn new(config: &LinkConfig) -> Result<Self> {
        if config.id_patterns.is_empty() || config.fix_keywords.is_empty() {
            return Err(Error::Config("id patterns and fix keywords must be nonempty".into()));
        }
        let ids = config
            .id_patterns
            .iter()
            .map(|p| {
                let re = RegexBuilder::new(p)
                    .case_insensitive(true)
                    .build()
                    .map_err(|e| Error::Config(format!("bad id pattern {p:?}: {e}")))?;
                if re.captures_len() < 2 {
                    return Err(Error::Config(format!("id pattern {p:?} needs a capture group")));
                }
                Ok(re)
            })
            .collect::<Result<Vec<_>>>()?;
        let alternatives = config
            .fix_keywords
            .iter()
            .map(|k| regex::escape(k))
            .collect::<Vec<_>>()
            .join("|");
        let keyword_pattern = if config.word_boundary_match {
            format!(r"\b(?:{alternatives})\b")
        } else {
            format!("(?:{alternatives})")
        };
        let keyword = RegexBuilder::new(&keyword_pattern)
            .case_insensitive(true)
            .build()
            .map_err(|e| Error::Config(format!("bad fix keywords: {e}")))?;
        Ok(Self {
            ids,
            keyword,
            require_defect_type: config.require_defect_type,
            mode: config.mode,
        })
    }

    /// Ticket ids named in `message`, with the text that matched, in order of
    /// first appearance.
    fn ticket_mentions<'m>(&self, message: &'m str) -> Vec<(String, &'m str)> {
        let mut found: Vec<(usize, String, &str)> = Vec::new();
        for re in &self.ids {
            for caps in re.captures_iter(message) {
                let whole = caps.get(0).expect("match");
                let id = caps.get(1).expect("group").as_str().to_owned();
                found.push((whole.start(), id, whole.as_str()));
            }
        }
        found.sort_by_key(|(start, _, _)| *start);
        let mut seen = HashSet::new();
        found
            .into_iter()
            .filter(|(_, id, _)| seen.insert(id.clone()))
            .map(|(_, id, text)| (id, text))
            .collect()
    }

    fn keyword_match<'m>(&self, message: &'m str) -> Option<&'m str> {
        self.keyword.find(message).map(|m| m.as_str())
    }

    pub fn is_fix_message(&self, message: &str) -> bool {
        self.ids.iter().any(|re| re.is_match(message)) || self.keyword.is_match(message)
    }

    fn eligible(&self, ticket: &BugTicket) -> bool {
        ticket.is_closed() && (!self.require_defect_type || ticket.ticket_type.eq_ignore_ascii_case("defect"))
    }

    /// Links every commit to the closed tickets it names; falls back to a
    /// keyword link when no named ticket is eligible.
    ///
    /// Output is ordered by commit, then by the ticket's position in
    /// `tickets`.
    pub fn link_fixes(&self, commits: &[CommitRecord], tickets: &[BugTicket]) -> Vec<FixLink> {
        let positions: HashMap<&str, usize> = tickets
            .iter()
            .enumerate()
            .filter(|(_, t)| self.eligible(t))
            .map(|(i, t)| (t.ticket_id.as_str(), i))
            .collect();
        let mut links = Vec::new();
        for commit in commits {
            let mut matched: Vec<(usize, FixLink)> = self
                .ticket_mentions(&commit.message)
                .into_iter()
                .filter_map(|(id, text)| {
                    positions.get(id.as_str()).map(|&pos| {
                        (
                            pos,
                            FixLink {
                                commit_hash: commit.hash.clone(),
                                ticket_id: Some(id),
                                method: LinkMethod::TicketIdMatch,
                                matched_text: text.to_owned(),
                            },
                        )
                    })
                })
                .collect();
            if matched.is_empty() {
                if self.mode == LinkMode::IdAndKeyword {
                    if let Some(text) = self.keyword_match(&commit.message) {
                        links.push(FixLink {
                            commit_hash: commit.hash.clone(),
                            ticket_id: None,
                            method: LinkMethod::Keyword,
                            matched_text: text.to_owned(),
                        });
                    }
                }
                continue;
            }
            matched.sort_by_key(|(pos, _)| *pos);
            links.extend(matched.into_iter().map(|(_, link)| link));
        }
        links
    }
}

pub fn is_fix_message(message: &str, config: &LinkConfig) -> Result<bool> {
    Ok(Linker::new(config)?.is_fix_message(message))
}

pub fn link_fixes(commits: &[CommitRecord], tickets: &[BugTicket], config: &LinkConfig) -> Result<Vec<FixLink>> {
    Ok(Linker::new(config)?.link_fixes(commits, tickets))
}

/// Tickets parsed from an export together with per-record warnings.
#[derive(Debug, Clone, Default)]
pub struct TicketExport {
    pub tickets: Vec<BugTicket>,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct RawTicket {
    id: Option<String>,
    time: Option<String>,
    changetime: Option<String>,
    status: Option<String>,
    ticket_type: Option<String>,
    summary: Option<String>,
}

/// Parses a Trac-style ticket export. Unknown columns are ignored; records
/// with a missing id or unreadable timestamps are skipped with a warning.
pub fn parse_ticket_export(mut reader: impl Read, format: ExportFormat) -> Result<TicketExport> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| {
        if e.kind() == std::io::ErrorKind::InvalidData {
            Error::MalformedExport("export is not valid UTF-8".into())
        } else {
            Error::Io(e)
        }
    })?;
    let raws = match format {
        ExportFormat::Csv => raw_from_csv(&text)?,
        ExportFormat::Json => raw_from_json(&text)?,
    };

    let mut export = TicketExport::default();
    let mut seen = HashSet::new();
    for (i, raw) in raws.into_iter().enumerate() {
        let record = i + 1;
        match build_ticket(raw) {
            Ok(ticket) => {
                if !seen.insert(ticket.ticket_id.clone()) {
                    export
                        .warnings
                        .push(format!("record {record}: duplicate ticket id {}, skipped", ticket.ticket_id));
                    continue;
                }
                export.tickets.push(ticket);
            }
            Err(reason) => export.warnings.push(format!("record {record}: {reason}, skipped")),
        }
    }
    for w in &export.warnings {
        log::warn!("tickets: {w}");
    }
    Ok(export)
}

fn raw_from_csv(text: &str) -> Result<Vec<RawTicket>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedExport(format!("unreadable header: {e}")))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().trim_start_matches("__").trim_end_matches("__").eq_ignore_ascii_case(name))
    };
    let id_col = column("id")
        .or_else(|| column("ticket"))
        .ok_or_else(|| Error::MalformedExport("header has no id column".into()))?;
    let time_col = column("time")
        .or_else(|| column("created"))
        .ok_or_else(|| Error::MalformedExport("header has no time column".into()))?;
    let (change_col, status_col, type_col, summary_col) =
        (column("changetime"), column("status"), column("type"), column("summary"));

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::MalformedExport(e.to_string()))?;
        let get = |c: Option<usize>| c.and_then(|c| record.get(c)).map(|s| s.trim().to_owned());
        out.push(RawTicket {
            id: get(Some(id_col)),
            time: get(Some(time_col)),
            changetime: get(change_col),
            status: get(status_col),
            ticket_type: get(type_col),
            summary: get(summary_col),
        });
    }
    Ok(out)
}

fn raw_from_json(text: &str) -> Result<Vec<RawTicket>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::MalformedExport(format!("invalid JSON: {e}")))?;
    let serde_json::Value::Array(items) = value else {
        return Err(Error::MalformedExport("expected a JSON array of tickets".into()));
    };
    let field = |obj: &serde_json::Map<String, serde_json::Value>, name: &str| {
        obj.get(name).and_then(|v| match v {
            serde_json::Value::String(s) => Some(s.trim().to_owned()),
            serde_json::Value::Number(n) => Some(n.to_string()),
            _ => None,
        })
    };
    Ok(items
        .iter()
        .map(|item| match item.as_object() {
            Some(obj) => RawTicket {
                id: field(obj, "id"),
                time: field(obj, "time"),
                changetime: field(obj, "changetime"),
                status: field(obj, "status"),
                ticket_type: field(obj, "type"),
                summary: field(obj, "summary"),
            },
            None => RawTicket::default(),
        })
        .collect())
}

fn build_ticket(raw: RawTicket) -> std::result::Result<BugTicket, String> {
    let id = raw
        .id
        .filter(|s| !s.is_empty())
        .ok_or_else(|| "missing ticket id".to_owned())?;
    let id = id.trim_start_matches('#').to_owned();
    let created_at = raw
        .time
        .as_deref()
        .ok_or_else(|| format!("ticket {id}: missing creation time"))
        .and_then(|t| parse_timestamp(t).ok_or_else(|| format!("ticket {id}: unreadable time {t:?}")))?;
    let status = raw.status.unwrap_or_default();
    let closed_at = if status.eq_ignore_ascii_case("closed") {
        let changed = raw
            .changetime
            .as_deref()
            .filter(|s| !s.is_empty())
            .map(|t| parse_timestamp(t).ok_or_else(|| format!("ticket {id}: unreadable changetime {t:?}")))
            .transpose()?;
        Some(changed.unwrap_or(created_at))
    } else {
        None
    };
    if closed_at.is_some_and(|c| c < created_at) {
        return Err(format!("ticket {id}: closed before it was created"));
    }
    Ok(BugTicket {
        ticket_id: id,
        created_at,
        closed_at,
        status,
        ticket_type: raw.ticket_type.unwrap_or_default(),
        summary: raw.summary.unwrap_or_default(),
    })
}

/// Accepts epoch seconds (or Trac's epoch microseconds), RFC 3339, and
/// naive `YYYY-MM-DD[ HH:MM:SS]` forms taken as UTC.
pub fn parse_timestamp(text: &str) -> Option<i64> {
    let text = text.trim();
    if let Ok(n) = text.parse::<i64>() {
        return Some(if n.abs() >= 100_000_000_000_000 { n / 1_000_000 } else { n });
    }
    if let Ok(f) = text.parse::<f64>() {
        return f.is_finite().then(|| f.floor() as i64);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f%:z", "%Y-%m-%d %H:%M:%S%.f%z", "%Y-%m-%dT%H:%M:%S%.f%z"] {
        if let Ok(dt) = DateTime::parse_from_str(text, fmt) {
            return Some(dt.timestamp());
        }
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(text, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}
