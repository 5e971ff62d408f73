use std::fs::File;
use std::io::{BufRead, BufReader};

use anyhow::Context as _;
use jitminer_core::szz::defect_lines;
use jitminer_core::{Error, InducingPair, RepoHandle};

const CONTEXT: u32 = 2;

fn read_pair(path: &std::path::Path, n: usize) -> anyhow::Result<InducingPair> {
    let file = File::open(path).with_context(|| format!("szz: reading {}", path.display()))?;
    let line = BufReader::new(file)
        .lines()
        .filter(|l| !matches!(l, Ok(text) if text.trim().is_empty()))
        .nth(n.wrapping_sub(1))
        .transpose()?
        .filter(|_| n >= 1)
        .ok_or_else(|| Error::UnknownPair(format!("{n} (pairs file {})", path.display())))?;
    serde_json::from_str(&line).with_context(|| format!("szz: pair {n} in {}", path.display()))
}

pub fn run(args: crate::LinesArgs) -> anyhow::Result<()> {
    let pair = read_pair(&args.pairs, args.pair)?;
    let handle = RepoHandle::open(&args.repo).context("vcs: opening repository")?;
    let lines = defect_lines(&handle, &pair).context("szz: tracing defect lines")?;
    println!("inducing {}", pair.inducing_hash);
    println!("fix      {}", pair.fix_hash);
    if let Some(t) = &pair.ticket_id {
        println!("ticket   {t}");
    }
    if lines.is_empty() {
        println!("no defect lines attributable to pair {}", args.pair);
        return Ok(());
    }
    let mut current: Option<(String, Vec<String>)> = None;
    for line in &lines {
        if current.as_ref().map(|(p, _)| p) != Some(&line.path) {
            let bytes = handle
                .file_at(&pair.inducing_hash, &line.path)?
                .unwrap_or_default();
            let text: Vec<String> = String::from_utf8_lossy(&bytes).lines().map(str::to_owned).collect();
            current = Some((line.path.clone(), text));
        }
        let (path, text) = current.as_ref().expect("file loaded");
        println!();
        println!("{path}:{}", line.line_no);
        let first = line.line_no.saturating_sub(CONTEXT).max(1);
        let last = (line.line_no + CONTEXT).min(text.len() as u32);
        for n in first..=last {
            let marker = if n == line.line_no { '>' } else { ' ' };
            println!("{marker} {n:>6} | {}", text[(n - 1) as usize]);
        }
    }
    Ok(())
}
