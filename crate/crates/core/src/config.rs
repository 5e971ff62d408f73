//! `key = value` run configuration files.
//!
//! Lines starting with `#` are comments, `[section]` headers are accepted and
//! ignored, values may be quoted. List values are comma separated, or a JSON
//! string array when an entry itself contains commas.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::metrics::{Feature, MetricsConfig};
use crate::model::{NormFit, TrainConfig};
use crate::szz::SzzConfig;
use crate::tracker::{ExportFormat, LinkConfig};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub repo_path: Option<PathBuf>,
    pub tickets_path: Option<PathBuf>,
    pub tickets_format: ExportFormat,
    pub output_dir: PathBuf,
    pub metrics: MetricsConfig,
    pub links: LinkConfig,
    pub szz: SzzConfig,
    pub train: TrainConfig,
    pub jobs: Option<usize>,
    pub log_level: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            repo_path: None,
            tickets_path: None,
            tickets_format: ExportFormat::Csv,
            output_dir: PathBuf::from("."),
            metrics: MetricsConfig::default(),
            links: LinkConfig::default(),
            szz: SzzConfig::default(),
            train: TrainConfig::default(),
            jobs: None,
            log_level: None,
        }
    }
}

fn unquote(raw: &str) -> &str {
    let v = raw.trim();
    for q in ['"', '\''] {
        if v.len() >= 2 && v.starts_with(q) && v.ends_with(q) {
            return &v[1..v.len() - 1];
        }
    }
    v
}

fn parse_list(raw: &str) -> Result<Vec<String>> {
    let v = raw.trim();
    if v.starts_with('[') {
        return Ok(serde_json::from_str(v)?);
    }
    Ok(unquote(v)
        .split(',')
        .map(|s| unquote(s).to_owned())
        .filter(|s| !s.is_empty())
        .collect())
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("expected a boolean, got {v:?}"))),
    }
}

fn parse_num<T: FromStr>(v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("expected a number, got {v:?}")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        text.parse()
    }

    /// Applies one key. Keys match the field names of the metrics, linking,
    /// SZZ and training configurations.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let v = unquote(raw);
        match key {
            "repo_path" | "repo" => self.repo_path = Some(PathBuf::from(v)),
            "tickets_path" | "tickets" => self.tickets_path = Some(PathBuf::from(v)),
            "tickets_format" => self.tickets_format = v.parse()?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "jobs" | "parallelism" => {
                let n: usize = parse_num(v)?;
                if n == 0 {
                    return Err(Error::Config("jobs must be at least 1".into()));
                }
                self.jobs = Some(n);
            }
            "log_level" => self.log_level = Some(v.to_owned()),

            "entropy_mode" => self.metrics.entropy_mode = v.parse()?,
            "window_days" => self.metrics.window_days = parse_num(v)?,
            "la_ld_norm" => self.metrics.la_ld_norm = v.parse()?,
            "lt_norm" => self.metrics.lt_norm = v.parse()?,
            "nf_norm" => self.metrics.nf_norm = v.parse()?,
            "nuc_norm" => self.metrics.nuc_norm = v.parse()?,
            "rexp_year_offset" => self.metrics.rexp_year_offset = parse_num(v)?,

            "id_patterns" => self.links.id_patterns = parse_list(raw)?,
            "fix_keywords" => self.links.fix_keywords = parse_list(raw)?,
            "require_defect_type" => self.links.require_defect_type = parse_bool(v)?,
            "word_boundary_match" => self.links.word_boundary_match = parse_bool(v)?,
            "links" | "link_mode" => self.links.mode = v.parse()?,

            "skip_whitespace" => self.szz.skip_whitespace = parse_bool(v)?,
            "partial_fix" => self.szz.partial_fix = parse_bool(v)?,

            "epochs" => self.train.epochs = parse_num(v)?,
            "learning_rate" | "lr" => self.train.learning_rate = parse_num(v)?,
            "adam_beta1" => self.train.adam_beta1 = parse_num(v)?,
            "adam_beta2" => self.train.adam_beta2 = parse_num(v)?,
            "adam_epsilon" => self.train.adam_epsilon = parse_num(v)?,
            "smooth_l1_beta" => self.train.smooth_l1_beta = parse_num(v)?,
            "split_ratio" | "split" => self.train.split_ratio = parse_num(v)?,
            "seed" => self.train.seed = parse_num(v)?,
            "features" => self.train.features = Feature::parse_list(&parse_list(raw)?.join(","))?,
            "hidden_width" => self.train.hidden_width = parse_num(v)?,
            "weight_layers" | "layers" => self.train.weight_layers = parse_num(v)?,
            "norm_fit" => self.train.norm_fit = v.parse::<NormFit>()?,
            "threshold" => self.train.threshold = parse_num(v)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.metrics.validate()?;
        self.train.validate()?;
        if self.links.id_patterns.is_empty() || self.links.fix_keywords.is_empty() {
            return Err(Error::Config("id_patterns and fix_keywords must be nonempty".into()));
        }
        Ok(())
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (line.starts_with('[') && line.ends_with(']') && !line.contains('=')) {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
