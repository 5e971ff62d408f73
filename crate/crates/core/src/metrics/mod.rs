//! Change-level metrics.
//!
//! Fourteen features per commit, grouped as diffusion (NS, ND, NF, entropy),
//! size (LA, LD, LT), purpose (FIX), history (NDEV, AGE, NUC) and experience
//! (EXP, REXP, SEXP). [`MetricsConfig`] selects between the normalization
//! variants found in the literature and in the reference tooling.

mod diffusion;
mod entropy;
mod extract;
mod history;
mod normalize;
mod size;

pub use diffusion::{diffusion_metrics, directory_of, subsystem_of, Diffusion};
pub use entropy::{change_entropy, shannon_entropy, window_entropy};
pub use extract::FeatureExtractor;
pub use history::{ExperienceMetrics, HistoryIndex, HistoryMetrics, YEAR_SECONDS};
pub use normalize::{min_max_normalize, ColumnRange, MinMaxScaler};
pub use size::{size_metrics, size_metrics_from_counts, SizeMetrics};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dataset columns, in export order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Ns,
    Nd,
    Nf,
    Entropy,
    La,
    Ld,
    Lt,
    Fix,
    Ndev,
    Age,
    Nuc,
    Exp,
    Rexp,
    Sexp,
}

impl Feature {
    pub const ALL: [Feature; 14] = [
        Feature::Ns,
        Feature::Nd,
        Feature::Nf,
        Feature::Entropy,
        Feature::La,
        Feature::Ld,
        Feature::Lt,
        Feature::Fix,
        Feature::Ndev,
        Feature::Age,
        Feature::Nuc,
        Feature::Exp,
        Feature::Rexp,
        Feature::Sexp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Ns => "ns",
            Feature::Nd => "nd",
            Feature::Nf => "nf",
            Feature::Entropy => "entropy",
            Feature::La => "la",
            Feature::Ld => "ld",
            Feature::Lt => "lt",
            Feature::Fix => "fix",
            Feature::Ndev => "ndev",
            Feature::Age => "age",
            Feature::Nuc => "nuc",
            Feature::Exp => "exp",
            Feature::Rexp => "rexp",
            Feature::Sexp => "sexp",
        }
    }

    pub fn is_boolean(self) -> bool {
        self == Feature::Fix
    }

    /// Parses a comma-separated feature list.
    pub fn parse_list(s: &str) -> Result<Vec<Feature>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == lower)
            .ok_or_else(|| Error::Config(format!("unknown feature {s:?}")))
    }
}

/// One dataset row.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub commit_hash: String,
    pub ns: f64,
    pub nd: f64,
    pub nf: f64,
    pub entropy: f64,
    pub la: f64,
    pub ld: f64,
    pub lt: f64,
    pub fix: bool,
    pub ndev: f64,
    pub age: f64,
    pub nuc: f64,
    pub exp: f64,
    pub rexp: f64,
    pub sexp: f64,
    pub defective: bool,
}

impl FeatureVector {
    pub fn get(&self, feature: Feature) -> f64 {
        match feature {
            Feature::Ns => self.ns,
            Feature::Nd => self.nd,
            Feature::Nf => self.nf,
            Feature::Entropy => self.entropy,
            Feature::La => self.la,
            Feature::Ld => self.ld,
            Feature::Lt => self.lt,
            Feature::Fix => f64::from(u8::from(self.fix)),
            Feature::Ndev => self.ndev,
            Feature::Age => self.age,
            Feature::Nuc => self.nuc,
            Feature::Exp => self.exp,
            Feature::Rexp => self.rexp,
            Feature::Sexp => self.sexp,
        }
    }

    pub fn set(&mut self, feature: Feature, value: f64) {
        let slot = match feature {
            Feature::Ns => &mut self.ns,
            Feature::Nd => &mut self.nd,
            Feature::Nf => &mut self.nf,
            Feature::Entropy => &mut self.entropy,
            Feature::La => &mut self.la,
            Feature::Ld => &mut self.ld,
            Feature::Lt => &mut self.lt,
            Feature::Fix => {
                self.fix = value >= 0.5;
                return;
            }
            Feature::Ndev => &mut self.ndev,
            Feature::Age => &mut self.age,
            Feature::Nuc => &mut self.nuc,
            Feature::Exp => &mut self.exp,
            Feature::Rexp => &mut self.rexp,
            Feature::Sexp => &mut self.sexp,
        };
        *slot = value;
    }

    pub fn features(&self, selection: &[Feature]) -> Vec<f64> {
        selection.iter().map(|&f| self.get(f)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<FeatureVector>) -> Self {
        Self { rows }
    }

    /// Column order used by every export.
    pub fn feature_order() -> &'static [Feature] {
        &Feature::ALL
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, feature: Feature) -> Vec<f64> {
        self.rows.iter().map(|r| r.get(feature)).collect()
    }
}

macro_rules! config_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    other => Err(Error::Config(format!(
                        concat!("unknown ", stringify!($name), " {:?}"),
                        other
                    ))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self {
                    $(Self::$variant => $text),+
                })
            }
        }
    };
}

config_enum!(
    /// Per-commit entropy weights files by modified lines; windowed entropy
    /// weights them by touch counts over a trailing time window.
    EntropyMode { PerCommit => "per_commit", Windowed => "windowed" }
);
config_enum!(LaLdNorm { Raw => "raw", ByNewFileSize => "by_new_file_size", ByLt => "by_lt" });
config_enum!(LtNorm { Raw => "raw", ByNf => "by_nf" });
config_enum!(NfNorm { Raw => "raw", ByRepoFileCount => "by_repo_file_count" });
config_enum!(NucNorm { Raw => "raw", ByNf => "by_nf" });

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    pub entropy_mode: EntropyMode,
    pub window_days: f64,
    pub la_ld_norm: LaLdNorm,
    pub lt_norm: LtNorm,
    pub nf_norm: NfNorm,
    pub nuc_norm: NucNorm,
    /// Added to the elapsed-years count in the REXP weight `1/(n+1)`.
    /// `-1` treats the most recent year and the one before it alike.
    pub rexp_year_offset: i32,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            entropy_mode: EntropyMode::PerCommit,
            window_days: 14.0,
            la_ld_norm: LaLdNorm::Raw,
            lt_norm: LtNorm::Raw,
            nf_norm: NfNorm::ByRepoFileCount,
            nuc_norm: NucNorm::Raw,
            rexp_year_offset: 0,
        }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_days > 0.0 && self.window_days.is_finite()) {
            return Err(Error::Config("window_days must be positive".into()));
        }
        if !(-1..=0).contains(&self.rexp_year_offset) {
            return Err(Error::Config("rexp_year_offset must be 0 or -1".into()));
        }
        Ok(())
    }
}
