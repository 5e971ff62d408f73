//! Mining toolkit for just-in-time defect prediction.
//!
//! The pipeline reads a git repository and a bug-tracker export, links bug
//! fixing commits to tickets, traces bug-inducing commits with SZZ, computes
//! fourteen change-level metrics per commit, and exports a labeled dataset
//! keyed by commit hash. A small feed-forward classifier trained from scratch
//! is included as a baseline.
//!
//! Modules follow the pipeline order:
//!
//! - [`vcs`]: repository access and unified diff parsing
//! - [`tracker`]: ticket export parsing and fix linking
//! - [`szz`]: bug-inducing commit identification and commit labels
//! - [`metrics`]: change metrics and min-max normalization
//! - [`dataset`]: CSV persistence, summaries, extension reports
//! - [`model`]: baseline neural classifier, evaluation, ablation

pub mod config;
pub mod dataset;
mod error;
#[cfg(feature = "fixtures")]
pub mod fixture;
pub mod metrics;
pub mod model;
pub mod szz;
pub mod tracker;
pub mod vcs;

pub use error::{Error, Result};

pub use dataset::{DatasetSummary, ExtensionReport};
pub use metrics::{Feature, FeatureMatrix, FeatureVector, MetricsConfig};
pub use model::{EvalMetrics, NetworkParams, TrainConfig};
pub use szz::{CommitLabel, InducingPair};
pub use tracker::{BugTicket, FixLink, LinkConfig};
pub use vcs::{CommitRecord, FileDelta, Hunk, LineRef, RepoHandle};
