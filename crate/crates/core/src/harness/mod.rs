//! Experiment configuration, replica orchestration, censoring-aware
//! summaries and artifact output.
//!
//! Every replica gets its seed from a [`SeedTable`](crate::rng::SeedTable)
//! before any work is scheduled, and results are collected in index order, so
//! artifact bodies do not depend on the thread count.

mod config;
mod expander;
mod output;
mod probe;
pub mod stats;
mod sweep;
mod tree;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use config::{
    CompareOptions, ExperimentConfig, ExperimentKind, ExpanderOptions, Grid, ProbeKind, ProbeOptions, StarOptions,
    SweepOptions, TreeOptions,
};
pub use expander::{expander_report, ExpanderLine, ExpanderSummary};
pub use output::{jsonl_body, read_csv, read_jsonl, Artifact, RunHeader};
pub use probe::{lemma_probe, star_report, ProbeRow, ProbeTable};
pub use sweep::{
    compare_survival, run_sweep, summarize_sweep, CellSummary, CompareReport, CompareRow, ReplicaLine, SlopeFit,
    SweepSummary,
};
pub use tree::{strong_survival_report, summarize_tree, StrongSurvivalCell, StrongSurvivalReport, TreeLine};

use crate::distributions::DistributionError;
use crate::dynamics::DynamicsError;
use crate::structure::StructureError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("config is missing {0}")]
    Missing(&'static str),
    #[error("compared configs differ in {0}")]
    Mismatch(&'static str),
    #[error("cannot write {path}: {source}")]
    Unwritable { path: PathBuf, source: std::io::Error },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} has no header line")]
    EmptyArtifact(PathBuf),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Whatever an experiment produced, by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    SurvivalSweep(SweepSummary),
    HeavyTailCompare(CompareReport),
    TreeStrongSurvival(StrongSurvivalReport),
    StarScaling(ProbeTable),
    LemmaProbe(ProbeTable),
    ExpanderReport(ExpanderSummary),
}

impl Outcome {
    /// `Some` for experiments that carry their own pass/fail verdict.
    pub fn passed(&self) -> Option<bool> {
        match self {
            Outcome::StarScaling(t) | Outcome::LemmaProbe(t) => Some(t.all_pass()),
            Outcome::ExpanderReport(s) => Some(s.refused == 0 && s.cert_pass == s.runs),
            _ => None,
        }
    }
}

/// Runs `config` on `threads` workers (the global pool when `None`) and
/// writes its artifact to `config.out` when set. The output file is opened
/// before any simulation starts.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<Outcome, HarnessError> {
    config.validate()?;
    let artifact = config.out.as_deref().map(Artifact::create).transpose()?;
    let header = RunHeader::new(config, threads);
    crate::par::with_threads(threads, || -> Result<Outcome, HarnessError> {
        Ok(match config.kind {
            ExperimentKind::SurvivalSweep => {
                let (lines, summary) = run_sweep(config, None)?;
                if let Some(a) = artifact {
                    a.write_jsonl(&header, &lines)?;
                }
                Outcome::SurvivalSweep(summary)
            }
            ExperimentKind::HeavyTailCompare => {
                let other = config.compare_config()?;
                let (lines, report) = compare_survival(config, &other)?;
                if let Some(a) = artifact {
                    a.write_jsonl(&header, &lines)?;
                }
                Outcome::HeavyTailCompare(report)
            }
            ExperimentKind::TreeStrongSurvival => {
                let (lines, report) = strong_survival_report(config)?;
                if let Some(a) = artifact {
                    a.write_jsonl(&header, &lines)?;
                }
                Outcome::TreeStrongSurvival(report)
            }
            ExperimentKind::StarScaling => {
                let table = star_report(config)?;
                if let Some(a) = artifact {
                    a.write_jsonl(&header, &table.rows)?;
                }
                Outcome::StarScaling(table)
            }
            ExperimentKind::LemmaProbe => {
                let table = lemma_probe(config)?;
                if let Some(a) = artifact {
                    a.write_csv(&header, &table.rows)?;
                }
                Outcome::LemmaProbe(table)
            }
            ExperimentKind::ExpanderReport => {
                let (lines, summary) = expander_report(config)?;
                if let Some(a) = artifact {
                    a.write_jsonl(&header, &lines)?;
                }
                Outcome::ExpanderReport(summary)
            }
        })
    })
}

impl ExperimentConfig {
    /// The second arm of a heavy-tail comparison.
    pub fn compare_config(&self) -> Result<ExperimentConfig, HarnessError> {
        let cmp = self.compare.as_ref().ok_or(HarnessError::Missing("compare"))?;
        let first = self.distribution.as_ref().ok_or(HarnessError::Missing("distribution"))?;
        let mut spec = cmp.distribution.clone();
        if cmp.match_mean {
            if let crate::distributions::DistributionSpec::Poisson { mean } = &mut spec {
                *mean = first.build()?.mean();
            }
        }
        let mut other = self.clone();
        other.kind = ExperimentKind::SurvivalSweep;
        other.distribution = Some(spec);
        other.compare = None;
        other.out = None;
        Ok(other)
    }
}
