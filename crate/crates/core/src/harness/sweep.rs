use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::{bootstrap_median_ratio, censored_fraction, censored_median, linear_fit, LinearFit, Observation};
use super::{ExperimentConfig, HarnessError};
use crate::dynamics::{Censoring, Engine, InitialState, SirsParams, StopRule, SurvivalRecord};
use crate::graphs::{configuration_model, MultiGraph};
use crate::par;
use crate::rng::{stream, SeedTable};

const GRAPH_STREAM: u64 = 0x4752_4150;
const BOOTSTRAP_STREAM: u64 = 0x424f_4f54;

/// One replica as written to a JSONL artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaLine {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm: Option<String>,
    pub cell: usize,
    pub replica: usize,
    #[serde(flatten)]
    pub record: SurvivalRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub lambda: f64,
    pub alpha: Option<f64>,
    pub trials: usize,
    /// Median survival time; a lower bound when `median_lower_bound`.
    pub median: f64,
    pub median_lower_bound: bool,
    pub censored_fraction: f64,
    /// Runs cut by the event budget rather than the horizon.
    pub budget_censored: usize,
}

/// Log-median survival against `n` at fixed rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub lambda: f64,
    pub alpha: Option<f64>,
    /// Fit over the cells with censored fraction below one half.
    pub fit: Option<LinearFit>,
    pub cells_used: usize,
    /// Fit over every cell, censored medians included. Present only when some
    /// cell was excluded above; its slope is a lower bound.
    pub lower_bound_fit: Option<LinearFit>,
    pub censored_at_largest_n: f64,
}

impl SlopeFit {
    /// Positive slope with `R^2 >= 0.9`, or at least half the runs censored at
    /// the largest `n`.
    pub fn exponential_signal(&self) -> bool {
        self.fit.is_some_and(|f| f.slope > 0.0 && f.r2 >= 0.9) || self.censored_at_largest_n >= 0.5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub cells: Vec<CellSummary>,
    pub fits: Vec<SlopeFit>,
}

/// Cells in order: every `n`, and within it every `(lambda, alpha)` pair.
fn cells(config: &ExperimentConfig) -> Vec<(usize, usize, SirsParams)> {
    let pairs = config.rate_pairs();
    let mut out = Vec::new();
    for (ni, &n) in config.grid.n.iter().enumerate() {
        for &(l, a) in &pairs {
            out.push((ni, n, SirsParams { lambda: l, alpha: a }));
        }
    }
    out
}

/// All replicas of a survival sweep, all vertices infected at time 0. With
/// `arm` set the seeds come from a child table and lines carry the label.
pub fn run_sweep(config: &ExperimentConfig, arm: Option<(u64, &str)>) -> Result<(Vec<ReplicaLine>, SweepSummary), HarnessError> {
    config.validate()?;
    let mu = config.distribution.as_ref().ok_or(HarnessError::Missing("distribution"))?.build()?;
    let master = SeedTable::new(config.seed);
    let table = arm.map_or(master, |(k, _)| master.child(k));
    let graph_table = table.child(GRAPH_STREAM);
    let g = config.sweep.graphs;
    let sizes = &config.grid.n;
    let graphs: Vec<MultiGraph> = par::map_indexed(sizes.len() * g, |i| {
        let (ni, gi) = (i / g, i % g);
        configuration_model(sizes[ni], &mu, &mut graph_table.replica_stream(ni as u64, gi as u64)).0
    });
    let cells = cells(config);
    let trials = config.trials;
    let stop = StopRule { horizon: Some(config.horizon), reinfections: None, event_budget: config.event_budget };
    let records: Vec<SurvivalRecord> = par::map_indexed(cells.len() * trials, |task| {
        let (c, r) = (task / trials, task % trials);
        let (ni, _, params) = cells[c];
        let graph = &graphs[ni * g + r % g];
        let mut engine = Engine::new(graph, params);
        engine.reset(&InitialState::AllInfected, table.replica_seed(c as u64, r as u64)).expect("all-infected start");
        engine.run_until(&stop)
    });
    let label = arm.map(|(_, l)| l.to_string());
    let lines: Vec<ReplicaLine> = records
        .into_iter()
        .enumerate()
        .map(|(task, record)| ReplicaLine { arm: label.clone(), cell: task / trials, replica: task % trials, record })
        .collect();
    let summary = summarize_sweep(&lines);
    Ok((lines, summary))
}

fn observation(r: &SurvivalRecord) -> Observation {
    Observation { time: r.observed_time(), censored: r.is_censored() }
}

/// Rebuilds the summary from replica lines, e.g. read back from an artifact.
pub fn summarize_sweep(lines: &[ReplicaLine]) -> SweepSummary {
    let mut by_cell: BTreeMap<usize, Vec<&SurvivalRecord>> = BTreeMap::new();
    for l in lines {
        by_cell.entry(l.cell).or_default().push(&l.record);
    }
    let cells: Vec<CellSummary> = by_cell
        .values()
        .map(|recs| {
            let obs: Vec<Observation> = recs.iter().map(|r| observation(r)).collect();
            let med = censored_median(&obs).expect("cells are nonempty");
            CellSummary {
                n: recs[0].n,
                lambda: recs[0].lambda,
                alpha: recs[0].alpha,
                trials: recs.len(),
                median: med.value,
                median_lower_bound: med.lower_bound,
                censored_fraction: censored_fraction(&obs),
                budget_censored: recs.iter().filter(|r| r.censored == Some(Censoring::EventBudget)).count(),
            }
        })
        .collect();
    let mut rates: Vec<(f64, Option<f64>)> = Vec::new();
    for c in &cells {
        if !rates.contains(&(c.lambda, c.alpha)) {
            rates.push((c.lambda, c.alpha));
        }
    }
    let fits = rates
        .into_iter()
        .map(|(lambda, alpha)| {
            let group: Vec<&CellSummary> =
                cells.iter().filter(|c| c.lambda == lambda && c.alpha == alpha && c.median > 0.0).collect();
            let kept: Vec<&&CellSummary> = group.iter().filter(|c| c.censored_fraction < 0.5).collect();
            let fit_of = |cs: &[&CellSummary]| {
                let xs: Vec<f64> = cs.iter().map(|c| c.n as f64).collect();
                let ys: Vec<f64> = cs.iter().map(|c| c.median.ln()).collect();
                linear_fit(&xs, &ys)
            };
            let kept_cells: Vec<&CellSummary> = kept.iter().map(|c| **c).collect();
            let lower_bound_fit = if kept.len() < group.len() { fit_of(&group) } else { None };
            let censored_at_largest_n =
                group.iter().max_by_key(|c| c.n).map(|c| c.censored_fraction).unwrap_or(0.0);
            SlopeFit {
                lambda,
                alpha,
                fit: fit_of(&kept_cells),
                cells_used: kept.len(),
                lower_bound_fit,
                censored_at_largest_n,
            }
        })
        .collect();
    SweepSummary { cells, fits }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub n: usize,
    pub lambda: f64,
    pub alpha: Option<f64>,
    pub median_a: f64,
    pub median_b: f64,
    pub a_lower_bound: bool,
    pub b_lower_bound: bool,
    /// `median_a / median_b`.
    pub ratio: f64,
    /// Bootstrap 95% percentile interval for the ratio.
    pub ci: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub mean_degree_a: f64,
    pub mean_degree_b: f64,
    pub rows: Vec<CompareRow>,
    pub a: SweepSummary,
    pub b: SweepSummary,
}

/// Runs both sweeps on independent seed streams and compares median survival
/// cell by cell.
pub fn compare_survival(
    a: &ExperimentConfig,
    b: &ExperimentConfig,
) -> Result<(Vec<ReplicaLine>, CompareReport), HarnessError> {
    if a.grid.n != b.grid.n {
        return Err(HarnessError::Mismatch("grid.n"));
    }
    if a.trials != b.trials {
        return Err(HarnessError::Mismatch("trials"));
    }
    if a.rate_pairs() != b.rate_pairs() {
        return Err(HarnessError::Mismatch("rates"));
    }
    let mean = |c: &ExperimentConfig| -> Result<f64, HarnessError> {
        Ok(c.distribution.as_ref().ok_or(HarnessError::Missing("distribution"))?.build()?.mean())
    };
    let (la, sa) = run_sweep(a, Some((1, "a")))?;
    let (lb, sb) = run_sweep(b, Some((2, "b")))?;
    let resamples = a.compare.as_ref().map_or(2000, |c| c.resamples);
    let boot = SeedTable::new(a.seed).child(BOOTSTRAP_STREAM);
    let rows = sa
        .cells
        .iter()
        .zip(&sb.cells)
        .enumerate()
        .map(|(c, (ca, cb))| {
            let obs = |lines: &[ReplicaLine]| -> Vec<Observation> {
                lines.iter().filter(|l| l.cell == c).map(|l| observation(&l.record)).collect()
            };
            let mut rng = stream(boot.replica_seed(c as u64, 0));
            let ci = bootstrap_median_ratio(&obs(&la), &obs(&lb), resamples, 0.95, &mut rng);
            CompareRow {
                n: ca.n,
                lambda: ca.lambda,
                alpha: ca.alpha,
                median_a: ca.median,
                median_b: cb.median,
                a_lower_bound: ca.median_lower_bound,
                b_lower_bound: cb.median_lower_bound,
                ratio: ca.median / cb.median,
                ci,
            }
        })
        .collect();
    let report = CompareReport { mean_degree_a: mean(a)?, mean_degree_b: mean(b)?, rows, a: sa, b: sb };
    let mut lines = la;
    lines.extend(lb);
    Ok((lines, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig::from_toml(
            r#"
kind = "survival-sweep"
seed = 5
trials = 40
horizon = 50.0
[distribution]
kind = "poisson"
mean = 3.0
[grid]
lambda = [1.5]
alpha = [2.0]
n = [20, 40, 80]
"#,
        )
        .unwrap()
    }

    #[test]
    fn single_replica_single_line() {
        let mut cfg = small();
        cfg.trials = 1;
        cfg.grid.n = vec![10];
        let (lines, summary) = run_sweep(&cfg, None).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(summary.cells.len(), 1);
        assert_eq!(summary.cells[0].trials, 1);
    }

    #[test]
    fn censoring_is_consistent() {
        let (lines, summary) = run_sweep(&small(), None).unwrap();
        for l in &lines {
            let r = &l.record;
            assert_eq!(r.extinction_time.is_some(), r.censored.is_none());
            if r.is_censored() {
                assert_eq!(r.horizon, Some(50.0));
            }
        }
        for c in &summary.cells {
            assert!((0.0..=1.0).contains(&c.censored_fraction));
            if c.censored_fraction == 0.0 {
                assert!(!c.median_lower_bound);
            }
            if c.censored_fraction > 0.5 {
                assert!(c.median_lower_bound);
            }
        }
    }

    #[test]
    fn identical_arms_give_ratio_one() {
        let mut a = small();
        a.grid.n = vec![30];
        a.trials = 200;
        a.horizon = 1e3;
        a.sweep.graphs = a.trials;
        let (_, rep) = compare_survival(&a, &a).unwrap();
        let row = &rep.rows[0];
        let (lo, hi) = row.ci.unwrap();
        assert!(lo <= 1.0 && 1.0 <= hi, "{row:?}");
    }

    #[test]
    fn mismatched_arms_are_rejected() {
        let a = small();
        let mut b = small();
        b.trials = 3;
        assert!(matches!(compare_survival(&a, &b), Err(HarnessError::Mismatch("trials"))));
    }
}
