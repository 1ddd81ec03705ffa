use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::{kaplan_meier, CountObservation, KmPoint};
use super::{ExperimentConfig, HarnessError};
use crate::distributions::plus_shift;
use crate::dynamics::{Censoring, Engine, InitialState, SirsParams, StopRule, SurvivalRecord};
use crate::graphs::LazyGwTree;
use crate::par;
use crate::rng::SeedTable;

/// One tree trajectory as written to a JSONL artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeLine {
    pub cell: usize,
    pub replica: usize,
    #[serde(flatten)]
    pub record: SurvivalRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongSurvivalCell {
    pub lambda: f64,
    pub alpha: Option<f64>,
    pub trials: usize,
    pub ks: Vec<usize>,
    /// Fraction of trials observed with at least `k` root reinfections.
    pub raw: Vec<f64>,
    /// Kaplan-Meier estimate of the same curve, treating budget and horizon
    /// stops as withdrawals.
    pub km: Vec<KmPoint>,
    pub plateau: KmPoint,
    pub extinct: usize,
    pub reached_target: usize,
    /// Runs stopped by the node budget, event budget or horizon.
    pub cut_short: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongSurvivalReport {
    pub cells: Vec<StrongSurvivalCell>,
}

/// `1, 2, 4, ...` up to `target` (and `target` itself).
fn curve_points(target: usize) -> Vec<usize> {
    let mut ks = Vec::new();
    let mut k = 1;
    while k < target {
        ks.push(k);
        k *= 2;
    }
    ks.push(target);
    ks
}

/// Root-only start on a lazy tree with root law `mu+` and interior law `mu`,
/// for every `(lambda, alpha)` pair: how often the root is reinfected at least
/// `k` times before extinction.
pub fn strong_survival_report(config: &ExperimentConfig) -> Result<(Vec<TreeLine>, StrongSurvivalReport), HarnessError> {
    config.validate()?;
    let interior = config.distribution.as_ref().ok_or(HarnessError::Missing("distribution"))?.build()?;
    let root = plus_shift(&interior);
    let opts = &config.tree;
    let table = SeedTable::new(config.seed);
    let pairs = config.rate_pairs();
    let trials = config.trials;
    let stop = StopRule {
        horizon: Some(config.horizon),
        reinfections: Some(opts.target),
        event_budget: config.event_budget,
    };
    let records = par::map_chunked(
        pairs.len() * trials,
        4,
        || {
            let tree = LazyGwTree::new(root.clone(), interior.clone(), 0).with_budget(opts.node_budget);
            let mut e = Engine::new(tree, SirsParams { lambda: pairs[0].0, alpha: pairs[0].1 });
            e.track_root(0, opts.epsilon);
            e
        },
        |engine, task| {
            let (c, r) = (task / trials, task % trials);
            let seed = table.replica_seed(c as u64, r as u64);
            engine.set_params(SirsParams { lambda: pairs[c].0, alpha: pairs[c].1 });
            engine.network_mut().reset(seed);
            engine.reset(&InitialState::RootInfected(0), seed).expect("root exists");
            engine.run_until(&stop)
        },
    );
    let lines: Vec<TreeLine> = records
        .into_iter()
        .enumerate()
        .map(|(task, record)| TreeLine { cell: task / trials, replica: task % trials, record })
        .collect();
    let report = summarize_tree(&lines, opts.target, opts.plateau_k);
    Ok((lines, report))
}

pub fn summarize_tree(lines: &[TreeLine], target: usize, plateau_k: usize) -> StrongSurvivalReport {
    let mut by_cell: BTreeMap<usize, Vec<&SurvivalRecord>> = BTreeMap::new();
    for l in lines {
        by_cell.entry(l.cell).or_default().push(&l.record);
    }
    let ks = curve_points(target);
    let cells = by_cell
        .values()
        .map(|recs| {
            let obs: Vec<CountObservation> = recs
                .iter()
                .map(|r| CountObservation {
                    count: r.reinfections.unwrap_or(0),
                    censored: r.censored.is_some() && r.censored != Some(Censoring::ReinfectionTarget),
                })
                .collect();
            let trials = recs.len();
            let raw = ks
                .iter()
                .map(|&k| obs.iter().filter(|o| o.count >= k).count() as f64 / trials as f64)
                .collect();
            let mut km_ks = ks.clone();
            km_ks.push(plateau_k);
            let mut km = kaplan_meier(&obs, &km_ks);
            let plateau = km.pop().expect("plateau point");
            StrongSurvivalCell {
                lambda: recs[0].lambda,
                alpha: recs[0].alpha,
                trials,
                ks: ks.clone(),
                raw,
                km,
                plateau,
                extinct: recs.iter().filter(|r| r.censored.is_none()).count(),
                reached_target: recs.iter().filter(|r| r.censored == Some(Censoring::ReinfectionTarget)).count(),
                cut_short: obs.iter().filter(|o| o.censored).count(),
            }
        })
        .collect();
    StrongSurvivalReport { cells }
}
