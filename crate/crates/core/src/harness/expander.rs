use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, HarnessError};
use crate::distributions::TailFunction;
use crate::par;
use crate::rng::SeedTable;
use crate::structure::{expander_pipeline, pipeline_at, PipelineParams, PipelineReport, StructureError, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpanderLine {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PipelineReport>,
    /// Why the pipeline declined to run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refused: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpanderSummary {
    pub runs: usize,
    pub refused: usize,
    /// `theta >= u_M M / (24 d)`.
    pub theta_ok: usize,
    /// `|W0| >= |W| / 2`.
    pub w0_ok: usize,
    pub cert_pass: usize,
    pub m: Option<u64>,
}

impl ExpanderSummary {
    pub fn from_lines(lines: &[ExpanderLine]) -> Self {
        let reports: Vec<&PipelineReport> = lines.iter().filter_map(|l| l.report.as_ref()).collect();
        Self {
            runs: lines.len(),
            refused: lines.iter().filter(|l| l.refused.is_some()).count(),
            theta_ok: reports.iter().filter(|r| r.theta >= r.theta_bound).count(),
            w0_ok: reports.iter().filter(|r| 2 * r.w0 >= r.w).count(),
            cert_pass: reports.iter().filter(|r| r.verdict == Verdict::Pass).count(),
            m: reports.first().map(|r| r.m),
        }
    }
}

/// One structural pipeline run per `(n, trial)`.
pub fn expander_report(config: &ExperimentConfig) -> Result<(Vec<ExpanderLine>, ExpanderSummary), HarnessError> {
    config.validate()?;
    let mu = config.distribution.as_ref().ok_or(HarnessError::Missing("distribution"))?.build()?;
    let opts = &config.expander;
    let f = TailFunction::multiple(opts.tail_factor)?;
    let params = PipelineParams { k: opts.k, beta: opts.beta, trials: opts.cert_trials };
    let table = SeedTable::new(config.seed);
    let trials = config.trials;
    let sizes = &config.grid.n;
    let results = par::map_indexed(sizes.len() * trials, |task| {
        let (ni, t) = (task / trials, task % trials);
        let seed = table.replica_seed(ni as u64, t as u64);
        let mut rng = crate::rng::stream(seed);
        let run = match opts.m {
            Some(m) => pipeline_at(&mu, &f, sizes[ni], m, params, &mut rng),
            None => expander_pipeline(&mu, &f, sizes[ni], params, &mut rng),
        };
        (ni, t, seed, run.map(|(_, _, _, report)| report))
    });
    let mut lines = Vec::with_capacity(results.len());
    for (ni, trial, seed, run) in results {
        let (report, refused) = match run {
            Ok(r) => (Some(r), None),
            Err(e @ StructureError::NoAdmissibleM { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        };
        lines.push(ExpanderLine { n: sizes[ni], trial, seed, report, refused });
    }
    let summary = ExpanderSummary::from_lines(&lines);
    Ok((lines, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;
    use crate::harness::ExperimentKind;

    #[test]
    fn refusal_is_recorded_per_run() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::ExpanderReport);
        cfg.distribution = Some(DistributionSpec::Poisson { mean: 3.0 });
        cfg.grid.n = vec![200];
        cfg.trials = 2;
        let (lines, s) = expander_report(&cfg).unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!(s.refused, 2);
        assert!(lines[0].refused.as_deref().unwrap().contains("M"));
    }

    #[test]
    fn forced_m_runs() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::ExpanderReport);
        cfg.distribution = Some(DistributionSpec::Powerlaw { exponent: 2.5, cutoff: Some(1000) });
        cfg.grid.n = vec![2000];
        cfg.trials = 2;
        cfg.expander.m = Some(20);
        cfg.expander.cert_trials = 200;
        let (lines, s) = expander_report(&cfg).unwrap();
        assert_eq!(s.refused, 0);
        assert_eq!(s.m, Some(20));
        assert!(lines.iter().all(|l| l.report.as_ref().unwrap().m == 20));
    }
}
