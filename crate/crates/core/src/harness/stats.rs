//! Censoring-aware summaries and the goodness-of-fit tests used by the
//! acceptance suite.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::rng::RandomStream;

/// A survival time or, when `censored`, a lower bound on one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub time: f64,
    pub censored: bool,
}

/// Sample median. When an order statistic involved is censored the value is
/// only a lower bound and `lower_bound` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Median {
    pub value: f64,
    pub lower_bound: bool,
}

pub fn censored_median(obs: &[Observation]) -> Option<Median> {
    if obs.is_empty() {
        return None;
    }
    let mut sorted: Vec<Observation> = obs.to_vec();
    sorted.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.censored.cmp(&b.censored)));
    let n = sorted.len();
    let (lo, hi) = (sorted[(n - 1) / 2], sorted[n / 2]);
    Some(Median { value: 0.5 * (lo.time + hi.time), lower_bound: lo.censored || hi.censored })
}

pub fn censored_fraction(obs: &[Observation]) -> f64 {
    if obs.is_empty() {
        return 0.0;
    }
    obs.iter().filter(|o| o.censored).count() as f64 / obs.len() as f64
}

/// Ordinary least squares `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit { slope, intercept: my - slope * mx, r2 })
}

/// Percentile bootstrap interval for `median(a) / median(b)`.
pub fn bootstrap_median_ratio(
    a: &[Observation],
    b: &[Observation],
    resamples: usize,
    level: f64,
    rng: &mut RandomStream,
) -> Option<(f64, f64)> {
    if a.is_empty() || b.is_empty() || resamples == 0 {
        return None;
    }
    let mut ratios = Vec::with_capacity(resamples);
    let mut ra = vec![a[0]; a.len()];
    let mut rb = vec![b[0]; b.len()];
    for _ in 0..resamples {
        for slot in ra.iter_mut() {
            *slot = a[rng.random_range(0..a.len())];
        }
        for slot in rb.iter_mut() {
            *slot = b[rng.random_range(0..b.len())];
        }
        let ma = censored_median(&ra)?.value;
        let mb = censored_median(&rb)?.value;
        ratios.push(ma / mb);
    }
    ratios.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Some((quantile_sorted(&ratios, tail), quantile_sorted(&ratios, 1.0 - tail)))
}

fn quantile_sorted(xs: &[f64], q: f64) -> f64 {
    let pos = q * (xs.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos - pos.floor());
    if i + 1 < xs.len() {
        xs[i] + frac * (xs[i + 1] - xs[i])
    } else {
        xs[i]
    }
}

/// Kolmogorov-Smirnov statistic of `samples` against a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic Kolmogorov tail `P(sqrt(n) D > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square of `observed` counts against category probabilities.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> Option<ChiSquare> {
    if observed.len() != probs.len() || observed.len() < 2 {
        return None;
    }
    let total: u64 = observed.iter().sum();
    let statistic: f64 = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = observed.len() - 1;
    let p_value = ChiSquared::new(dof as f64).ok()?.sf(statistic);
    Some(ChiSquare { statistic, dof, p_value })
}

/// One trial of a count-valued survival experiment: how many reinfections the
/// root achieved, and whether the run was cut short before the count settled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountObservation {
    pub count: usize,
    pub censored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmPoint {
    pub k: usize,
    pub survival: f64,
    pub se: f64,
    pub at_risk: usize,
}

/// Kaplan-Meier estimate of `P(count >= k)` with Greenwood standard errors.
///
/// A finished trial with count `c` fails the step `c -> c + 1`. A censored
/// trial with count `c` is known to have passed every step below `c` and is
/// withdrawn before step `c`.
pub fn kaplan_meier(obs: &[CountObservation], ks: &[usize]) -> Vec<KmPoint> {
    let top = ks.iter().copied().max().unwrap_or(0);
    let mut deaths = vec![0usize; top + 1];
    let mut leave = vec![0usize; top + 2];
    for o in obs {
        if o.censored {
            leave[o.count.min(top + 1)] += 1;
        } else if o.count <= top {
            deaths[o.count] += 1;
            leave[o.count] += 1;
        } else {
            leave[top + 1] += 1;
        }
    }
    // risk[j]: trials whose fate at step j -> j + 1 is observed.
    let mut remaining = obs.len();
    let mut s = 1.0;
    let mut green = 0.0;
    let mut curve = Vec::with_capacity(top + 1);
    for j in 0..=top {
        let censored_here = leave[j] - deaths.get(j).copied().unwrap_or(0);
        curve.push((s, green, remaining));
        let at_risk = remaining - censored_here;
        let d = deaths[j];
        if at_risk > 0 && d > 0 {
            s *= 1.0 - d as f64 / at_risk as f64;
            if at_risk > d {
                green += d as f64 / (at_risk as f64 * (at_risk - d) as f64);
            }
        }
        remaining -= leave[j];
    }
    ks.iter()
        .map(|&k| {
            let (s, g, r) = curve[k];
            KmPoint { k, survival: s, se: if s > 0.0 { s * g.sqrt() } else { 0.0 }, at_risk: r }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn exact(t: f64) -> Observation {
        Observation { time: t, censored: false }
    }

    #[test]
    fn median_flags_censoring() {
        let obs = [exact(1.0), exact(3.0), exact(2.0)];
        assert_eq!(censored_median(&obs), Some(Median { value: 2.0, lower_bound: false }));
        let obs = [exact(1.0), Observation { time: 10.0, censored: true }, Observation { time: 10.0, censored: true }];
        assert_eq!(censored_median(&obs), Some(Median { value: 10.0, lower_bound: true }));
        assert_eq!(censored_median(&[]), None);
    }

    #[test]
    fn fit_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 + 2.0 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 0.5).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_against_uniform() {
        let mut rng = stream(3);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!(d < 0.015, "{d}");
        assert!(kolmogorov_sf(d * (xs.len() as f64).sqrt()) > 0.001);
        let ys: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_two_sample(&xs, &ys) < 0.02);
        let shifted: Vec<f64> = ys.iter().map(|y| y + 0.1).collect();
        assert!((ks_two_sample(&xs, &shifted) - 0.1).abs() < 0.02);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Standard table: P(K > 1.36) ~ 0.049, P(K > 1.63) ~ 0.0098.
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 1e-3);
        assert!((kolmogorov_sf(1.63) - 0.0098).abs() < 5e-4);
    }

    #[test]
    fn chi_square_tail() {
        // Two cells, statistic 3.841 at one degree of freedom is the 5% point.
        let c = chi_square(&[5980, 4020], &[0.59, 0.41]).unwrap();
        assert_eq!(c.dof, 1);
        let stat = (5980.0f64 - 5900.0).powi(2) / 5900.0 + (4020.0f64 - 4100.0).powi(2) / 4100.0;
        assert!((c.statistic - stat).abs() < 1e-9);
        let five = ChiSquared::new(1.0).unwrap().sf(3.841);
        assert!((five - 0.05).abs() < 1e-3);
    }

    #[test]
    fn km_without_censoring_is_empirical() {
        let obs: Vec<CountObservation> =
            [0, 1, 1, 3, 5].iter().map(|&c| CountObservation { count: c, censored: false }).collect();
        let km = kaplan_meier(&obs, &[0, 1, 2, 4, 6]);
        let s: Vec<f64> = km.iter().map(|p| p.survival).collect();
        assert_eq!(s, vec![1.0, 0.8, 0.4, 0.2, 0.0]);
    }

    #[test]
    fn km_handles_withdrawals() {
        // Counts 0 (done), 2 (cut short), 1 (done), 4 (done).
        let obs = [
            CountObservation { count: 0, censored: false },
            CountObservation { count: 2, censored: true },
            CountObservation { count: 1, censored: false },
            CountObservation { count: 4, censored: false },
        ];
        let km = kaplan_meier(&obs, &[1, 2, 3, 5]);
        // Step 0: 4 at risk, 1 dies. Step 1: 3 at risk, 1 dies. Step 2: the
        // censored trial leaves, 1 at risk, survives. Step 4: 1 at risk, dies.
        let expect = [0.75, 0.5, 0.5, 0.0];
        for (p, e) in km.iter().zip(expect) {
            assert!((p.survival - e).abs() < 1e-12, "{p:?}");
        }
        let g: f64 = 1.0 / (4.0 * 3.0) + 1.0 / (3.0 * 2.0);
        assert!((km[1].se - 0.5 * g.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_brackets_one_for_same_sample() {
        let mut rng = stream(1);
        let a: Vec<Observation> = (0..300).map(|_| exact(rng.random::<f64>())).collect();
        let (lo, hi) = bootstrap_median_ratio(&a, &a, 1000, 0.95, &mut stream(2)).unwrap();
        assert!(lo < 1.0 && hi > 1.0);
    }
}
