//! Degree laws, derived measures and the elementary closed forms used by the
//! dynamics probes.
//!
//! Every [`DegreePmf`] is materialized as a finite mass vector. Poisson laws
//! (and power laws given without a cutoff) are truncated at the smallest
//! support bound whose omitted tail mass is below `1e-12`; power laws with a
//! cutoff are normalized over `1..=cutoff`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RandomStream;

/// Omitted tail mass tolerated when materializing an analytic law.
pub const TRUNCATION_TAIL: f64 = 1e-12;

/// Largest support a power law without cutoff may be materialized to.
pub const MAX_MATERIALIZED_SUPPORT: u64 = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("degree {0} appears more than once in an explicit law")]
    DuplicateDegree(u64),
    #[error("negative mass {mass} at degree {degree}")]
    NegativeMass { degree: u64, mass: f64 },
    #[error("total mass {0} is not within 1e-12 of 1")]
    NotNormalized(f64),
    #[error("law has no positive mass")]
    Empty,
    #[error("power-law exponent must exceed 1, got {0}")]
    BadExponent(f64),
    #[error("power law with exponent {exponent} needs support up to {required} to drop the tail below 1e-12; give an explicit cutoff")]
    TailTooHeavy { exponent: f64, required: f64 },
    #[error("tail function multiplier must be at least 1, got {0}")]
    BadTailFunction(f64),
    #[error("hypoexponential law needs at least one rate")]
    NoRates,
}

/// Serializable description of a degree law, as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistributionSpec {
    /// All mass at `k`.
    Point { k: u64 },
    /// Explicit `(degree, mass)` pairs summing to one.
    Explicit { masses: Vec<(u64, f64)> },
    Poisson { mean: f64 },
    /// `mu(k) ∝ k^-exponent` for `k >= 1`.
    Powerlaw {
        exponent: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<u64>,
    },
    /// `mu(k) ∝ ln k / k^3` for `2 <= k <= cutoff`.
    LogCubic { cutoff: u64 },
}

impl DistributionSpec {
    pub fn build(&self) -> Result<DegreePmf, DistributionError> {
        match self {
            DistributionSpec::Point { k } => Ok(DegreePmf::point(*k)),
            DistributionSpec::Explicit { masses } => DegreePmf::explicit(masses),
            DistributionSpec::Poisson { mean } => DegreePmf::poisson(*mean),
            DistributionSpec::Powerlaw { exponent, cutoff } => DegreePmf::powerlaw(*exponent, *cutoff),
            DistributionSpec::LogCubic { cutoff } => DegreePmf::log_cubic(*cutoff),
        }
    }
}

/// A probability mass function on degrees `0..=max_degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreePmf {
    masses: Vec<f64>,
    /// Inclusive prefix sums of `masses`.
    prefix: Vec<f64>,
    /// Set for laws whose untruncated tail decays like `k^-tau`; functionals
    /// that diverge under that tail are reported as infinite.
    tail_exponent: Option<f64>,
    label: String,
}

impl DegreePmf {
    fn from_masses(mut masses: Vec<f64>, tail_exponent: Option<f64>, label: String) -> Result<Self, DistributionError> {
        while masses.len() > 1 && *masses.last().unwrap() == 0.0 {
            masses.pop();
        }
        let mut acc = 0.0;
        let prefix: Vec<f64> = masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        if acc <= 0.0 {
            return Err(DistributionError::Empty);
        }
        Ok(Self { masses, prefix, tail_exponent, label })
    }

    /// Point mass at `k`.
    pub fn point(k: u64) -> Self {
        let mut masses = vec![0.0; k as usize + 1];
        masses[k as usize] = 1.0;
        Self::from_masses(masses, None, format!("point({k})")).expect("point mass is valid")
    }

    /// Explicit law; masses must sum to one within `1e-12`.
    pub fn explicit(pairs: &[(u64, f64)]) -> Result<Self, DistributionError> {
        let masses = Self::collect_pairs(pairs)?;
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > TRUNCATION_TAIL {
            return Err(DistributionError::NotNormalized(total));
        }
        Self::from_masses(masses, None, "explicit".into())
    }

    /// Explicit law from nonnegative weights, normalized to total mass one.
    pub fn from_weights(pairs: &[(u64, f64)]) -> Result<Self, DistributionError> {
        let mut masses = Self::collect_pairs(pairs)?;
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(DistributionError::Empty);
        }
        masses.iter_mut().for_each(|m| *m /= total);
        Self::from_masses(masses, None, "explicit".into())
    }

    fn collect_pairs(pairs: &[(u64, f64)]) -> Result<Vec<f64>, DistributionError> {
        let max = pairs.iter().map(|p| p.0).max().ok_or(DistributionError::Empty)?;
        let mut masses = vec![0.0; max as usize + 1];
        let mut seen = vec![false; max as usize + 1];
        for &(k, m) in pairs {
            if !(m >= 0.0) {
                return Err(DistributionError::NegativeMass { degree: k, mass: m });
            }
            if std::mem::replace(&mut seen[k as usize], true) {
                return Err(DistributionError::DuplicateDegree(k));
            }
            masses[k as usize] = m;
        }
        Ok(masses)
    }

    /// Poisson law, truncated where the omitted tail drops below `1e-12`.
    pub fn poisson(mean: f64) -> Result<Self, DistributionError> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(DistributionError::NonPositive { name: "mean", value: mean });
        }
        let mut masses = Vec::new();
        let mut log_p = -mean;
        let mut k = 0u64;
        loop {
            masses.push(log_p.exp());
            // For k + 1 > mean the tail after k is bounded by a geometric series
            // with ratio mean / (k + 2).
            let next = log_p + mean.ln() - ((k + 1) as f64).ln();
            if (k + 1) as f64 > mean {
                let ratio = mean / (k + 2) as f64;
                if next.exp() / (1.0 - ratio) < TRUNCATION_TAIL {
                    break;
                }
            }
            log_p = next;
            k += 1;
        }
        Self::from_masses(masses, None, format!("poisson({mean})"))
    }

    /// Power law `mu(k) ∝ k^-exponent` on `1..=cutoff`, normalized over that
    /// support. Without a cutoff the support is chosen so the omitted tail is
    /// below `1e-12`, which is refused when it would exceed
    /// [`MAX_MATERIALIZED_SUPPORT`].
    pub fn powerlaw(exponent: f64, cutoff: Option<u64>) -> Result<Self, DistributionError> {
        if !(exponent > 1.0) {
            return Err(DistributionError::BadExponent(exponent));
        }
        let (kmax, tail) = match cutoff {
            Some(c) => {
                if c == 0 {
                    return Err(DistributionError::Empty);
                }
                (c, None)
            }
            None => {
                // sum_{k > K} k^-tau <= K^(1-tau) / (tau - 1), and the normalizer is >= 1.
                let required = (TRUNCATION_TAIL * (exponent - 1.0)).powf(-1.0 / (exponent - 1.0)).ceil();
                if required > MAX_MATERIALIZED_SUPPORT as f64 {
                    return Err(DistributionError::TailTooHeavy { exponent, required });
                }
                (required as u64, Some(exponent))
            }
        };
        let mut masses = vec![0.0; kmax as usize + 1];
        let mut z = 0.0;
        // Sum small terms first.
        for k in (1..=kmax).rev() {
            let w = (k as f64).powf(-exponent);
            masses[k as usize] = w;
            z += w;
        }
        masses.iter_mut().for_each(|m| *m /= z);
        let label = match cutoff {
            Some(c) => format!("powerlaw({exponent}, {c})"),
            None => format!("powerlaw({exponent})"),
        };
        Self::from_masses(masses, tail, label)
    }

    /// `mu(k) ∝ ln k / k^3` on `2..=cutoff`.
    pub fn log_cubic(cutoff: u64) -> Result<Self, DistributionError> {
        if cutoff < 2 {
            return Err(DistributionError::Empty);
        }
        let pairs: Vec<(u64, f64)> = (2..=cutoff)
            .rev()
            .map(|k| {
                let x = k as f64;
                (k, x.ln() / (x * x * x))
            })
            .collect();
        let mut pmf = Self::from_weights(&pairs)?;
        pmf.label = format!("log-cubic({cutoff})");
        Ok(pmf)
    }

    pub fn mass(&self, k: u64) -> f64 {
        self.masses.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Largest degree with positive mass.
    pub fn max_degree(&self) -> u64 {
        (self.masses.len() - 1) as u64
    }

    pub fn total_mass(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn tail_exponent(&self) -> Option<f64> {
        self.tail_exponent
    }

    /// Mass of `lo..=hi`, clipped to the support.
    pub fn window_mass(&self, lo: u64, hi: u64) -> f64 {
        if lo > hi || lo > self.max_degree() {
            return 0.0;
        }
        let hi = hi.min(self.max_degree()) as usize;
        let below = if lo == 0 { 0.0 } else { self.prefix[lo as usize - 1] };
        (self.prefix[hi] - below).clamp(0.0, 1.0)
    }

    pub fn mean(&self) -> f64 {
        match moment_functional(self, Moment::Mean) {
            MomentValue::Finite(v) => v,
            MomentValue::Infinite => f64::INFINITY,
        }
    }
}

/// `p / (p + 1)`: the chance an `Exp(p)` clock rings before an `Exp(1)` clock.
pub fn hat(p: f64) -> Result<f64, DistributionError> {
    if !(p > 0.0) {
        return Err(DistributionError::NonPositive { name: "p", value: p });
    }
    Ok(p / (p + 1.0))
}

/// The unit right shift: mass `mu(k-1)` at `k` and nothing at 0.
pub fn plus_shift(mu: &DegreePmf) -> DegreePmf {
    let mut masses = Vec::with_capacity(mu.masses.len() + 1);
    masses.push(0.0);
    masses.extend_from_slice(&mu.masses);
    DegreePmf::from_masses(masses, mu.tail_exponent, format!("shift({})", mu.label)).expect("shift keeps mass")
}

/// Expectations computed by [`moment_functional`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Mean,
    /// `E[D^kappa]`.
    Kappa(f64),
    /// `E[D(D - 2)]`.
    DMinus2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentValue {
    Finite(f64),
    Infinite,
}

impl MomentValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            MomentValue::Finite(v) => Some(v),
            MomentValue::Infinite => None,
        }
    }
}

pub fn moment_functional(mu: &DegreePmf, which: Moment) -> MomentValue {
    let order = match which {
        Moment::Mean => 1.0,
        Moment::Kappa(kappa) => kappa,
        Moment::DMinus2 => 2.0,
    };
    if let Some(tau) = mu.tail_exponent {
        // sum k^order k^-tau diverges iff order >= tau - 1
        if order >= tau - 1.0 {
            return MomentValue::Infinite;
        }
    }
    let weight = |k: f64| match which {
        Moment::Mean => k,
        Moment::Kappa(kappa) => k.powf(kappa),
        Moment::DMinus2 => k * (k - 2.0),
    };
    // Largest degrees first: small terms accumulate before large ones.
    let value = mu.masses.iter().enumerate().rev().map(|(k, p)| p * weight(k as f64)).sum();
    MomentValue::Finite(value)
}

/// Upper end of the degree window `[M, f(M)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailFunction {
    /// `f(M) = factor * M`, `factor >= 1`.
    Multiple { factor: f64 },
    /// `f(M) = ∞`: the whole upper tail.
    Unbounded,
}

impl Default for TailFunction {
    fn default() -> Self {
        TailFunction::Multiple { factor: 2.0 }
    }
}

impl TailFunction {
    pub fn multiple(factor: f64) -> Result<Self, DistributionError> {
        if !(factor >= 1.0) {
            return Err(DistributionError::BadTailFunction(factor));
        }
        Ok(TailFunction::Multiple { factor })
    }

    pub fn eval(&self, m: u64) -> f64 {
        match *self {
            TailFunction::Multiple { factor } => factor * m as f64,
            TailFunction::Unbounded => f64::INFINITY,
        }
    }

    /// `floor(f(M))` as an inclusive degree bound.
    pub fn upper(&self, m: u64) -> u64 {
        let v = self.eval(m).floor();
        if v >= u64::MAX as f64 {
            u64::MAX
        } else {
            v as u64
        }
    }
}

/// `mu([M, f(M)])`.
pub fn tail_mass(mu: &DegreePmf, m: u64, f: &TailFunction) -> f64 {
    mu.window_mass(m, f.upper(m))
}

/// Smallest `M <= m_max` with `M^2 mu([M, f(M)]) >= threshold`.
pub fn heavy_tail_witness(mu: &DegreePmf, f: &TailFunction, threshold: f64, m_max: u64) -> Option<u64> {
    (1..=m_max).find(|&m| {
        let mf = m as f64;
        mf * mf * tail_mass(mu, m, f) >= threshold
    })
}

/// Smallest `n <= n_max` with `mu(n) exp(n^(alpha - delta)) >= threshold`: a
/// finite scan standing in for `limsup mu(n) exp(n^(alpha - delta)) = ∞`.
pub fn subexponential_tail_witness(mu: &DegreePmf, alpha: f64, delta: f64, threshold: f64, n_max: u64) -> Option<u64> {
    let n_max = n_max.min(mu.max_degree());
    (1..=n_max).find(|&n| {
        let p = mu.mass(n);
        p > 0.0 && p.ln() + (n as f64).powf(alpha - delta) >= threshold.ln()
    })
}

/// `(e^{-ax} - e^{-bx}) / (b - a)`, continuous across `a = b` where it equals `x e^{-ax}`.
fn exp_difference_quotient(a: f64, b: f64, x: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let h = hi - lo;
    if h == 0.0 {
        return x * (-lo * x).exp();
    }
    (-lo * x).exp() * (-(-h * x).exp_m1()) / h
}

/// `P(X + Y < x < X + Z)` for independent `X ~ Exp(alpha)`, `Y ~ Exp(lambda)`,
/// `Z ~ Exp(1)`:
///
/// `alpha (e^{-x} - e^{-alpha x})/(alpha - 1) - alpha (e^{-(lambda+1)x} - e^{-alpha x})/(alpha - lambda - 1)`,
///
/// evaluated through a difference quotient that is exact at the removable
/// singularities `alpha = 1` and `alpha = lambda + 1`.
pub fn window_prob_closed_form(alpha: f64, lambda: f64, x: f64) -> Result<f64, DistributionError> {
    for (name, value) in [("alpha", alpha), ("lambda", lambda), ("x", x)] {
        if !(value > 0.0) {
            return Err(DistributionError::NonPositive { name, value });
        }
    }
    let p = alpha * (exp_difference_quotient(1.0, alpha, x) - exp_difference_quotient(lambda + 1.0, alpha, x));
    Ok(p.clamp(0.0, 1.0))
}

/// Rates of a hypoexponential law (sum of independent exponentials).
#[derive(Debug, Clone, PartialEq)]
pub struct HypoExpParams {
    rates: Vec<f64>,
}

impl HypoExpParams {
    pub fn new(rates: Vec<f64>) -> Result<Self, DistributionError> {
        if rates.is_empty() {
            return Err(DistributionError::NoRates);
        }
        if let Some(&bad) = rates.iter().find(|r| !(**r > 0.0)) {
            return Err(DistributionError::NonPositive { name: "rate", value: bad });
        }
        Ok(Self { rates })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn mean(&self) -> f64 {
        self.rates.iter().map(|r| 1.0 / r).sum()
    }
}

pub fn sample_hypoexponential(params: &HypoExpParams, rng: &mut RandomStream) -> f64 {
    params
        .rates
        .iter()
        .map(|r| {
            let e: f64 = Exp1.sample(rng);
            e / r
        })
        .sum()
}

/// Density of `Hypo(lambda + 1, alpha + 1)` at `omega`.
pub fn two_phase_hypo_density(lambda: f64, alpha: f64, omega: f64) -> f64 {
    if omega < 0.0 {
        return 0.0;
    }
    let a = lambda + 1.0;
    let b = alpha + 1.0;
    a * b * exp_difference_quotient(a, b, omega)
}

/// One draw from `mu`.
pub fn sample_degree(mu: &DegreePmf, rng: &mut RandomStream) -> u64 {
    let u = rng.random::<f64>() * mu.total_mass();
    let k = mu.prefix.partition_point(|&c| c <= u);
    if k < mu.masses.len() {
        k as u64
    } else {
        // u landed in rounding slack above the last prefix sum
        mu.max_degree()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    #[test]
    fn hat_examples() {
        assert_eq!(hat(1.0).unwrap(), 0.5);
        assert_eq!(hat(3.0).unwrap(), 0.75);
        assert!((hat(10.0).unwrap() - 10.0 / 11.0).abs() < 1e-15);
        assert!(hat(0.0).is_err());
        assert!(hat(-2.0).is_err());
    }

    proptest! {
        #[test]
        fn hat_is_monotone(p in 1e-6f64..1e6, q in 1e-6f64..1e6) {
            prop_assume!(p < q);
            prop_assert!(hat(p).unwrap() < hat(q).unwrap());
            prop_assert!(hat(p).unwrap() > 0.0 && hat(q).unwrap() < 1.0);
        }

        #[test]
        fn plus_shift_adds_one_to_mean(weights in prop::collection::vec(0.0f64..1.0, 1..30)) {
            prop_assume!(weights.iter().sum::<f64>() > 1e-3);
            let pairs: Vec<(u64, f64)> = weights.iter().enumerate().map(|(k, w)| (k as u64, *w)).collect();
            let mu = DegreePmf::from_weights(&pairs).unwrap();
            let shifted = plus_shift(&mu);
            prop_assert!((shifted.total_mass() - mu.total_mass()).abs() < 1e-12);
            prop_assert!((shifted.mean() - mu.mean() - 1.0).abs() < 1e-9);
            prop_assert_eq!(shifted.mass(0), 0.0);
        }

        #[test]
        fn tail_mass_in_unit_interval(m in 1u64..200) {
            let mu = DegreePmf::powerlaw(2.5, Some(150)).unwrap();
            let full = tail_mass(&mu, m, &TailFunction::Unbounded);
            let next = tail_mass(&mu, m + 1, &TailFunction::Unbounded);
            prop_assert!((0.0..=1.0).contains(&full));
            prop_assert!(next <= full);
            let w = tail_mass(&mu, m, &TailFunction::default());
            prop_assert!(w <= full + 1e-15);
        }
    }

    #[test]
    fn explicit_validation() {
        assert!(DegreePmf::explicit(&[(1, 0.5), (3, 0.5)]).is_ok());
        assert_eq!(DegreePmf::explicit(&[(1, 0.5), (1, 0.5)]), Err(DistributionError::DuplicateDegree(1)));
        assert!(matches!(DegreePmf::explicit(&[(1, 0.5)]), Err(DistributionError::NotNormalized(_))));
        assert!(matches!(DegreePmf::explicit(&[(1, -0.5), (2, 1.5)]), Err(DistributionError::NegativeMass { .. })));
    }

    #[test]
    fn poisson_truncation_tail() {
        for d in [0.5, 3.0, 8.0, 30.0] {
            let mu = DegreePmf::poisson(d).unwrap();
            assert!((mu.total_mass() - 1.0).abs() < 1e-12, "d={d} total={}", mu.total_mass());
        }
    }

    #[test]
    fn plus_shift_examples() {
        let s = plus_shift(&DegreePmf::point(2));
        assert_eq!(s.mass(3), 1.0);
        assert_eq!(s.max_degree(), 3);
        let s = plus_shift(&DegreePmf::explicit(&[(0, 0.5), (1, 0.5)]).unwrap());
        assert_eq!((s.mass(0), s.mass(1), s.mass(2)), (0.0, 0.5, 0.5));
        let s = plus_shift(&DegreePmf::poisson(3.0).unwrap());
        assert!((s.mean() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn moment_examples() {
        assert_eq!(moment_functional(&DegreePmf::point(2), Moment::DMinus2), MomentValue::Finite(0.0));
        for d in [1.0, 3.0, 8.0] {
            let v = moment_functional(&DegreePmf::poisson(d).unwrap(), Moment::DMinus2).finite().unwrap();
            assert!((v - (d * d - d)).abs() < 1e-9, "d={d}: {v}");
        }
        // Direct normalized summation for the truncated power law.
        let (mut num, mut den) = (0.0, 0.0);
        for k in (1..=10_000u64).rev() {
            let w = (k as f64).powf(-2.5);
            num += k as f64 * w;
            den += w;
        }
        let mean = moment_functional(&DegreePmf::powerlaw(2.5, Some(10_000)).unwrap(), Moment::Mean).finite().unwrap();
        assert!((mean - num / den).abs() < 1e-12);
        assert!((mean - 1.93).abs() < 0.01);
    }

    #[test]
    fn divergent_moments_flagged() {
        let mu = DegreePmf::powerlaw(3.2, None).unwrap();
        assert_eq!(moment_functional(&mu, Moment::Kappa(2.5)), MomentValue::Infinite);
        assert!(moment_functional(&mu, Moment::Kappa(1.5)).finite().is_some());
        assert!(moment_functional(&mu, Moment::DMinus2).finite().is_some());
        let mu = DegreePmf::powerlaw(3.8, None).unwrap();
        assert!(moment_functional(&plus_shift(&mu), Moment::Kappa(2.9)).finite().is_none());
        assert!(matches!(DegreePmf::powerlaw(2.5, None), Err(DistributionError::TailTooHeavy { .. })));
    }

    #[test]
    fn tail_mass_examples() {
        let f = TailFunction::default();
        assert_eq!(tail_mass(&DegreePmf::point(2), 3, &f), 0.0);
        assert_eq!(tail_mass(&DegreePmf::point(2), 2, &f), 1.0);
        let mu = DegreePmf::powerlaw(2.5, Some(10_000)).unwrap();
        let z: f64 = (1..=10_000u64).rev().map(|k| (k as f64).powf(-2.5)).sum();
        let oracle: f64 = (10..=20u64).map(|k| (k as f64).powf(-2.5)).sum::<f64>() / z;
        assert!((tail_mass(&mu, 10, &f) - oracle).abs() < 1e-14);
    }

    /// Independent scan: recomputes each window sum from scratch.
    fn scan_oracle(weight: impl Fn(u64) -> f64, support: std::ops::RangeInclusive<u64>, threshold: f64, m_max: u64) -> Option<u64> {
        let hi = *support.end();
        let z: f64 = support.clone().rev().map(&weight).sum();
        (1..=m_max).find(|&m| {
            let w: f64 = (m.max(*support.start())..=(2 * m).min(hi)).map(&weight).sum();
            (m as f64).powi(2) * w / z >= threshold
        })
    }

    #[test]
    fn heavy_tail_witness_examples() {
        let f = TailFunction::default();
        assert_eq!(heavy_tail_witness(&DegreePmf::point(2), &f, 10.0, 1000), None);

        let mu = DegreePmf::powerlaw(2.5, Some(100_000)).unwrap();
        let pl = |k: u64| (k as f64).powf(-2.5);
        // sup_M M^2 mu([M, 2M]) is about 72 under this cutoff, so threshold 100 is out of reach.
        assert_eq!(scan_oracle(pl, 1..=100_000, 100.0, 100_000), None);
        assert_eq!(heavy_tail_witness(&mu, &f, 100.0, 100_000), None);
        let witness = heavy_tail_witness(&mu, &f, 10.0, 100_000);
        assert_eq!(witness, scan_oracle(pl, 1..=100_000, 10.0, 100_000));
        assert!(witness.is_some());

        let mu = DegreePmf::log_cubic(1_000_000).unwrap();
        let lc = |k: u64| {
            let x = k as f64;
            x.ln() / (x * x * x)
        };
        // M^2 mu([M, 2M]) grows like 1.9 ln M here; 50 needs M far beyond 10^6.
        assert_eq!(heavy_tail_witness(&mu, &f, 50.0, 1_000_000), None);
        let witness = heavy_tail_witness(&mu, &f, 5.0, 1_000_000);
        assert_eq!(witness, scan_oracle(lc, 2..=1_000_000, 5.0, 1_000_000));
        assert!(witness.is_some());
    }

    #[test]
    fn subexponential_witness_scan() {
        let mu = DegreePmf::poisson(8.0).unwrap();
        // Poisson tails decay like exp(-n ln n); exp(n^(alpha - delta)) beats them only for alpha - delta > 1.
        assert!(subexponential_tail_witness(&mu, 1.5, 0.1, 10.0, 200).is_some());
        assert_eq!(subexponential_tail_witness(&mu, 0.5, 0.1, 10.0, 200), None);
    }

    /// Integrand of `P(X + Y < x < X + Z)` after conditioning on `X = x - u`.
    fn window_prob_quadrature(alpha: f64, lambda: f64, x: f64) -> f64 {
        let n = 20_000;
        let h = x / n as f64;
        let g = |u: f64| alpha * (-alpha * (x - u)).exp() * ((-u).exp() - (-(lambda + 1.0) * u).exp());
        let mut s = g(0.0) + g(x);
        for i in 1..n {
            s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn window_prob_limits_and_domain() {
        assert!(window_prob_closed_form(2.0, 3.0, 1e-9).unwrap() < 1e-12);
        assert!(window_prob_closed_form(1.0, 1.0, 1e3).unwrap() < 1e-10);
        assert!(window_prob_closed_form(0.0, 1.0, 1.0).is_err());
        assert!(window_prob_closed_form(1.0, -1.0, 1.0).is_err());
        assert!(window_prob_closed_form(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn window_prob_matches_quadrature() {
        let grid = [0.5, 1.0, 2.0, 5.0, 10.0];
        for &a in &grid {
            for &l in &grid {
                for &x in &grid {
                    let cf = window_prob_closed_form(a, l, x).unwrap();
                    let q = window_prob_quadrature(a, l, x);
                    assert!((cf - q).abs() < 1e-9, "a={a} l={l} x={x}: {cf} vs {q}");
                }
            }
        }
    }

    #[test]
    fn window_prob_monte_carlo_single_cell() {
        let (alpha, lambda, x) = (2.0, 3.0, 1.0);
        let mut rng = stream(11);
        let trials = 10_000_000u64;
        let mut hits = 0u64;
        for _ in 0..trials {
            let a: f64 = Exp1.sample(&mut rng);
            let y: f64 = Exp1.sample(&mut rng);
            let z: f64 = Exp1.sample(&mut rng);
            let xa = a / alpha;
            if xa + y / lambda < x && x < xa + z {
                hits += 1;
            }
        }
        let p = window_prob_closed_form(alpha, lambda, x).unwrap();
        let emp = hits as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((emp - p).abs() < 3.0 * se, "emp={emp} cf={p} se={se}");
    }

    #[test]
    fn window_prob_continuous_at_singular_lines() {
        for &l in &[0.5, 1.0, 3.0] {
            for &x in &[0.3, 1.0, 4.0] {
                for a0 in [1.0, l + 1.0] {
                    let lo = window_prob_closed_form(a0 - 1e-6, l, x).unwrap();
                    let mid = window_prob_closed_form(a0, l, x).unwrap();
                    let hi = window_prob_closed_form(a0 + 1e-6, l, x).unwrap();
                    assert!((lo - hi).abs() < 1e-4 && (mid - lo).abs() < 1e-4);
                    assert!((mid - window_prob_quadrature(a0, l, x)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn hypoexponential_means() {
        let mut rng = stream(3);
        let draws = 1_000_000;
        let check = |rates: Vec<f64>, rng: &mut RandomStream| {
            let p = HypoExpParams::new(rates).unwrap();
            let m: f64 = (0..draws).map(|_| sample_hypoexponential(&p, rng)).sum::<f64>() / draws as f64;
            (m, p.mean())
        };
        let (m, _) = check(vec![1.0], &mut rng);
        assert!((m - 1.0).abs() < 0.01);
        let (m, target) = check(vec![3.0, 2.0], &mut rng);
        assert!((m - target).abs() < 0.01 * target, "{m} vs {target}");
        let (m, _) = check(vec![1.0; 10], &mut rng);
        assert!((m - 10.0).abs() < 0.05);
        assert!(HypoExpParams::new(vec![]).is_err());
        assert!(HypoExpParams::new(vec![1.0, 0.0]).is_err());
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn two_phase_density_normalizes() {
        assert_eq!(two_phase_hypo_density(3.0, 2.0, -1.0), 0.0);
        assert_eq!(two_phase_hypo_density(3.0, 2.0, 0.0), 0.0);
        let total = simpson(|w| two_phase_hypo_density(3.0, 2.0, w), 0.0, 50.0, 200_000);
        assert!((total - 1.0).abs() < 1e-6);
        let mut rng = stream(5);
        for _ in 0..10 {
            let l = rand::Rng::random_range(&mut rng, 0.1..10.0);
            let a = rand::Rng::random_range(&mut rng, 0.1..10.0);
            let total = simpson(|w| two_phase_hypo_density(l, a, w), 0.0, 60.0, 200_000);
            assert!((total - 1.0).abs() < 1e-6, "l={l} a={a}: {total}");
        }
        // equal rates: Gamma(2, lambda + 1)
        let total = simpson(|w| two_phase_hypo_density(1.0, 1.0, w), 0.0, 60.0, 200_000);
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sample_degree_laws() {
        let mut rng = stream(17);
        let delta = DegreePmf::point(2);
        assert!((0..1000).all(|_| sample_degree(&delta, &mut rng) == 2));

        let mu = DegreePmf::explicit(&[(1, 0.5), (3, 0.5)]).unwrap();
        let n = 1_000_000;
        let ones = (0..n).filter(|_| sample_degree(&mu, &mut rng) == 1).count();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.002);

        let mu = DegreePmf::poisson(3.0).unwrap();
        let mean = (0..n).map(|_| sample_degree(&mu, &mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - 3.0).abs() < 0.01);
    }

    #[test]
    fn spec_roundtrip_through_toml() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct Wrap {
            distribution: DistributionSpec,
        }
        let text = "[distribution]\nkind = \"powerlaw\"\nexponent = 2.5\ncutoff = 10000\n";
        let w: Wrap = toml::from_str(text).unwrap();
        assert_eq!(w.distribution, DistributionSpec::Powerlaw { exponent: 2.5, cutoff: Some(10_000) });
        let text = "[distribution]\nkind = \"explicit\"\nmasses = [[1, 0.5], [3, 0.5]]\n";
        let w: Wrap = toml::from_str(text).unwrap();
        let mu = w.distribution.build().unwrap();
        assert_eq!(mu.mass(3), 0.5);
    }
}
