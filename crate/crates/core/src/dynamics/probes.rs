use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::{Censoring, Compartment, Engine, EventKind, InitialState, Network, RoundLog, SirsParams, StopRule, SurvivalRecord};
use crate::distributions::{hat, plus_shift, DegreePmf};
use crate::graphs::{LazyGwTree, MultiGraph};
use crate::par;
use crate::rng::{combine, stream};

/// `17/24 - ln 2`.
pub const PATH_GAMMA: f64 = 17.0 / 24.0 - std::f64::consts::LN_2;

/// A Bernoulli frequency with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p: f64,
    pub se: f64,
    pub successes: u64,
    pub trials: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self { p: f64::NAN, se: f64::NAN, successes, trials };
        }
        let p = successes as f64 / trials as f64;
        Self { p, se: (p * (1.0 - p) / trials as f64).sqrt(), successes, trials }
    }

    fn from_flags(flags: &[bool]) -> Self {
        Self::from_counts(flags.iter().filter(|&&b| b).count() as u64, flags.len() as u64)
    }
}

const CHUNK: usize = 256;

/// `(-ln(alpha_hat lambda_hat))^{-1/2}`, the time scale of the edge lemma.
pub fn edge_persistence_scale(lambda: f64, alpha: f64) -> f64 {
    let q = hat(lambda).unwrap() * hat(alpha).unwrap();
    (-q.ln()).powf(-0.5)
}

/// Isolated edge `u - v`, `u` infected and `v` susceptible at time 0: the
/// fraction of trials in which `{u, v}` still holds an infected vertex at
/// every moment of `[0, duration]`.
pub fn probe_edge_persistence(params: SirsParams, duration: f64, trials: usize, seed: u64) -> Estimate {
    let g = MultiGraph::path(2);
    let init = InitialState::Explicit(vec![(0, Compartment::I)]);
    let stop = StopRule::horizon(duration);
    let flags = par::map_chunked(trials, CHUNK, || Engine::new(&g, params), |engine, t| {
        engine.reset(&init, combine(seed, t as u64)).unwrap();
        engine.run_until(&stop).censored == Some(Censoring::Horizon)
    });
    Estimate::from_flags(&flags)
}

/// `(alpha_hat lambda_hat)^r (1 - e^{-gamma r})`.
pub fn path_infection_bound(r: usize, lambda: f64, alpha: f64) -> f64 {
    let q = hat(lambda).unwrap() * hat(alpha).unwrap();
    q.powi(r as i32) * (1.0 - (-PATH_GAMMA * r as f64).exp())
}

/// Path `v_0 .. v_r` with only `v_0` infected: the fraction of trials in which
/// `v_r` is infected at some time `<= 3r`.
pub fn probe_path_infection(r: usize, params: SirsParams, trials: usize, seed: u64) -> Estimate {
    if r == 0 {
        return Estimate::from_counts(trials as u64, trials as u64);
    }
    let g = MultiGraph::path(r + 1);
    let init = InitialState::RootInfected(0);
    let limit = 3.0 * r as f64;
    let flags = par::map_chunked(trials, CHUNK, || Engine::new(&g, params), |engine, t| {
        engine.reset(&init, combine(seed, t as u64)).unwrap();
        while engine.next_time().is_some_and(|x| x <= limit) {
            let e = engine.step().unwrap();
            if e.vertex == r && matches!(e.kind, EventKind::Infect { .. }) {
                return true;
            }
        }
        false
    });
    Estimate::from_flags(&flags)
}

/// Window probability measured two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowProbe {
    pub closed_form: f64,
    /// Recovery clock started at deimmunization (the coupling behind the
    /// closed form); estimates the closed form itself.
    pub coupled: Estimate,
    /// The SIRS chain: `v` starts recovered next to a permanently infected
    /// source and is counted when it is in its first infected phase at `x`.
    /// Bounded below by the closed form.
    pub physical: Estimate,
}

pub fn probe_window_prob(lambda: f64, alpha: f64, x: f64, trials: usize, seed: u64) -> WindowProbe {
    let params = SirsParams::new(lambda, alpha).unwrap();
    let closed_form = crate::distributions::window_prob_closed_form(alpha, lambda, x).unwrap();
    let g = MultiGraph::path(2);
    let init = InitialState::Explicit(vec![(0, Compartment::I), (1, Compartment::R)]);
    let outcomes = par::map_chunked(
        trials,
        CHUNK,
        || {
            let mut e = Engine::new(&g, params);
            e.pin(0);
            e
        },
        |engine, t| {
            let s = combine(seed, t as u64);
            engine.reset(&init, s).unwrap();
            let mut physical = false;
            loop {
                match engine.next_time() {
                    Some(tn) if tn <= x => {
                        let e = engine.step().unwrap();
                        if e.vertex == 1 && e.kind == EventKind::Recover {
                            break;
                        }
                    }
                    _ => {
                        physical = engine.compartment(1) == Compartment::I;
                        break;
                    }
                }
            }
            let mut rng = stream(combine(s, 0x5749_4E44));
            let d: f64 = rng.sample::<f64, _>(Exp1) / alpha;
            let h: f64 = rng.sample::<f64, _>(Exp1) / lambda;
            let q: f64 = rng.sample(Exp1);
            (physical, d + h < x && x < d + q)
        },
    );
    let physical: Vec<bool> = outcomes.iter().map(|o| o.0).collect();
    let coupled: Vec<bool> = outcomes.iter().map(|o| o.1).collect();
    WindowProbe { closed_form, coupled: Estimate::from_flags(&coupled), physical: Estimate::from_flags(&physical) }
}

/// Runs one trajectory with root-round bookkeeping.
pub fn track_rounds<N: Network>(
    engine: &mut Engine<N>,
    root: usize,
    epsilon: f64,
    init: &InitialState,
    stop: &StopRule,
    seed: u64,
) -> Result<(RoundLog, SurvivalRecord), super::DynamicsError> {
    engine.track_root(root, epsilon);
    engine.reset(init, seed)?;
    if engine.compartment(root) != Compartment::I {
        return Err(super::DynamicsError::RootNotInfected);
    }
    let record = engine.run_until(stop);
    Ok((engine.round_log().cloned().unwrap_or_else(|| RoundLog::new(epsilon)), record))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarRow {
    pub n: usize,
    /// `lambda_hat^2 n`.
    pub scale: f64,
    pub trials: u64,
    /// Trials in which the center had at least `rounds` rounds.
    pub reached: u64,
    /// Trials stopped by the event budget before deciding.
    pub undecided: u64,
    pub failure: f64,
    pub failure_se: f64,
}

/// Star with `n` leaves, all infected at time 0, center tracked as the root:
/// for each `n`, how often the center fails to reach `rounds` rounds before
/// extinction.
pub fn star_survival_scaling(
    n_list: &[usize],
    params: SirsParams,
    rounds: usize,
    trials: usize,
    seed: u64,
    event_budget: u64,
) -> Vec<StarRow> {
    let lh = hat(params.lambda).unwrap();
    n_list
        .iter()
        .enumerate()
        .map(|(cell, &n)| {
            let g = MultiGraph::star(n);
            let stop = StopRule { horizon: None, reinfections: Some(rounds.saturating_sub(1)), event_budget: Some(event_budget) };
            let outcomes = par::map_chunked(
                trials,
                CHUNK,
                || {
                    let mut e = Engine::new(&g, params);
                    e.track_root(0, 0.0);
                    e
                },
                |engine, t| {
                    engine.reset(&InitialState::AllInfected, combine(combine(seed, cell as u64), t as u64)).unwrap();
                    let rec = engine.run_until(&stop);
                    let reached = engine.round_log().unwrap().rounds.len() >= rounds;
                    (reached, rec.censored == Some(Censoring::EventBudget))
                },
            );
            let reached = outcomes.iter().filter(|o| o.0).count() as u64;
            let undecided = outcomes.iter().filter(|o| !o.0 && o.1).count() as u64;
            let decided = trials as u64 - undecided;
            let fail = Estimate::from_counts(decided - reached, decided);
            StarRow {
                n,
                scale: lh * lh * n as f64,
                trials: trials as u64,
                reached,
                undecided,
                failure: fail.p,
                failure_se: fail.se,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiEstimate {
    pub t: f64,
    pub estimate: Estimate,
    /// Trials stopped by a budget before the window could be decided.
    pub undecided: u64,
}

/// Root-only infected start on a tree whose root has exactly `root_degree`
/// children and whose other vertices have offspring law `interior`: the
/// fraction of trials with the root infected at some moment of
/// `[t - 12 T, t]`. Equal to 1 when `t <= 12 T`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_phi(
    interior: &DegreePmf,
    root_degree: u32,
    params: SirsParams,
    t: f64,
    big_t: f64,
    trials: usize,
    seed: u64,
    node_budget: usize,
    event_budget: u64,
) -> PhiEstimate {
    if t <= 12.0 * big_t {
        return PhiEstimate { t, estimate: Estimate::from_counts(trials as u64, trials as u64), undecided: 0 };
    }
    let root_law = plus_shift(interior);
    let lo = t - 12.0 * big_t;
    let stop = StopRule { horizon: Some(t), reinfections: None, event_budget: Some(event_budget) };
    let outcomes = par::map_chunked(
        trials,
        16,
        || {
            let tree = LazyGwTree::new(root_law.clone(), interior.clone(), 0)
                .with_root_children(root_degree)
                .with_budget(node_budget);
            let mut e = Engine::new(tree, params);
            e.track_root(0, 0.0);
            e
        },
        |engine, i| {
            let s = combine(seed, i as u64);
            engine.network_mut().reset(s);
            engine.reset(&InitialState::RootInfected(0), s).unwrap();
            let rec = engine.run_until(&stop);
            let log = engine.round_log().unwrap();
            let end = rec.end_time;
            if log.infected_during(lo, end.min(t)) && end >= lo {
                Some(true)
            } else if rec.censored.is_none() || rec.censored == Some(Censoring::Horizon) {
                Some(false)
            } else {
                None
            }
        },
    );
    let decided: Vec<bool> = outcomes.iter().filter_map(|&o| o).collect();
    PhiEstimate { t, estimate: Estimate::from_flags(&decided), undecided: (trials - decided.len()) as u64 }
}

/// `|I_t ∩ W0|` at each checkpoint (nondecreasing times) of the engine's
/// current run.
pub fn track_marked_set<N: Network>(engine: &mut Engine<N>, checkpoints: &[f64]) -> Vec<usize> {
    checkpoints
        .iter()
        .map(|&c| {
            engine.advance_to(c);
            engine.marked_infected()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::window_prob_closed_form;

    #[test]
    fn edge_persistence() {
        let p = SirsParams::new(1.0, 1.0).unwrap();
        assert_eq!(probe_edge_persistence(p, 0.0, 100, 1).p, 1.0);
        let slow = SirsParams::new(0.01, 0.01).unwrap();
        let e = probe_edge_persistence(slow, 1.0, 20_000, 2);
        assert!(e.p >= (-1.0f64).exp() - 3.0 * e.se);
        let mut last = 0.0;
        for rate in [1e2, 1e3, 1e4] {
            let k = edge_persistence_scale(rate, rate);
            let est = probe_edge_persistence(SirsParams::new(rate, rate).unwrap(), k / 10.0, 10_000, 3);
            assert!(est.p >= last - 3.0 * est.se, "{rate}: {} after {last}", est.p);
            last = est.p;
        }
        assert!(last >= 0.9, "{last}");
    }

    #[test]
    fn path_infection() {
        let p = SirsParams::new(10.0, 10.0).unwrap();
        assert_eq!(probe_path_infection(0, p, 10, 0).p, 1.0);
        assert!((PATH_GAMMA - 0.015186).abs() < 1e-5);
        for r in [1, 5] {
            let e = probe_path_infection(r, p, 20_000, r as u64);
            assert!(e.p >= path_infection_bound(r, 10.0, 10.0) - 3.0 * e.se);
        }
    }

    #[test]
    fn window_probe_against_closed_form() {
        for (alpha, lambda, x) in [(2.0, 3.0, 1.0), (5.0, 0.5, 2.0), (1.0, 1.0, 0.7)] {
            let w = probe_window_prob(lambda, alpha, x, 400_000, 11);
            assert_eq!(w.closed_form, window_prob_closed_form(alpha, lambda, x).unwrap());
            assert!((w.coupled.p - w.closed_form).abs() < 4.0 * w.coupled.se, "{w:?}");
            assert!(w.physical.p >= w.closed_form - 3.0 * w.physical.se, "{w:?}");
        }
        let w = probe_window_prob(3.0, 2.0, 1e-9, 10_000, 12);
        assert_eq!(w.physical.p, 0.0);
        assert_eq!(w.coupled.p, 0.0);
    }

    #[test]
    fn rounds_on_small_graphs() {
        let k1 = MultiGraph::from_edges(1, &[]).unwrap();
        let mut e = Engine::new(&k1, SirsParams::new(1.0, 1.0).unwrap());
        let (log, rec) =
            track_rounds(&mut e, 0, 0.0, &InitialState::AllInfected, &StopRule::horizon(100.0), 1).unwrap();
        assert_eq!(log.rounds.len(), 1);
        assert_eq!(log.reinfections(), 0);
        assert!(rec.extinction_time.is_some());
        assert_eq!(log.good_rounds(), vec![0]);

        let star = MultiGraph::star(20);
        for alpha in [3.0, f64::INFINITY] {
            let p = SirsParams::new(1.0, alpha).unwrap();
            let mut e = Engine::new(&star, p);
            for s in 0..50 {
                let stop = StopRule { horizon: Some(50.0), reinfections: Some(30), event_budget: None };
                let (log, _) = track_rounds(&mut e, 0, 0.0, &InitialState::AllInfected, &stop, s).unwrap();
                assert_eq!(log.check_order(p.is_sis()), Ok(()));
                assert_eq!(log.good_rounds().len(), log.completed());
            }
        }
    }

    #[test]
    fn star_rounds_grow_with_n() {
        let p = SirsParams::new(1.0, 4.0).unwrap();
        let mut medians = Vec::new();
        for n in [10, 50, 250] {
            let g = MultiGraph::star(n);
            let mut e = Engine::new(&g, p);
            let stop = StopRule { horizon: None, reinfections: Some(2000), event_budget: Some(2_000_000) };
            let mut rounds: Vec<usize> = (0..101)
                .map(|s| track_rounds(&mut e, 0, 0.0, &InitialState::AllInfected, &stop, s).unwrap().0.completed())
                .collect();
            rounds.sort_unstable();
            medians.push(rounds[50]);
        }
        assert!(medians[0] < medians[1] && medians[1] < medians[2], "{medians:?}");
    }

    #[test]
    fn star_single_round_is_certain() {
        let rows = star_survival_scaling(&[5, 10], SirsParams::new(1.0, 2.0).unwrap(), 1, 200, 0, 1_000_000);
        assert!(rows.iter().all(|r| r.failure == 0.0 && r.reached == 200));
    }

    #[test]
    fn phi_estimates() {
        let p = SirsParams::new(1.0, 4.0).unwrap();
        let law = DegreePmf::poisson(0.5).unwrap();
        assert_eq!(estimate_phi(&law, 3, p, 1.0, 1.0, 10, 0, 1000, 1000).estimate.p, 1.0);
        let early = estimate_phi(&law, 3, p, 13.0, 1.0, 2000, 1, 100_000, 1_000_000);
        let late = estimate_phi(&law, 3, p, 40.0, 1.0, 2000, 1, 100_000, 1_000_000);
        assert!(late.estimate.p <= early.estimate.p);
        assert!(late.estimate.p < 0.01);
        assert_eq!(late.undecided, 0);
    }

    #[test]
    fn marked_set_series() {
        let g = MultiGraph::complete(6);
        let mut e = Engine::new(&g, SirsParams::new(1.0, 1.0).unwrap());
        e.mark(&[]);
        e.reset(&InitialState::AllInfected, 3).unwrap();
        assert_eq!(track_marked_set(&mut e, &[0.0, 0.5, 1.0]), vec![0, 0, 0]);
        e.mark(&[0, 1, 2, 3, 4, 5]);
        e.reset(&InitialState::AllInfected, 3).unwrap();
        let series = track_marked_set(&mut e, &[0.0, 0.5, 1.0, 2.0]);
        assert_eq!(series[0], 6);
        e.mark(&[0, 1, 2, 3, 4, 5]);
        assert_eq!(e.marked_infected(), e.infected_count());
    }
}
