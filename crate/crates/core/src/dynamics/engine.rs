use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::heap::AlarmHeap;
use super::network::{Arc, Network};
use super::rounds::RoundLog;
use super::{Compartment, DynamicsError, SirsParams};
use crate::rng::{stream, RandomStream};

/// Starting configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    AllInfected,
    /// One infected vertex, everything else susceptible.
    RootInfected(usize),
    /// Listed vertices get the listed compartment, the rest are susceptible.
    Explicit(Vec<(usize, Compartment)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventKind {
    Recover,
    Deimmunize,
    Infect { from: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub vertex: usize,
    pub kind: EventKind,
}

impl Event {
    /// `time kind vertex [neighbor]`.
    pub fn log_line(&self) -> String {
        match self.kind {
            EventKind::Recover => format!("{} recover {}", self.time, self.vertex),
            EventKind::Deimmunize => format!("{} deimmunize {}", self.time, self.vertex),
            EventKind::Infect { from } => format!("{} infect {} {}", self.time, self.vertex, from),
        }
    }
}

/// When to stop a run besides extinction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StopRule {
    pub horizon: Option<f64>,
    /// Stop once the tracked root has been reinfected this many times.
    pub reinfections: Option<usize>,
    pub event_budget: Option<u64>,
}

impl StopRule {
    pub fn horizon(t: f64) -> Self {
        Self { horizon: Some(t), ..Self::default() }
    }
}

/// Why a run ended with infection still present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Censoring {
    Horizon,
    EventBudget,
    NodeBudget,
    ReinfectionTarget,
}

/// Outcome of one trajectory. Exactly one of `extinction_time` and
/// `censored` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRecord {
    pub seed: u64,
    pub n: usize,
    pub lambda: f64,
    /// `None` in SIS mode.
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extinction_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub censored: Option<Censoring>,
    pub horizon: Option<f64>,
    /// Time at which the run stopped.
    pub end_time: f64,
    pub events: u64,
    pub peak_infected: usize,
    pub final_infected: usize,
    pub final_recovered: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reinfections: Option<usize>,
}

impl SurvivalRecord {
    /// Survival time, or the censoring time as a lower bound.
    pub fn observed_time(&self) -> f64 {
        self.extinction_time.unwrap_or(self.end_time)
    }

    pub fn is_censored(&self) -> bool {
        self.censored.is_some()
    }
}

#[inline]
fn vertex_key(v: usize) -> u32 {
    2 * v as u32
}

#[inline]
fn arc_key(a: u32) -> u32 {
    2 * a + 1
}

/// Exact event-driven simulator of the SIRS chain.
///
/// Every legal transition owns one exponential alarm in an indexed heap:
/// recovery of each infected vertex, deimmunization of each recovered vertex,
/// and one infection alarm per arc from an infected vertex to a susceptible
/// one. A transition at `v` only touches the alarms of `v` and of arcs
/// incident to `v`; all other alarms keep their times, which is exact by
/// memorylessness.
pub struct Engine<N: Network> {
    net: N,
    params: SirsParams,
    comp: Vec<Compartment>,
    pinned: Vec<bool>,
    marked: Vec<bool>,
    counts: [usize; 3],
    marked_infected: usize,
    time: f64,
    heap: AlarmHeap,
    events: u64,
    peak: usize,
    seed: u64,
    rng: RandomStream,
    rounds: Option<RoundLog>,
    root: usize,
    node_budget_hit: bool,
    log: Option<Vec<Event>>,
    arcs: Vec<Arc>,
}

impl<N: Network> Engine<N> {
    pub fn new(net: N, params: SirsParams) -> Self {
        let mut e = Self {
            net,
            params,
            comp: Vec::new(),
            pinned: Vec::new(),
            marked: Vec::new(),
            counts: [0; 3],
            marked_infected: 0,
            time: 0.0,
            heap: AlarmHeap::new(),
            events: 0,
            peak: 0,
            seed: 0,
            rng: stream(0),
            rounds: None,
            root: 0,
            node_budget_hit: false,
            log: None,
            arcs: Vec::new(),
        };
        e.sync();
        e
    }

    pub fn network(&self) -> &N {
        &self.net
    }

    /// Mutable access for resetting a lazily built network between runs.
    pub fn network_mut(&mut self) -> &mut N {
        &mut self.net
    }

    pub fn params(&self) -> SirsParams {
        self.params
    }

    pub fn set_params(&mut self, params: SirsParams) {
        self.params = params;
    }

    /// Keeps `v` infected forever once infected: no recovery alarm.
    pub fn pin(&mut self, v: usize) {
        self.sync();
        self.pinned[v] = true;
        if self.comp[v] == Compartment::I {
            self.heap.cancel(vertex_key(v));
        }
    }

    /// Registers the marked set whose infected count is maintained.
    pub fn mark(&mut self, set: &[usize]) {
        self.sync();
        self.marked.iter_mut().for_each(|m| *m = false);
        for &v in set {
            self.marked[v] = true;
        }
        self.marked_infected = (0..self.comp.len()).filter(|&v| self.marked[v] && self.comp[v] == Compartment::I).count();
    }

    /// Enables root-round bookkeeping from the next [`Engine::reset`] on.
    pub fn track_root(&mut self, root: usize, epsilon: f64) {
        self.root = root;
        self.rounds = Some(RoundLog::new(epsilon));
    }

    pub fn round_log(&self) -> Option<&RoundLog> {
        self.rounds.as_ref()
    }

    /// Records every applied event from the next reset on.
    pub fn enable_log(&mut self) {
        self.log = Some(Vec::new());
    }

    pub fn take_log(&mut self) -> Vec<Event> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn sync(&mut self) {
        let nv = self.net.vertex_count();
        if self.comp.len() < nv {
            self.counts[0] += nv - self.comp.len();
            self.comp.resize(nv, Compartment::S);
            self.pinned.resize(nv, false);
            self.marked.resize(nv, false);
        }
        let keys = 2 * nv.max(self.net.arc_bound()) + 2;
        self.heap.reserve_keys(keys);
    }

    /// Puts the chain at time 0 in `init`, seeding the run's stream with
    /// `seed`. Pins and the marked set are kept.
    pub fn reset(&mut self, init: &InitialState, seed: u64) -> Result<(), DynamicsError> {
        self.sync();
        let nv = self.net.vertex_count();
        self.heap.clear();
        self.comp.truncate(nv);
        self.comp.iter_mut().for_each(|c| *c = Compartment::S);
        self.counts = [nv, 0, 0];
        self.marked_infected = 0;
        self.time = 0.0;
        self.events = 0;
        self.peak = 0;
        self.seed = seed;
        self.rng = stream(seed);
        self.node_budget_hit = false;
        if let Some(log) = &mut self.log {
            log.clear();
        }
        if let Some(r) = &mut self.rounds {
            r.clear();
        }
        match init {
            InitialState::AllInfected => {
                for v in 0..nv {
                    self.infect(v);
                }
            }
            InitialState::RootInfected(root) => {
                if *root >= nv {
                    return Err(DynamicsError::UnknownVertex { vertex: *root, n: nv });
                }
                self.infect(*root);
            }
            InitialState::Explicit(list) => {
                if let Some(&(v, _)) = list.iter().find(|(v, _)| *v >= nv) {
                    return Err(DynamicsError::UnknownVertex { vertex: v, n: nv });
                }
                for &(v, c) in list {
                    if c == Compartment::R {
                        if self.params.is_sis() {
                            return Err(DynamicsError::RecoveredInSis(v));
                        }
                        self.set(v, Compartment::R);
                        let t = self.exp(self.params.alpha);
                        self.heap.schedule(vertex_key(v), t);
                    }
                }
                for &(v, c) in list {
                    if c == Compartment::I && self.comp[v] != Compartment::I {
                        self.infect(v);
                    }
                }
            }
        }
        let root_infected = self.root < self.comp.len() && self.comp[self.root] == Compartment::I;
        if let Some(rounds) = self.rounds.as_mut().filter(|_| root_infected) {
            rounds.start_round(self.time);
        }
        Ok(())
    }

    #[inline]
    fn exp(&mut self, rate: f64) -> f64 {
        let e: f64 = self.rng.sample(Exp1);
        self.time + e / rate
    }

    #[inline]
    fn set(&mut self, v: usize, c: Compartment) {
        let old = self.comp[v];
        self.counts[old as usize] -= 1;
        self.counts[c as usize] += 1;
        if self.marked[v] {
            if old == Compartment::I {
                self.marked_infected -= 1;
            }
            if c == Compartment::I {
                self.marked_infected += 1;
            }
        }
        self.comp[v] = c;
    }

    fn infect(&mut self, v: usize) {
        if self.net.prepare(v).is_err() {
            self.node_budget_hit = true;
        }
        self.sync();
        self.set(v, Compartment::I);
        self.peak = self.peak.max(self.counts[1]);
        if !self.pinned[v] {
            let t = self.exp(1.0);
            self.heap.schedule(vertex_key(v), t);
        }
        let mut arcs = std::mem::take(&mut self.arcs);
        self.net.arcs(v, &mut arcs);
        for a in &arcs {
            match self.comp[a.target as usize] {
                Compartment::I => self.heap.cancel(arc_key(a.reverse)),
                Compartment::S => {
                    let t = self.exp(self.params.lambda);
                    self.heap.schedule(arc_key(a.id), t);
                }
                Compartment::R => {}
            }
        }
        self.arcs = arcs;
    }

    /// Schedules infection alarms into the newly susceptible `v`.
    fn expose(&mut self, v: usize) {
        let mut arcs = std::mem::take(&mut self.arcs);
        self.net.arcs(v, &mut arcs);
        for a in &arcs {
            if self.comp[a.target as usize] == Compartment::I {
                let t = self.exp(self.params.lambda);
                self.heap.schedule(arc_key(a.reverse), t);
            }
        }
        self.arcs = arcs;
    }

    fn recover(&mut self, v: usize) {
        let mut arcs = std::mem::take(&mut self.arcs);
        self.net.arcs(v, &mut arcs);
        for a in &arcs {
            self.heap.cancel(arc_key(a.id));
        }
        self.arcs = arcs;
        if self.params.is_sis() {
            self.set(v, Compartment::S);
            self.expose(v);
        } else {
            self.set(v, Compartment::R);
            let t = self.exp(self.params.alpha);
            self.heap.schedule(vertex_key(v), t);
        }
    }

    /// Time of the next pending alarm.
    pub fn next_time(&self) -> Option<f64> {
        self.heap.peek().map(|(t, _)| t)
    }

    /// Applies the earliest pending transition.
    pub fn step(&mut self) -> Option<Event> {
        let (t, key) = self.heap.pop()?;
        debug_assert!(t >= self.time);
        self.time = t;
        self.events += 1;
        let event = if key % 2 == 0 {
            let v = (key / 2) as usize;
            match self.comp[v] {
                Compartment::I => {
                    self.recover(v);
                    if v == self.root {
                        if let Some(r) = &mut self.rounds {
                            r.mark_recovered(t, self.params.is_sis());
                        }
                    }
                    Event { time: t, vertex: v, kind: EventKind::Recover }
                }
                Compartment::R => {
                    self.set(v, Compartment::S);
                    self.expose(v);
                    if v == self.root {
                        if let Some(r) = &mut self.rounds {
                            r.mark_susceptible(t);
                        }
                    }
                    Event { time: t, vertex: v, kind: EventKind::Deimmunize }
                }
                Compartment::S => unreachable!("vertex alarm on a susceptible vertex"),
            }
        } else {
            let a = key / 2;
            let (from, to) = self.net.arc_ends(a);
            debug_assert_eq!(self.comp[from], Compartment::I);
            debug_assert_eq!(self.comp[to], Compartment::S);
            self.infect(to);
            if to == self.root {
                if let Some(r) = &mut self.rounds {
                    r.start_round(t);
                }
            }
            Event { time: t, vertex: to, kind: EventKind::Infect { from } }
        };
        if let Some(log) = &mut self.log {
            log.push(event);
        }
        Some(event)
    }

    /// Advances through every alarm at or before `t`, then sets the clock to
    /// `t`. Stops early once the node budget is hit.
    pub fn advance_to(&mut self, t: f64) {
        while let Some(next) = self.next_time() {
            if next > t || self.node_budget_hit {
                break;
            }
            self.step();
        }
        if t > self.time && !self.node_budget_hit {
            self.time = t;
        }
    }

    /// Runs to extinction or the first stop condition.
    pub fn run_until(&mut self, stop: &StopRule) -> SurvivalRecord {
        let censored = loop {
            if self.counts[1] == 0 {
                break None;
            }
            if self.node_budget_hit {
                break Some(Censoring::NodeBudget);
            }
            if let (Some(k), Some(r)) = (stop.reinfections, &self.rounds) {
                if r.reinfections() >= k {
                    break Some(Censoring::ReinfectionTarget);
                }
            }
            if stop.event_budget.is_some_and(|b| self.events >= b) {
                break Some(Censoring::EventBudget);
            }
            match (self.next_time(), stop.horizon) {
                (None, h) => {
                    if let Some(h) = h {
                        self.time = self.time.max(h);
                    }
                    break Some(Censoring::Horizon);
                }
                (Some(t), Some(h)) if t > h => {
                    self.time = h;
                    break Some(Censoring::Horizon);
                }
                _ => {
                    self.step();
                }
            }
        };
        self.record(censored, stop.horizon)
    }

    fn record(&self, censored: Option<Censoring>, horizon: Option<f64>) -> SurvivalRecord {
        SurvivalRecord {
            seed: self.seed,
            n: self.net.vertex_count(),
            lambda: self.params.lambda,
            alpha: (!self.params.is_sis()).then_some(self.params.alpha),
            extinction_time: censored.is_none().then_some(self.time),
            censored,
            horizon,
            end_time: self.time,
            events: self.events,
            peak_infected: self.peak,
            final_infected: self.counts[1],
            final_recovered: self.counts[2],
            reinfections: self.rounds.as_ref().map(|r| r.reinfections()),
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn compartment(&self, v: usize) -> Compartment {
        self.comp[v]
    }

    pub fn compartments(&self) -> &[Compartment] {
        &self.comp
    }

    /// `[S, I, R]` counts over realized vertices.
    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn infected_count(&self) -> usize {
        self.counts[1]
    }

    pub fn marked_infected(&self) -> usize {
        self.marked_infected
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn node_budget_hit(&self) -> bool {
        self.node_budget_hit
    }

    /// Number of pending alarms; for invariant checks.
    pub fn pending_alarms(&self) -> usize {
        self.heap.len()
    }
}
