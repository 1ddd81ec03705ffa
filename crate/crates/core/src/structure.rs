//! High-degree vertex selection, blue coloring, core pruning and expander
//! certification on configuration-model graphs.

use rand::seq::index;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::distributions::{tail_mass, DegreePmf, TailFunction};
use crate::graphs::{peel, sample_degree_sequence, uniform_matching, GraphError, MultiGraph, PeelOrder};
use crate::par;
use crate::rng::{combine, stream, RandomStream};

/// Largest marked set the exhaustive certifier accepts.
pub const EXHAUSTIVE_LIMIT: usize = 22;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StructureError {
    #[error("vertex {vertex} has degree {degree} < M = {m}")]
    DegreeBelowM { vertex: usize, degree: usize, m: u64 },
    #[error("exhaustive certification refused: |W0| = {0} exceeds {EXHAUSTIVE_LIMIT}")]
    ExhaustiveTooLarge(usize),
    #[error("sampled certification needs at least one trial")]
    NoTrials,
    #[error("beta must lie in [0, 1], got {0}")]
    BadBeta(f64),
    #[error(
        "no M <= {m_max} satisfies M^2 u_M / (480 d) > {target}; best value {best:.4} at M = {best_m}"
    )]
    NoAdmissibleM { m_max: u64, target: f64, best: f64, best_m: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Vertices whose degree lies in `[M, f(M)]`, ascending.
pub fn select_w(g: &MultiGraph, m: u64, f: &TailFunction) -> Vec<usize> {
    let hi = f.upper(m);
    (0..g.vertex_count())
        .filter(|&v| {
            let d = g.degree(v) as u64;
            d >= m && d <= hi
        })
        .collect()
}

/// Blue half-edges of the vertices in `W` and the derived counts.
#[derive(Debug, Clone, PartialEq)]
pub struct BlueColoring {
    pub w: Vec<usize>,
    pub m: u64,
    /// Exactly `m` half-edge ids per vertex of `w`, in the same order as `w`.
    pub blue_half_edges: Vec<Vec<u32>>,
    /// Number of matched pairs with both half-edges blue.
    pub blue_edge_count: usize,
    /// `2 r / (M |W|)`, reported as 0 when `W` is empty.
    pub theta: f64,
    blue: Vec<bool>,
}

impl BlueColoring {
    pub fn is_blue(&self, h: u32) -> bool {
        self.blue[h as usize]
    }

    /// Blue half-edges of `v` matched to another blue half-edge.
    pub fn blue_internal_degree(&self, g: &MultiGraph, v: usize) -> usize {
        g.half_edges(v).filter(|&h| self.blue[h as usize] && self.blue[g.partner(h) as usize]).count()
    }
}

/// Picks `m` half-edges uniformly without replacement for every vertex of `w`,
/// using only the degrees (half-edges of `v` are the ids
/// `sum(degrees[..v])..sum(degrees[..=v])`). Can run before the matching.
pub fn choose_blue(degrees: &[u32], w: &[usize], m: u64, rng: &mut RandomStream) -> Result<Vec<Vec<u32>>, StructureError> {
    let mut offsets = Vec::with_capacity(degrees.len() + 1);
    let mut acc = 0u32;
    for &d in degrees {
        offsets.push(acc);
        acc += d;
    }
    w.iter()
        .map(|&v| {
            let d = degrees[v] as usize;
            if (d as u64) < m {
                return Err(StructureError::DegreeBelowM { vertex: v, degree: d, m });
            }
            let mut picked: Vec<u32> =
                index::sample(rng, d, m as usize).into_iter().map(|i| offsets[v] + i as u32).collect();
            picked.sort_unstable();
            Ok(picked)
        })
        .collect()
}

/// Builds the coloring from chosen blue half-edges and the realized matching.
pub fn coloring_from_choice(g: &MultiGraph, w: Vec<usize>, m: u64, blue_half_edges: Vec<Vec<u32>>) -> BlueColoring {
    let mut blue = vec![false; g.half_edge_count()];
    for hs in &blue_half_edges {
        for &h in hs {
            blue[h as usize] = true;
        }
    }
    let blue_edge_count = (0..g.half_edge_count() as u32).filter(|&h| h < g.partner(h) && blue[h as usize] && blue[g.partner(h) as usize]).count();
    let theta = if w.is_empty() || m == 0 { 0.0 } else { 2.0 * blue_edge_count as f64 / (m as f64 * w.len() as f64) };
    BlueColoring { w, m, blue_half_edges, blue_edge_count, theta, blue }
}

/// Colors exactly `m` uniformly chosen half-edges of each vertex of `w` blue
/// and counts the blue-blue pairs of the existing matching.
pub fn color_blue(g: &MultiGraph, w: &[usize], m: u64, rng: &mut RandomStream) -> Result<BlueColoring, StructureError> {
    let chosen = choose_blue(&g.degrees(), w, m, rng)?;
    Ok(coloring_from_choice(g, w.to_vec(), m, chosen))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreExtractionResult {
    pub w0: Vec<usize>,
    pub s: f64,
    pub pruned_order: Vec<usize>,
    /// Blue-internal degree inside `w0`, aligned with `w0`.
    pub internal_degree: Vec<usize>,
}

/// Removes vertices of `W` whose blue edges to surviving `W` vertices number
/// fewer than `s`, until none is left to remove. Vertices above `f(M)` are
/// dropped up front.
pub fn prune_to_core(g: &MultiGraph, coloring: &BlueColoring, s: f64, f: &TailFunction) -> CoreExtractionResult {
    prune_to_core_with_order(g, coloring, s, f, PeelOrder::Fifo)
}

pub fn prune_to_core_with_order(
    g: &MultiGraph,
    coloring: &BlueColoring,
    s: f64,
    f: &TailFunction,
    order: PeelOrder<'_>,
) -> CoreExtractionResult {
    let n = g.vertex_count();
    let hi = f.upper(coloring.m);
    let mut alive = vec![false; n];
    let mut degree = vec![0.0; n];
    let mut pruned_order = Vec::new();
    for &v in &coloring.w {
        if g.degree(v) as u64 <= hi {
            alive[v] = true;
        } else {
            pruned_order.push(v);
        }
    }
    for &v in &coloring.w {
        if alive[v] {
            degree[v] = g
                .half_edges(v)
                .filter(|&h| {
                    let p = g.partner(h);
                    coloring.blue[h as usize] && coloring.blue[p as usize] && alive[g.owner(p) as usize]
                })
                .count() as f64;
        }
    }
    let removed = peel(&mut alive, &mut degree, s, order, |v, out| {
        for h in g.half_edges(v) {
            let p = g.partner(h);
            if coloring.blue[h as usize] && coloring.blue[p as usize] {
                out.push(g.owner(p) as usize);
            }
        }
    });
    pruned_order.extend(removed);
    let w0: Vec<usize> = coloring.w.iter().copied().filter(|&v| alive[v]).collect();
    let internal_degree = w0.iter().map(|&v| degree[v] as usize).collect();
    CoreExtractionResult { w0, s, pruned_order, internal_degree }
}

/// Smallest `M <= m_max` with `M^2 u_M / (480 d) > 10 (1 + K)`.
pub fn choose_m(mu: &DegreePmf, f: &TailFunction, k: f64, d: f64, m_max: u64) -> Option<u64> {
    let target = 10.0 * (1.0 + k);
    (1..=m_max).find(|&m| m_score(mu, f, m, d) > target)
}

fn m_score(mu: &DegreePmf, f: &TailFunction, m: u64, d: f64) -> f64 {
    let mf = m as f64;
    mf * mf * tail_mass(mu, m, f) / (480.0 * d)
}

/// Which expansion inequality to certify.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExpanderKind {
    /// `|N(A, 1) ∩ W0| >= (1 + C) |A|` for `1 <= |A| <= beta |W0|`.
    Vertex { beta: f64, c: f64 },
    /// `|N(A, R) ∩ W0| >= 2 |A|` for `1 <= |A| <= beta |W0|`.
    Embedded { beta: f64, r: usize },
}

impl ExpanderKind {
    pub fn beta(&self) -> f64 {
        match *self {
            ExpanderKind::Vertex { beta, .. } | ExpanderKind::Embedded { beta, .. } => beta,
        }
    }

    fn radius(&self) -> usize {
        match *self {
            ExpanderKind::Vertex { .. } => 1,
            ExpanderKind::Embedded { r, .. } => r,
        }
    }

    fn factor(&self) -> f64 {
        match *self {
            ExpanderKind::Vertex { c, .. } => 1.0 + c,
            ExpanderKind::Embedded { .. } => 2.0,
        }
    }

    /// Largest admissible `|A|` for a marked set of size `size`.
    pub fn max_set_size(&self, size: usize) -> usize {
        (self.beta() * size as f64 + 1e-12).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum CertMode {
    Exhaustive,
    Sampled { trials: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpanderCertificate {
    pub kind: ExpanderKind,
    pub mode: CertMode,
    pub verdict: Verdict,
    /// A violating set when the verdict is `Fail`.
    pub witness: Option<Vec<usize>>,
    /// Number of sets `A` evaluated.
    pub checked: u64,
    /// Smallest `|N(A, R) ∩ W0| / |A|` seen, if any set was checked.
    pub worst_ratio: Option<f64>,
}

/// `|N(A, R) ∩ W0|`, with stamp-based scratch so repeated calls do not
/// reallocate.
struct Ball {
    seen: Vec<u32>,
    stamp: u32,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl Ball {
    fn new(n: usize) -> Self {
        Self { seen: vec![0; n], stamp: 0, frontier: Vec::new(), next: Vec::new() }
    }

    fn count_in(&mut self, g: &MultiGraph, a: &[usize], r: usize, in_w0: &[bool]) -> usize {
        self.stamp += 1;
        let stamp = self.stamp;
        self.frontier.clear();
        let mut count = 0;
        for &v in a {
            if self.seen[v] != stamp {
                self.seen[v] = stamp;
                count += in_w0[v] as usize;
                self.frontier.push(v);
            }
        }
        for _ in 0..r {
            self.next.clear();
            for &v in &self.frontier {
                for w in g.neighbors(v) {
                    if self.seen[w] != stamp {
                        self.seen[w] = stamp;
                        count += in_w0[w] as usize;
                        self.next.push(w);
                    }
                }
            }
            std::mem::swap(&mut self.frontier, &mut self.next);
            if self.frontier.is_empty() {
                break;
            }
        }
        count
    }
}

fn marked_mask(n: usize, w0: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in w0 {
        m[v] = true;
    }
    m
}

/// True when `a` violates the inequality of `kind`, recomputed from scratch
/// with [`crate::graphs::neighborhood`].
pub fn violates(g: &MultiGraph, w0: &[usize], kind: &ExpanderKind, a: &[usize]) -> bool {
    let ball = crate::graphs::neighborhood(g, a, kind.radius());
    let inside = ball.iter().filter(|v| w0.contains(v)).count();
    let mut distinct = a.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    (inside as f64) < kind.factor() * distinct.len() as f64
}

pub fn certify_vertex_expander(
    g: &MultiGraph,
    w0: &[usize],
    beta: f64,
    c: f64,
    mode: CertMode,
    rng: &mut RandomStream,
) -> Result<ExpanderCertificate, StructureError> {
    certify(g, w0, ExpanderKind::Vertex { beta, c }, mode, rng)
}

pub fn certify_embedded_expander(
    g: &MultiGraph,
    w0: &[usize],
    beta: f64,
    r: usize,
    mode: CertMode,
    rng: &mut RandomStream,
) -> Result<ExpanderCertificate, StructureError> {
    certify(g, w0, ExpanderKind::Embedded { beta, r }, mode, rng)
}

/// Checks the expansion inequality over every admissible `A` (exhaustive) or
/// over `trials` random ones (sampled: `|A|` uniform in `1..=floor(beta |W0|)`,
/// then a uniform subset of that size). The reported witness is the first
/// failing set in enumeration order, or the failing set of the lowest trial
/// index, so it does not depend on the thread count.
pub fn certify(
    g: &MultiGraph,
    w0: &[usize],
    kind: ExpanderKind,
    mode: CertMode,
    rng: &mut RandomStream,
) -> Result<ExpanderCertificate, StructureError> {
    let beta = kind.beta();
    if !(0.0..=1.0).contains(&beta) {
        return Err(StructureError::BadBeta(beta));
    }
    let kmax = kind.max_set_size(w0.len());
    match mode {
        CertMode::Exhaustive => {
            if w0.len() > EXHAUSTIVE_LIMIT {
                return Err(StructureError::ExhaustiveTooLarge(w0.len()));
            }
            Ok(exhaustive(g, w0, kind, kmax))
        }
        CertMode::Sampled { trials } => {
            if trials == 0 {
                return Err(StructureError::NoTrials);
            }
            let base = rng.next_u64();
            Ok(sampled(g, w0, kind, kmax, trials, base))
        }
    }
}

fn exhaustive(g: &MultiGraph, w0: &[usize], kind: ExpanderKind, kmax: usize) -> ExpanderCertificate {
    // ball of each marked vertex as a bitmask over positions in w0
    let pos: std::collections::HashMap<usize, usize> = w0.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let masks: Vec<u32> = w0
        .iter()
        .map(|&v| {
            let members = crate::graphs::neighborhood(g, &[v], kind.radius());
            members.iter().filter_map(|u| pos.get(u)).fold(0u32, |m, &i| m | (1 << i))
        })
        .collect();
    let factor = kind.factor();
    let mut checked = 0u64;
    let mut worst: Option<f64> = None;
    let mut witness = None;
    let mut chosen = Vec::with_capacity(kmax);
    for size in 1..=kmax.min(w0.len()) {
        if search(&masks, 0, size, 0, &mut chosen, factor, &mut checked, &mut worst) {
            witness = Some(chosen.iter().map(|&i| w0[i]).collect());
            break;
        }
    }
    ExpanderCertificate {
        kind,
        mode: CertMode::Exhaustive,
        verdict: if witness.is_some() { Verdict::Fail } else { Verdict::Pass },
        witness,
        checked,
        worst_ratio: worst,
    }
}

/// Depth-first enumeration of `size`-subsets in lexicographic order; returns
/// true with `chosen` holding the first violating subset.
#[allow(clippy::too_many_arguments)]
fn search(
    masks: &[u32],
    start: usize,
    size: usize,
    acc: u32,
    chosen: &mut Vec<usize>,
    factor: f64,
    checked: &mut u64,
    worst: &mut Option<f64>,
) -> bool {
    if chosen.len() == size {
        *checked += 1;
        let covered = acc.count_ones() as f64;
        let ratio = covered / size as f64;
        if worst.is_none_or(|w| ratio < w) {
            *worst = Some(ratio);
        }
        return covered < factor * size as f64;
    }
    let remaining = size - chosen.len();
    for i in start..=masks.len() - remaining {
        chosen.push(i);
        if search(masks, i + 1, size, acc | masks[i], chosen, factor, checked, worst) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn sampled(g: &MultiGraph, w0: &[usize], kind: ExpanderKind, kmax: usize, trials: usize, base: u64) -> ExpanderCertificate {
    let mode = CertMode::Sampled { trials };
    if kmax == 0 {
        return ExpanderCertificate { kind, mode, verdict: Verdict::Pass, witness: None, checked: 0, worst_ratio: None };
    }
    let in_w0 = marked_mask(g.vertex_count(), w0);
    let factor = kind.factor();
    let radius = kind.radius();
    let outcomes = par::map_chunked(
        trials,
        64,
        || (Ball::new(g.vertex_count()), Vec::new()),
        |(ball, a): &mut (Ball, Vec<usize>), t| {
            let mut rng = stream(combine(base, t as u64));
            let size = rng.random_range(1..=kmax);
            a.clear();
            a.extend(index::sample(&mut rng, w0.len(), size).into_iter().map(|i| w0[i]));
            let covered = ball.count_in(g, a, radius, &in_w0) as f64;
            let fail = covered < factor * size as f64;
            (covered / size as f64, fail.then(|| a.clone()))
        },
    );
    let worst = outcomes.iter().map(|o| o.0).fold(f64::INFINITY, f64::min);
    let witness = outcomes.into_iter().find_map(|o| o.1).map(|mut a| {
        a.sort_unstable();
        a
    });
    ExpanderCertificate {
        kind,
        mode,
        verdict: if witness.is_some() { Verdict::Fail } else { Verdict::Pass },
        witness,
        checked: trials as u64,
        worst_ratio: Some(worst),
    }
}

/// Everything the structural pipeline measured on one sampled graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "W")]
    pub w: usize,
    pub r: usize,
    pub theta: f64,
    pub s: f64,
    #[serde(rename = "W0")]
    pub w0: usize,
    #[serde(rename = "K_prime")]
    pub k_prime: u64,
    pub u_m: f64,
    /// `u_M M / (24 d)`.
    pub theta_bound: f64,
    pub w0_fraction: f64,
    pub verdict: Verdict,
    pub witness: Option<Vec<usize>>,
    pub worst_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub k: f64,
    pub beta: f64,
    pub trials: usize,
}

/// Runs the pipeline at the `M` chosen by [`choose_m`] (scanning up to the
/// largest degree of `mu`), refusing when no admissible `M` exists.
pub fn expander_pipeline(
    mu: &DegreePmf,
    f: &TailFunction,
    n: usize,
    params: PipelineParams,
    rng: &mut RandomStream,
) -> Result<(MultiGraph, CoreExtractionResult, ExpanderCertificate, PipelineReport), StructureError> {
    let d = mu.mean();
    let m_max = mu.max_degree();
    let m = match choose_m(mu, f, params.k, d, m_max) {
        Some(m) => m,
        None => {
            let (best_m, best) = (1..=m_max)
                .map(|m| (m, m_score(mu, f, m, d)))
                .fold((1, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            return Err(StructureError::NoAdmissibleM { m_max, target: 10.0 * (1.0 + params.k), best, best_m });
        }
    };
    pipeline_at(mu, f, n, m, params, rng)
}

/// The pipeline at a caller-chosen `M`: sample degrees, select `W`, color
/// blue, match uniformly, prune with `s = theta M / 20`, and certify a
/// `(beta, K)`-vertex expander by sampling.
pub fn pipeline_at(
    mu: &DegreePmf,
    f: &TailFunction,
    n: usize,
    m: u64,
    params: PipelineParams,
    rng: &mut RandomStream,
) -> Result<(MultiGraph, CoreExtractionResult, ExpanderCertificate, PipelineReport), StructureError> {
    let d = mu.mean();
    let seq = sample_degree_sequence(n, mu, rng);
    let hi = f.upper(m);
    let w: Vec<usize> = (0..n)
        .filter(|&v| {
            let dv = seq.degrees[v] as u64;
            dv >= m && dv <= hi
        })
        .collect();
    let chosen = choose_blue(&seq.degrees, &w, m, rng)?;
    let g = uniform_matching(&seq, rng)?;
    let coloring = coloring_from_choice(&g, w, m, chosen);
    let s = coloring.theta * m as f64 / 20.0;
    let core = prune_to_core(&g, &coloring, s, f);
    let cert = certify_vertex_expander(&g, &core.w0, params.beta, params.k, CertMode::Sampled { trials: params.trials }, rng)?;
    let u_m = tail_mass(mu, m, f);
    let report = PipelineReport {
        n,
        m,
        w: coloring.w.len(),
        r: coloring.blue_edge_count,
        theta: coloring.theta,
        s,
        w0: core.w0.len(),
        k_prime: hi,
        u_m,
        theta_bound: u_m * m as f64 / (24.0 * d),
        w0_fraction: core.w0.len() as f64 / n as f64,
        verdict: cert.verdict,
        witness: cert.witness.clone(),
        worst_ratio: cert.worst_ratio,
    };
    Ok((g, core, cert, report))
}
