//! Configuration-model samplers: i.i.d. degree draws, the uniform perfect
//! matching of half-edges, and its incremental realization by the cut-off
//! line algorithm.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DegreeSequence, GraphError, MultiGraph};
use crate::distributions::{sample_degree, DegreePmf};
use crate::rng::RandomStream;

/// `n` i.i.d. draws from `mu`. An odd total gets one extra half-edge on a
/// uniformly random vertex, recorded in `parity_fixed`.
pub fn sample_degree_sequence(n: usize, mu: &DegreePmf, rng: &mut RandomStream) -> DegreeSequence {
    let mut degrees: Vec<u32> = (0..n).map(|_| sample_degree(mu, rng) as u32).collect();
    let mut seq_fix = None;
    if degrees.iter().map(|&d| d as u64).sum::<u64>() % 2 == 1 {
        let v = rng.random_range(0..n);
        degrees[v] += 1;
        seq_fix = Some(v);
    }
    DegreeSequence { degrees, parity_fixed: seq_fix }
}

/// Uniformly random perfect matching of all half-edges; self-loops and
/// parallel edges are kept.
pub fn uniform_matching(seq: &DegreeSequence, rng: &mut RandomStream) -> Result<MultiGraph, GraphError> {
    if !seq.is_even() {
        return Err(GraphError::OddTotalDegree(seq.total()));
    }
    let h_count = seq.total() as usize;
    let mut order: Vec<u32> = (0..h_count as u32).collect();
    order.shuffle(rng);
    let mut matching = vec![0u32; h_count];
    for pair in order.chunks_exact(2) {
        matching[pair[0] as usize] = pair[1];
        matching[pair[1] as usize] = pair[0];
    }
    MultiGraph::from_matching(&seq.degrees, matching)
}

/// Sample a configuration-model graph with `n` vertices and degree law `mu`.
pub fn configuration_model(n: usize, mu: &DegreePmf, rng: &mut RandomStream) -> (MultiGraph, DegreeSequence) {
    let seq = sample_degree_sequence(n, mu, rng);
    let g = uniform_matching(&seq, rng).expect("parity fixed above");
    (g, seq)
}

/// Heights drawn by the cut-off line algorithm and the trace of the line.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightAssignment {
    pub heights: Vec<f64>,
    /// Position of the cut-off line after each matching step; nonincreasing.
    pub cutoff_trace: Vec<f64>,
}

impl HeightAssignment {
    /// Current line position (1 before any step).
    pub fn cutoff(&self) -> f64 {
        self.cutoff_trace.last().copied().unwrap_or(1.0)
    }
}

/// Chooses the next half-edge to match. Implementations may look at which
/// half-edges are unmatched, never at their heights.
pub trait HalfEdgePicker {
    fn pick(&mut self, unmatched: &UnmatchedHalfEdges<'_>, rng: &mut RandomStream) -> u32;
}

/// Read-only view of the unmatched half-edges, without height information.
pub struct UnmatchedHalfEdges<'a> {
    matched: &'a [bool],
    remaining: usize,
}

impl UnmatchedHalfEdges<'_> {
    pub fn is_unmatched(&self, h: u32) -> bool {
        !self.matched[h as usize]
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn total(&self) -> usize {
        self.matched.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.matched.iter().enumerate().filter(|(_, m)| !**m).map(|(h, _)| h as u32)
    }
}

/// Always picks the unmatched half-edge with the smallest id.
#[derive(Debug, Default)]
pub struct LowestIdPicker {
    cursor: u32,
}

impl HalfEdgePicker for LowestIdPicker {
    fn pick(&mut self, unmatched: &UnmatchedHalfEdges<'_>, _rng: &mut RandomStream) -> u32 {
        while !unmatched.is_unmatched(self.cursor) {
            self.cursor += 1;
        }
        self.cursor
    }
}

/// Picks a uniformly random unmatched half-edge.
#[derive(Debug, Default)]
pub struct UniformPicker;

impl HalfEdgePicker for UniformPicker {
    fn pick(&mut self, unmatched: &UnmatchedHalfEdges<'_>, rng: &mut RandomStream) -> u32 {
        let target = rng.random_range(0..unmatched.remaining());
        unmatched.iter().nth(target).expect("remaining count is accurate")
    }
}

/// Matches half-edges by the cut-off line algorithm: every half-edge gets an
/// independent uniform height, the line starts at 1, and each step matches a
/// picked unmatched half-edge to the highest other unmatched half-edge, then
/// lowers the line to that height.
pub fn cutoff_line_matching(
    seq: &DegreeSequence,
    picker: &mut dyn HalfEdgePicker,
    rng: &mut RandomStream,
) -> Result<(MultiGraph, HeightAssignment), GraphError> {
    if !seq.is_even() {
        return Err(GraphError::OddTotalDegree(seq.total()));
    }
    let h_count = seq.total() as usize;
    let heights: Vec<f64> = (0..h_count).map(|_| rng.random::<f64>()).collect();
    let mut by_height: Vec<u32> = (0..h_count as u32).collect();
    by_height.sort_by(|&a, &b| heights[b as usize].total_cmp(&heights[a as usize]));

    let mut matched = vec![false; h_count];
    let mut matching = vec![0u32; h_count];
    let mut trace = Vec::with_capacity(h_count / 2);
    let mut top = 0usize;
    let mut remaining = h_count;
    while remaining > 0 {
        let picked = picker.pick(&UnmatchedHalfEdges { matched: &matched, remaining }, rng);
        if picked as usize >= h_count || matched[picked as usize] {
            return Err(GraphError::PickerReturnedMatched(picked));
        }
        matched[picked as usize] = true;
        while matched[by_height[top] as usize] {
            top += 1;
        }
        let highest = by_height[top];
        matched[highest as usize] = true;
        matching[picked as usize] = highest;
        matching[highest as usize] = picked;
        trace.push(heights[highest as usize]);
        remaining -= 2;
    }
    let g = MultiGraph::from_matching(&seq.degrees, matching)?;
    Ok((g, HeightAssignment { heights, cutoff_trace: trace }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn degree_sequence_parity() {
        let mut rng = stream(1);
        let seq = sample_degree_sequence(4, &DegreePmf::point(1), &mut rng);
        assert_eq!(seq.degrees, vec![1, 1, 1, 1]);
        assert_eq!(seq.parity_fixed, None);
        let seq = sample_degree_sequence(3, &DegreePmf::point(1), &mut rng);
        assert!(seq.parity_fixed.is_some());
        assert_eq!(seq.degrees.iter().filter(|&&d| d == 2).count(), 1);
        assert!(seq.is_even());
        let seq = sample_degree_sequence(10_000, &DegreePmf::poisson(3.0).unwrap(), &mut rng);
        let mean = seq.total() as f64 / 10_000.0;
        assert!((mean - 3.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn unique_matchings() {
        let mut rng = stream(2);
        let g = uniform_matching(&DegreeSequence::new(vec![1, 1]), &mut rng).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        let g = uniform_matching(&DegreeSequence::new(vec![2]), &mut rng).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 0)]);
        assert!(matches!(
            uniform_matching(&DegreeSequence::new(vec![1, 2]), &mut rng),
            Err(GraphError::OddTotalDegree(3))
        ));
        let (g, heights) =
            cutoff_line_matching(&DegreeSequence::new(vec![1, 1]), &mut LowestIdPicker::default(), &mut rng).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        // half-edge 0 is picked and matched to the only other one
        assert_eq!(heights.cutoff(), heights.heights[1]);
    }

    #[test]
    fn cutoff_line_is_nonincreasing() {
        let mut rng = stream(3);
        let seq = sample_degree_sequence(200, &DegreePmf::poisson(4.0).unwrap(), &mut rng);
        for picker in [&mut LowestIdPicker::default() as &mut dyn HalfEdgePicker, &mut UniformPicker] {
            let (g, h) = cutoff_line_matching(&seq, picker, &mut rng).unwrap();
            assert!(h.cutoff_trace.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(h.cutoff_trace.len(), g.edge_count());
            assert_eq!(g.degrees(), seq.degrees);
        }
    }

    struct Stubborn;
    impl HalfEdgePicker for Stubborn {
        fn pick(&mut self, _: &UnmatchedHalfEdges<'_>, _: &mut RandomStream) -> u32 {
            0
        }
    }

    #[test]
    fn picker_returning_matched_is_an_error() {
        let mut rng = stream(4);
        let r = cutoff_line_matching(&DegreeSequence::new(vec![1, 1, 1, 1]), &mut Stubborn, &mut rng);
        assert!(matches!(r, Err(GraphError::PickerReturnedMatched(0))));
    }
}
