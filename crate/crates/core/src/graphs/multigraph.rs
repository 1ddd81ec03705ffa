use std::fmt::Write as _;

use super::GraphError;

/// Static undirected multigraph built from matched half-edges.
///
/// Half-edges of vertex `v` are the contiguous ids `offsets[v]..offsets[v+1]`.
/// `matching` is a fixed-point-free involution on half-edge ids. Self-loops
/// (two half-edges of one vertex matched together) count 2 toward the degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    offsets: Vec<u32>,
    owner: Vec<u32>,
    matching: Vec<u32>,
}

impl MultiGraph {
    /// Builds a graph from per-vertex degrees and a matching over the
    /// half-edges laid out contiguously by vertex.
    pub fn from_matching(degrees: &[u32], matching: Vec<u32>) -> Result<Self, GraphError> {
        let mut offsets = Vec::with_capacity(degrees.len() + 1);
        let mut owner = Vec::with_capacity(matching.len());
        offsets.push(0u32);
        for (v, &d) in degrees.iter().enumerate() {
            owner.extend(std::iter::repeat_n(v as u32, d as usize));
            offsets.push(owner.len() as u32);
        }
        if owner.len() != matching.len() {
            return Err(GraphError::MatchingSize { half_edges: owner.len(), matching: matching.len() });
        }
        let g = Self { offsets, owner, matching };
        g.check_involution()?;
        Ok(g)
    }

    /// Builds a graph from an edge list. Half-edge slots of each vertex are
    /// assigned in edge-list order; `(u, u)` is a self-loop.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut degrees = vec![0u32; n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: u.max(v), n });
            }
            degrees[u] += 1;
            degrees[v] += 1;
        }
        let mut next: Vec<u32> = Vec::with_capacity(n);
        let mut acc = 0u32;
        for &d in &degrees {
            next.push(acc);
            acc += d;
        }
        let mut matching = vec![0u32; acc as usize];
        for &(u, v) in edges {
            let hu = next[u];
            next[u] += 1;
            let hv = next[v];
            next[v] += 1;
            matching[hu as usize] = hv;
            matching[hv as usize] = hu;
        }
        Self::from_matching(&degrees, matching)
    }

    fn check_involution(&self) -> Result<(), GraphError> {
        let h_count = self.matching.len();
        for (h, &p) in self.matching.iter().enumerate() {
            let p = p as usize;
            if p >= h_count || p == h || self.matching[p] as usize != h {
                return Err(GraphError::NotAnInvolution { half_edge: h });
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn half_edge_count(&self) -> usize {
        self.owner.len()
    }

    pub fn edge_count(&self) -> usize {
        self.owner.len() / 2
    }

    /// Half-edge ids of `v`.
    #[inline]
    pub fn half_edges(&self, v: usize) -> std::ops::Range<u32> {
        self.offsets[v]..self.offsets[v + 1]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        (self.offsets[v + 1] - self.offsets[v]) as usize
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Sum of all degrees (`2 × edge count`).
    pub fn total_degree(&self) -> usize {
        self.owner.len()
    }

    #[inline]
    pub fn owner(&self, h: u32) -> u32 {
        self.owner[h as usize]
    }

    #[inline]
    pub fn partner(&self, h: u32) -> u32 {
        self.matching[h as usize]
    }

    /// Neighbor reached through each half-edge of `v`, with multiplicity;
    /// a self-loop lists `v` twice.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.half_edges(v).map(move |h| self.owner[self.matching[h as usize] as usize] as usize)
    }

    /// Edges as `(u, v)` pairs with the lower half-edge id first.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.matching
            .iter()
            .enumerate()
            .filter(|(h, p)| (*h as u32) < **p)
            .map(move |(h, &p)| (self.owner[h] as usize, self.owner[p as usize] as usize))
    }

    /// Star with center 0 and leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (1..=leaves).map(|l| (0, l)).collect();
        Self::from_edges(leaves + 1, &edges).expect("star is valid")
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::from_edges(n, &edges).expect("path is valid")
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
        Self::from_edges(n, &edges).expect("cycle is valid")
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::from_edges(n, &edges).expect("complete graph is valid")
    }

    /// Line-oriented text: header `n m`, then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.vertex_count(), self.edge_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(GraphError::Parse { line: 1, message: "missing header".into() })?;
        let (n, m) = parse_pair(header, 1)?;
        let mut edges = Vec::with_capacity(m);
        for (i, line) in lines {
            edges.push(parse_pair(line, i + 1)?);
        }
        if edges.len() != m {
            return Err(GraphError::Parse { line: 1, message: format!("header announces {m} edges, found {}", edges.len()) });
        }
        Self::from_edges(n, &edges)
    }
}

fn parse_pair(line: &str, number: usize) -> Result<(usize, usize), GraphError> {
    let mut it = line.split_whitespace().map(|t| t.parse::<usize>());
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(GraphError::Parse { line: number, message: format!("expected two integers, got `{line}`") }),
    }
}

/// Degrees to be wired by a configuration-model matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    pub degrees: Vec<u32>,
    /// Vertex that received the corrective half-edge when the drawn sum was odd.
    pub parity_fixed: Option<usize>,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<u32>) -> Self {
        Self { degrees, parity_fixed: None }
    }

    pub fn total(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).sum()
    }

    pub fn is_even(&self) -> bool {
        self.total().is_multiple_of(2)
    }

    /// One integer per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.degrees.len() * 3);
        for d in &self.degrees {
            let _ = writeln!(out, "{d}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let degrees = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.trim().parse::<u32>().map_err(|e| GraphError::Parse { line: i + 1, message: e.to_string() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(degrees))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn self_loops_and_parallel_edges() {
        let g = MultiGraph::from_edges(2, &[(0, 0), (0, 1), (0, 1)]).unwrap();
        assert_eq!(g.degree(0), 4);
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.total_degree(), 2 * g.edge_count());
        let mut nb: Vec<_> = g.neighbors(0).collect();
        nb.sort();
        assert_eq!(nb, vec![0, 0, 1, 1]);
        assert_eq!(g.to_edge_list(), "2 3\n0 0\n0 1\n0 1\n");
    }

    #[test]
    fn involution_is_checked() {
        assert!(MultiGraph::from_matching(&[1, 1], vec![1, 0]).is_ok());
        assert!(matches!(MultiGraph::from_matching(&[2], vec![0, 1]), Err(GraphError::NotAnInvolution { .. })));
        assert!(matches!(MultiGraph::from_matching(&[1, 1, 1], vec![1, 2, 0]), Err(GraphError::NotAnInvolution { .. })));
        assert!(MultiGraph::from_matching(&[1], vec![0, 1]).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(MultiGraph::parse_edge_list("").is_err());
        assert!(MultiGraph::parse_edge_list("2 1\n0 5\n").is_err());
        assert!(MultiGraph::parse_edge_list("2 2\n0 1\n").is_err());
        assert!(MultiGraph::parse_edge_list("2 1\n0 x\n").is_err());
        assert!(DegreeSequence::parse("1\n-2\n").is_err());
    }

    proptest! {
        #[test]
        fn edge_list_text_is_a_fixed_point(n in 1usize..12, raw in prop::collection::vec((0usize..12, 0usize..12), 0..30)) {
            let edges: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
            let g = MultiGraph::from_edges(n, &edges).unwrap();
            let text = g.to_edge_list();
            let back = MultiGraph::parse_edge_list(&text).unwrap();
            prop_assert_eq!(back.to_edge_list(), text);
            prop_assert_eq!(back.degrees(), g.degrees());
            for v in 0..n {
                let mut a: Vec<_> = g.neighbors(v).collect();
                let mut b: Vec<_> = back.neighbors(v).collect();
                a.sort();
                b.sort();
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn degree_sequence_text_roundtrip(degrees in prop::collection::vec(0u32..1000, 0..50)) {
            let seq = DegreeSequence::new(degrees);
            let text = seq.to_text();
            let back = DegreeSequence::parse(&text).unwrap();
            prop_assert_eq!(back.to_text(), text);
            prop_assert_eq!(back.degrees, seq.degrees);
        }
    }
}
