use std::collections::VecDeque;

use rand::Rng;

use super::MultiGraph;
use crate::rng::RandomStream;

/// All vertices within graph distance `radius` of `seeds` (seeds included),
/// sorted ascending.
pub fn neighborhood(g: &MultiGraph, seeds: &[usize], radius: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.vertex_count()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if dist[s] == usize::MAX {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if dist[v] == radius {
            continue;
        }
        for w in g.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist.iter().enumerate().filter(|(_, d)| **d != usize::MAX).map(|(v, _)| v).collect()
}

/// Order in which peeling candidates are processed.
pub enum PeelOrder<'a> {
    /// First in, first out.
    Fifo,
    /// Candidates are drawn uniformly at random among the pending ones.
    Random(&'a mut RandomStream),
}

/// Generic peeling to a fixpoint: repeatedly removes an alive vertex whose
/// `degree` is below `threshold`; `on_remove(v, degree)` must decrement the
/// degrees of the surviving vertices that lose a contribution from `v`.
/// Returns the removal order.
pub(crate) fn peel(
    alive: &mut [bool],
    degree: &mut [f64],
    threshold: f64,
    mut order: PeelOrder<'_>,
    mut neighbors_of: impl FnMut(usize, &mut Vec<usize>),
) -> Vec<usize> {
    let n = alive.len();
    let mut queued = vec![false; n];
    let mut pending: Vec<usize> = Vec::new();
    for v in 0..n {
        if alive[v] && degree[v] < threshold {
            queued[v] = true;
            pending.push(v);
        }
    }
    let mut removed = Vec::new();
    let mut head = 0;
    let mut buf = Vec::new();
    loop {
        let v = match &mut order {
            PeelOrder::Fifo => {
                if head == pending.len() {
                    break;
                }
                head += 1;
                pending[head - 1]
            }
            PeelOrder::Random(rng) => {
                if pending.is_empty() {
                    break;
                }
                let i = rng.random_range(0..pending.len());
                pending.swap_remove(i)
            }
        };
        alive[v] = false;
        removed.push(v);
        buf.clear();
        neighbors_of(v, &mut buf);
        for &w in &buf {
            if w != v && alive[w] {
                degree[w] -= 1.0;
                if degree[w] < threshold && !queued[w] {
                    queued[w] = true;
                    pending.push(w);
                }
            }
        }
    }
    removed
}

/// The maximal induced subgraph in which every vertex has degree at least
/// `k` (self-loops count 2), found by iterative peeling. Sorted ascending.
pub fn k_core(g: &MultiGraph, k: usize) -> Vec<usize> {
    k_core_with_order(g, k, PeelOrder::Fifo)
}

pub fn k_core_with_order(g: &MultiGraph, k: usize, order: PeelOrder<'_>) -> Vec<usize> {
    let n = g.vertex_count();
    let mut alive = vec![true; n];
    let mut degree: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
    peel(&mut alive, &mut degree, k as f64, order, |v, out| out.extend(g.neighbors(v)));
    (0..n).filter(|&v| alive[v]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DegreePmf;
    use crate::graphs::configuration_model;
    use crate::rng::stream;
    use proptest::prelude::*;

    /// Plain BFS distances from scratch, written without the shared helpers.
    fn ball_oracle(g: &MultiGraph, seeds: &[usize], r: usize) -> Vec<usize> {
        let n = g.vertex_count();
        let mut inside = vec![false; n];
        for &s in seeds {
            inside[s] = true;
        }
        for _ in 0..r {
            let snapshot = inside.clone();
            for (u, v) in g.edges() {
                if snapshot[u] {
                    inside[v] = true;
                }
                if snapshot[v] {
                    inside[u] = true;
                }
            }
        }
        (0..n).filter(|&v| inside[v]).collect()
    }

    #[test]
    fn neighborhood_examples() {
        let k5 = MultiGraph::complete(5);
        assert_eq!(neighborhood(&k5, &[2], 0), vec![2]);
        assert_eq!(neighborhood(&k5, &[0], 1), vec![0, 1, 2, 3, 4]);
        let p3 = MultiGraph::path(3);
        assert_eq!(neighborhood(&p3, &[0], 1), vec![0, 1]);
        assert_eq!(neighborhood(&p3, &[], 3), Vec::<usize>::new());
        // loops and parallel edges do not shorten distances
        let g = MultiGraph::from_edges(3, &[(0, 0), (0, 1), (0, 1), (1, 2)]).unwrap();
        assert_eq!(neighborhood(&g, &[0], 1), vec![0, 1]);
    }

    #[test]
    fn k_core_examples() {
        assert_eq!(k_core(&MultiGraph::cycle(5), 2), vec![0, 1, 2, 3, 4]);
        assert!(k_core(&MultiGraph::path(3), 2).is_empty());
        let mut edges = Vec::new();
        for u in 0..5 {
            for v in u + 1..5 {
                if (u, v) != (0, 1) {
                    edges.push((u, v));
                }
            }
        }
        let g = MultiGraph::from_edges(5, &edges).unwrap();
        // 0 and 1 go first, then 2, 3, 4 are left with degree 2
        assert!(k_core(&g, 4).is_empty());
        assert_eq!(k_core(&g, 3).len(), 5);
        assert_eq!(k_core(&g, 0).len(), 5);
    }

    #[test]
    fn k_core_independent_of_peel_order() {
        let mut rng = stream(8);
        let mu = DegreePmf::poisson(3.5).unwrap();
        for i in 0..100 {
            let (g, _) = configuration_model(60, &mu, &mut rng);
            let k = 2 + i % 3;
            let fifo = k_core(&g, k);
            let mut r = stream(1000 + i as u64);
            let random = k_core_with_order(&g, k, PeelOrder::Random(&mut r));
            assert_eq!(fifo, random);
            for &v in &fifo {
                let inside = g.neighbors(v).filter(|w| fifo.binary_search(w).is_ok()).count();
                assert!(inside >= k);
            }
        }
    }

    proptest! {
        #[test]
        fn neighborhood_properties(seed in 0u64..500, r1 in 0usize..3, r2 in 0usize..3) {
            let mut rng = stream(seed);
            let (g, _) = configuration_model(40, &DegreePmf::poisson(2.5).unwrap(), &mut rng);
            let a = vec![(seed % 40) as usize, ((seed / 7) % 40) as usize];
            let composed = neighborhood(&g, &neighborhood(&g, &a, r1), r2);
            prop_assert_eq!(&composed, &neighborhood(&g, &a, r1 + r2));
            prop_assert_eq!(neighborhood(&g, &a, r1 + 1), ball_oracle(&g, &a, r1 + 1));
            let small = neighborhood(&g, &a[..1], r1);
            let big = neighborhood(&g, &a, r1 + 1);
            prop_assert!(small.iter().all(|v| big.binary_search(v).is_ok()));
        }
    }
}
