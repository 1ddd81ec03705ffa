//! Independent reference implementations shared by the integration tests and
//! the acceptance runner. None of these reuse the library's engine, heap or
//! certifier code paths.

#![allow(dead_code)]

use rand::Rng;
use rand_distr::Exp1;

use sirs_core::graphs::MultiGraph;
use sirs_core::rng::RandomStream;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum State {
    S,
    I,
    R,
}

/// Extinction time of the SIRS chain from the all-infected state, simulated
/// by uniformization: proposals arrive at a constant total rate and each is
/// accepted with probability `actual rate / bound` for the proposed vertex.
/// Returns `None` if still alive at `horizon`.
pub fn uniformized_extinction(g: &MultiGraph, lambda: f64, alpha: f64, horizon: f64, rng: &mut RandomStream) -> Option<f64> {
    let n = g.vertex_count();
    let adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).filter(|&w| w != v).collect()).collect();
    let bound: Vec<f64> = adj.iter().map(|a| 1f64.max(alpha) + lambda * a.len() as f64).collect();
    let total: f64 = bound.iter().sum();
    let mut state = vec![State::I; n];
    let mut infected = n;
    let mut t = 0.0;
    while infected > 0 {
        let dt: f64 = rng.sample(Exp1);
        t += dt / total;
        if t > horizon {
            return None;
        }
        let mut u = rng.random::<f64>() * total;
        let mut v = 0;
        while v + 1 < n && u >= bound[v] {
            u -= bound[v];
            v += 1;
        }
        let rate = match state[v] {
            State::I => 1.0,
            State::R => alpha,
            State::S => lambda * adj[v].iter().filter(|&&w| state[w] == State::I).count() as f64,
        };
        if rng.random::<f64>() * bound[v] < rate {
            state[v] = match state[v] {
                State::I => {
                    infected -= 1;
                    State::R
                }
                State::R => State::S,
                State::S => {
                    infected += 1;
                    State::I
                }
            };
        }
    }
    Some(t)
}

/// All perfect matchings of half-edges `0..h`, each as a partner vector.
pub fn all_matchings(h: usize) -> Vec<Vec<u32>> {
    fn rec(partner: &mut Vec<Option<u32>>, out: &mut Vec<Vec<u32>>) {
        let Some(first) = partner.iter().position(|p| p.is_none()) else {
            out.push(partner.iter().map(|p| p.unwrap()).collect());
            return;
        };
        for second in first + 1..partner.len() {
            if partner[second].is_none() {
                partner[first] = Some(second as u32);
                partner[second] = Some(first as u32);
                rec(partner, out);
                partner[first] = None;
                partner[second] = None;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![None; h], &mut out);
    out
}

pub fn partner_vector(g: &MultiGraph) -> Vec<u32> {
    (0..g.half_edge_count() as u32).map(|h| g.partner(h)).collect()
}

/// Expansion check by plain subset enumeration over an adjacency matrix.
/// Returns the violating sets (as sorted vertex lists).
pub fn brute_force_violations(g: &MultiGraph, w0: &[usize], beta: f64, radius: usize, factor: f64) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut adj = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    // dist[u][v] <= radius via repeated relaxation.
    let mut within = vec![vec![false; n]; n];
    for (u, row) in within.iter_mut().enumerate() {
        row[u] = true;
    }
    for _ in 0..radius {
        let prev = within.clone();
        for u in 0..n {
            for v in 0..n {
                if prev[u][v] {
                    for w in 0..n {
                        if adj[v][w] {
                            within[u][w] = true;
                        }
                    }
                }
            }
        }
    }
    let k = w0.len();
    let max = (beta * k as f64 + 1e-12).floor() as usize;
    let mut bad = Vec::new();
    for mask in 1u32..(1u32 << k) {
        let size = mask.count_ones() as usize;
        if size > max {
            continue;
        }
        let a: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| w0[i]).collect();
        let covered = w0.iter().filter(|&&x| a.iter().any(|&y| within[y][x])).count();
        if (covered as f64) < factor * size as f64 {
            let mut s = a.clone();
            s.sort_unstable();
            bad.push(s);
        }
    }
    bad
}
