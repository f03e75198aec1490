//! Seeded random game generators for property sweeps and benchmarks.

use crate::graph::{GameGraph, VertexSpec};
use crate::num::{q, Q};
use crate::random_turn::BudgetRatio;
use crate::stochastic::scc_value;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn vid(i: usize) -> String {
    format!("v{i:02}")
}

fn assemble(weights: Vec<Q>, parities: Option<Vec<u32>>, edges: BTreeSet<(usize, usize)>) -> GameGraph {
    let specs = weights
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            let s = VertexSpec::new(vid(i), w);
            match &parities {
                Some(p) => s.with_parity(p[i]),
                None => s,
            }
        })
        .collect();
    let edges = edges.into_iter().map(|(a, b)| (vid(a), vid(b))).collect();
    GameGraph::new(specs, edges).expect("generated graph is well formed")
}

fn int_weights(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> Vec<Q> {
    (0..n).map(|_| q(rng.gen_range(lo..=hi))).collect()
}

/// Strongly connected game: a Hamiltonian cycle over a random permutation
/// plus `extra` random edges, integer weights in [lo, hi].
pub fn random_scc(rng: &mut ChaCha8Rng, n: usize, extra: usize, lo: i64, hi: i64) -> GameGraph {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges = BTreeSet::new();
    for i in 0..n {
        edges.insert((perm[i], perm[(i + 1) % n]));
    }
    for _ in 0..extra {
        edges.insert((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    assemble(int_weights(rng, n, lo, hi), None, edges)
}

/// Strongly connected game where every vertex has exactly two successors.
/// Needs n ≥ 2.
pub fn random_outdeg2_scc(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> GameGraph {
    assert!(n >= 2, "out-degree 2 needs two vertices");
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges = BTreeSet::new();
    for i in 0..n {
        let (a, b) = (perm[i], perm[(i + 1) % n]);
        edges.insert((a, b));
        let mut c = rng.gen_range(0..n);
        while c == b {
            c = rng.gen_range(0..n);
        }
        edges.insert((a, c));
    }
    assemble(int_weights(rng, n, lo, hi), None, edges)
}

/// A strongly connected game shifted so that its random-turn value at the
/// returned design ratio is exactly 0.
pub fn random_value_zero_scc(rng: &mut ChaCha8Rng, n: usize) -> (GameGraph, BudgetRatio) {
    let extra = rng.gen_range(0..=n);
    let g = random_scc(rng, n, extra, -5, 5);
    let design = BudgetRatio::new(Q::new(rng.gen_range(3..=7).into(), 10.into())).expect("inside (0,1)");
    let value = scc_value(&g, design.value()).expect("strongly connected");
    (g.shifted(&value), design)
}

/// Double-reachability game on `n` vertices (n ≥ 3): `t1` and `t2` are
/// absorbing and every other vertex has 1–3 successors and a path to one of
/// them.
pub fn random_double_reach(rng: &mut ChaCha8Rng, n: usize) -> (GameGraph, usize, usize) {
    assert!(n >= 3, "two targets and at least one interior vertex");
    let (t1, t2) = (0, 1);
    let mut edges = BTreeSet::new();
    edges.insert((t1, t1));
    edges.insert((t2, t2));
    for v in 2..n {
        // an edge to a lower index guarantees a path to a target
        edges.insert((v, rng.gen_range(0..v)));
        for _ in 0..rng.gen_range(0..=2) {
            edges.insert((v, rng.gen_range(0..n)));
        }
    }
    (assemble(vec![q(0); n], None, edges), t1, t2)
}

/// Parity game with priorities in 1..=max_priority and 1–3 successors per vertex.
pub fn random_parity(rng: &mut ChaCha8Rng, n: usize, max_priority: u32) -> GameGraph {
    let mut edges = BTreeSet::new();
    for v in 0..n {
        for _ in 0..rng.gen_range(1..=3) {
            edges.insert((v, rng.gen_range(0..n)));
        }
    }
    let parities = (0..n).map(|_| rng.gen_range(1..=max_priority)).collect();
    assemble(vec![q(0); n], Some(parities), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scc::is_strongly_connected;

    #[test]
    fn generators_are_deterministic() {
        let a = random_scc(&mut rng(7), 6, 4, -5, 5);
        let b = random_scc(&mut rng(7), 6, 4, -5, 5);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn shapes() {
        let mut r = rng(1);
        for n in 2..10 {
            let g = random_outdeg2_scc(&mut r, n, -5, 5);
            assert!(is_strongly_connected(&g));
            assert!((0..n).all(|v| g.succ(v).len() == 2));
            let g = random_scc(&mut r, n, n, -3, 3);
            assert!(is_strongly_connected(&g));
        }
        let (g, d) = random_value_zero_scc(&mut r, 5);
        assert_eq!(scc_value(&g, d.value()).unwrap(), q(0));
    }
}
