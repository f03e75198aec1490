//! Small named games used by tests, the CLI and the demo.

use crate::graph::{GameGraph, VertexSpec};
use crate::num::{q, Q};

/// Two vertices, all four edges, weights +1 and −1.
pub fn loops() -> GameGraph {
    loops_weighted(q(1), q(-1))
}

pub fn loops_weighted(w1: Q, w2: Q) -> GameGraph {
    GameGraph::from_parts(
        &[("v1", w1), ("v2", w2)],
        &[("v1", "v1"), ("v1", "v2"), ("v2", "v1"), ("v2", "v2")],
    )
}

/// `u1 ← v1 ↔ v2 → u2` with self-loops on `u1` and `u2`.
pub fn chain() -> GameGraph {
    GameGraph::from_parts(
        &[("u1", q(0)), ("u2", q(0)), ("v1", q(0)), ("v2", q(0))],
        &[("u1", "u1"), ("u2", "u2"), ("v1", "u1"), ("v1", "v2"), ("v2", "v1"), ("v2", "u2")],
    )
}

pub fn selfloop(w: Q) -> GameGraph {
    GameGraph::from_parts(&[("s", w)], &[("s", "s")])
}

/// The chain with parity labels: `u1` odd (Player 1 wins), `u2` even.
pub fn parity_chain() -> GameGraph {
    GameGraph::new(
        vec![
            VertexSpec::new("u1", q(0)).with_parity(1),
            VertexSpec::new("u2", q(0)).with_parity(2),
            VertexSpec::new("v1", q(0)).with_parity(2),
            VertexSpec::new("v2", q(0)).with_parity(2),
        ],
        chain().edge_list(),
    )
    .expect("valid graph")
}

/// Strongly connected triangle whose maximal parity index is odd.
pub fn odd_scc() -> GameGraph {
    GameGraph::new(
        vec![
            VertexSpec::new("a", q(0)).with_parity(1),
            VertexSpec::new("b", q(0)).with_parity(2),
            VertexSpec::new("c", q(0)).with_parity(3),
        ],
        vec![
            ("a".into(), "b".into()),
            ("b".into(), "c".into()),
            ("c".into(), "a".into()),
            ("a".into(), "c".into()),
        ],
    )
    .expect("valid graph")
}

/// LOOPS (`a1`, `a2`) and an all-negative loop `n`, joined through `v1 ↔ v2`.
pub fn mp_two_bscc() -> GameGraph {
    GameGraph::from_parts(
        &[("a1", q(1)), ("a2", q(-1)), ("n", q(-1)), ("v1", q(0)), ("v2", q(0))],
        &[
            ("a1", "a1"),
            ("a1", "a2"),
            ("a2", "a1"),
            ("a2", "a2"),
            ("n", "n"),
            ("v1", "a1"),
            ("v1", "v2"),
            ("v2", "v1"),
            ("v2", "n"),
        ],
    )
}

/// Looks up a fixture by name.
pub fn by_name(name: &str) -> Option<GameGraph> {
    Some(match name {
        "loops" => loops(),
        "chain" => chain(),
        "selfloop5" => selfloop(q(5)),
        "parity-chain" => parity_chain(),
        "odd-scc" => odd_scc(),
        "mp-two-bscc" => mp_two_bscc(),
        _ => return None,
    })
}

pub const NAMES: &[&str] = &["loops", "chain", "selfloop5", "parity-chain", "odd-scc", "mp-two-bscc"];
