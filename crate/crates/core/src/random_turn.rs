//! Budget ratios and the random-turn stochastic game RT^r(G).

use crate::graph::GameGraph;
use crate::num::{fmt_q, Q};
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BudgetRatio(Q);

#[derive(Debug, thiserror::Error)]
#[error("ratio {0} is outside [0, 1]")]
pub struct RatioOutOfRange(pub String);

impl BudgetRatio {
    pub fn new(r: Q) -> Result<Self, RatioOutOfRange> {
        if r < Q::zero() || r > Q::one() {
            Err(RatioOutOfRange(fmt_q(&r)))
        } else {
            Ok(BudgetRatio(r))
        }
    }

    /// Ratio with r = ν/(ν+1).
    pub fn from_nu(nu: &Q) -> Self {
        BudgetRatio(nu / (nu + Q::one()))
    }

    pub fn value(&self) -> &Q {
        &self.0
    }

    /// ν = r/(1−r); undefined at r = 1.
    pub fn nu(&self) -> Option<Q> {
        if self.0.is_one() {
            None
        } else {
            Some(&self.0 / (Q::one() - &self.0))
        }
    }

    pub fn complement(&self) -> BudgetRatio {
        BudgetRatio(Q::one() - &self.0)
    }
}

impl Serialize for BudgetRatio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(&self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Owner {
    Max,
    Min,
    Nature,
}

#[derive(Debug, Clone)]
pub struct SgNode {
    pub id: String,
    pub owner: Owner,
    pub weight: Q,
    pub succ: Vec<usize>,
    /// Probabilities aligned with `succ`; only nature nodes carry them.
    pub probs: Vec<Q>,
    /// The original vertex this node copies.
    pub origin: usize,
}

/// Node `v` of the original graph becomes `max(v) = v`, `min(v) = n + v`, `nature(v) = 2n + v`.
#[derive(Debug, Clone)]
pub struct StochasticGame {
    pub ratio: BudgetRatio,
    pub n: usize,
    pub nodes: Vec<SgNode>,
}

impl StochasticGame {
    pub fn max_node(&self, v: usize) -> usize {
        v
    }

    pub fn min_node(&self, v: usize) -> usize {
        self.n + v
    }

    pub fn nature_node(&self, v: usize) -> usize {
        2 * self.n + v
    }

    pub fn count(&self, owner: Owner) -> usize {
        self.nodes.iter().filter(|n| n.owner == owner).count()
    }
}

pub fn build_random_turn(graph: &GameGraph, r: &BudgetRatio) -> StochasticGame {
    let n = graph.len();
    let mut nodes = Vec::with_capacity(3 * n);
    for (owner, tag) in [(Owner::Max, "max"), (Owner::Min, "min")] {
        for v in 0..n {
            nodes.push(SgNode {
                id: format!("{}#{}", graph.id(v), tag),
                owner,
                weight: graph.weight(v).clone(),
                succ: graph.succ(v).iter().map(|&u| 2 * n + u).collect(),
                probs: Vec::new(),
                origin: v,
            });
        }
    }
    for v in 0..n {
        nodes.push(SgNode {
            id: format!("{}#nature", graph.id(v)),
            owner: Owner::Nature,
            weight: graph.weight(v).clone(),
            succ: vec![v, n + v],
            probs: vec![r.value().clone(), Q::one() - r.value()],
            origin: v,
        });
    }
    StochasticGame { ratio: r.clone(), n, nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::num::{q, qf};

    #[test]
    fn loops_split_has_six_nodes() {
        let sg = build_random_turn(&fixtures::loops(), &BudgetRatio::new(qf(1, 2)).unwrap());
        assert_eq!(sg.nodes.len(), 6);
        assert_eq!(sg.count(Owner::Nature), 2);
        for v in 0..2 {
            let nat = &sg.nodes[sg.nature_node(v)];
            assert_eq!(nat.probs, vec![qf(1, 2), qf(1, 2)]);
        }
    }

    #[test]
    fn ratio_one_always_picks_max() {
        let sg = build_random_turn(&fixtures::loops(), &BudgetRatio::new(q(1)).unwrap());
        let nat = &sg.nodes[sg.nature_node(0)];
        assert_eq!(nat.probs, vec![q(1), q(0)]);
        assert_eq!(nat.succ, vec![sg.max_node(0), sg.min_node(0)]);
    }

    #[test]
    fn two_thirds_probability() {
        let sg = build_random_turn(&fixtures::loops(), &BudgetRatio::new(qf(2, 3)).unwrap());
        assert_eq!(sg.nodes[sg.nature_node(1)].probs[0], qf(2, 3));
        assert_eq!(BudgetRatio::new(qf(2, 3)).unwrap().nu(), Some(q(2)));
    }

    #[test]
    fn split_mirrors_edges() {
        let g = fixtures::chain();
        let sg = build_random_turn(&g, &BudgetRatio::new(qf(1, 3)).unwrap());
        let player_edges: usize = sg.nodes.iter().filter(|n| n.owner != Owner::Nature).map(|n| n.succ.len()).sum();
        assert_eq!(player_edges, 2 * g.edge_count());
        for node in &sg.nodes {
            assert_eq!(&node.weight, g.weight(node.origin));
            if node.owner == Owner::Nature {
                assert_eq!(node.probs.iter().sum::<Q>(), q(1));
            }
        }
    }

    #[test]
    fn out_of_range_ratio_rejected() {
        assert!(BudgetRatio::new(q(2)).is_err());
        assert!(BudgetRatio::new(q(-1)).is_err());
    }
}
