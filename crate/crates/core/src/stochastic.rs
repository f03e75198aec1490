//! Mean-payoff values of random-turn games by Hoffman–Karp strategy
//! iteration, and the potentials/strengths derived from them.

use crate::chain::{Chain, Evaluation};
use crate::graph::GameGraph;
use crate::num::{fmt_q, Q};
use crate::random_turn::{build_random_turn, BudgetRatio, Owner, StochasticGame};
use crate::scc::is_strongly_connected;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

/// Strategy-iteration rounds allowed before declaring a solver bug.
pub const ITERATION_CAP: usize = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("NonConvergence: no fixed point after {0} strategy-iteration rounds")]
    NonConvergence(usize),
    #[error("NotStronglyConnected: the game graph has more than one SCC")]
    NotStronglyConnected,
    #[error("ratio must lie strictly between 0 and 1 for potentials")]
    DegenerateRatio,
    #[error("potential invariant failed at vertex {0}")]
    PotentialCheck(String),
    #[error("strongly connected game has unequal vertex values")]
    UnequalValues,
}

/// Positional choices indexed by original vertex; entries are original successors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyPair {
    pub max: Vec<usize>,
    pub min: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SgSolution {
    /// Value of every node of the stochastic game, indexed like `StochasticGame::nodes`.
    pub node_values: Vec<Q>,
    /// Value of the nature copy of each original vertex.
    pub values: Vec<Q>,
    pub bias: Vec<Q>,
    pub strategies: StrategyPair,
    pub rounds: usize,
}

/// The compact chain of a random-turn game: one state per original vertex,
/// moving to Max's choice with probability r and Min's otherwise.
pub fn compact_chain(graph: &GameGraph, r: &Q, pair: &StrategyPair) -> Chain {
    let one_minus = Q::one() - r;
    let trans = (0..graph.len())
        .map(|v| {
            let (a, b) = (pair.max[v], pair.min[v]);
            if a == b {
                vec![(a, Q::one())]
            } else {
                [(a, r.clone()), (b, one_minus.clone())].into_iter().filter(|(_, p)| !p.is_zero()).collect()
            }
        })
        .collect();
    Chain { trans, reward: graph.weights().to_vec() }
}

pub fn evaluate_pair(graph: &GameGraph, r: &Q, pair: &StrategyPair) -> Evaluation {
    compact_chain(graph, r, pair).evaluate()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Sense {
    Max,
    Min,
}

/// Switches a choice only on strict lexicographic (gain, bias) improvement;
/// candidates are scanned in canonical order so ties keep the smaller id.
fn improve(graph: &GameGraph, choice: &mut [usize], ev: &Evaluation, sense: Sense) -> bool {
    let better = |a: usize, b: usize| -> bool {
        let key = |t: usize| (&ev.gain[t], &ev.bias[t]);
        match sense {
            Sense::Max => key(a) > key(b),
            Sense::Min => key(a) < key(b),
        }
    };
    let mut changed = false;
    for v in 0..graph.len() {
        let mut best = choice[v];
        for &t in graph.succ(v) {
            if better(t, best) {
                best = t;
            }
        }
        if best != choice[v] {
            choice[v] = best;
            changed = true;
        }
    }
    changed
}

fn graph_of(sg: &StochasticGame) -> GameGraph {
    let n = sg.n;
    let vertices = (0..n)
        .map(|v| {
            let node = &sg.nodes[sg.nature_node(v)];
            crate::graph::VertexSpec::new(format!("{v:08}"), node.weight.clone())
        })
        .collect();
    let edges = (0..n)
        .flat_map(|v| sg.nodes[sg.max_node(v)].succ.iter().map(move |&u| (v, sg.nodes[u].origin)))
        .map(|(a, b)| (format!("{a:08}"), format!("{b:08}")))
        .collect();
    GameGraph::new(vertices, edges).expect("random-turn game mirrors a valid graph")
}

/// Solves RT^r(G) given as an explicit stochastic game.
pub fn solve_stochastic_mp(sg: &StochasticGame) -> Result<SgSolution, SolverError> {
    debug_assert!(sg.nodes.iter().all(|n| n.owner != Owner::Nature || n.probs.iter().sum::<Q>().is_one()));
    let graph = graph_of(sg);
    solve_on_graph(&graph, sg.ratio.value()).map(|mut s| {
        s.node_values = (0..3 * sg.n)
            .map(|i| {
                let node = &sg.nodes[i];
                match node.owner {
                    Owner::Nature => s.values[node.origin].clone(),
                    Owner::Max => s.values[s.strategies.max[node.origin]].clone(),
                    Owner::Min => s.values[s.strategies.min[node.origin]].clone(),
                }
            })
            .collect();
        s
    })
}

/// Solves RT^r(G) directly on the arena.
pub fn solve_game(graph: &GameGraph, r: &BudgetRatio) -> Result<SgSolution, SolverError> {
    solve_stochastic_mp(&build_random_turn(graph, r))
}

fn solve_on_graph(graph: &GameGraph, r: &Q) -> Result<SgSolution, SolverError> {
    let first: Vec<usize> = (0..graph.len()).map(|v| graph.succ(v)[0]).collect();
    let mut pair = StrategyPair { max: first.clone(), min: first };
    let mut rounds = 0;
    loop {
        // Max's best response to the current Min strategy
        let mut ev;
        let mut inner = 0;
        loop {
            ev = evaluate_pair(graph, r, &pair);
            rounds += 1;
            inner += 1;
            if inner > ITERATION_CAP || rounds > ITERATION_CAP {
                return Err(SolverError::NonConvergence(rounds));
            }
            if !improve(graph, &mut pair.max, &ev, Sense::Max) {
                break;
            }
        }
        if !improve(graph, &mut pair.min, &ev, Sense::Min) {
            return Ok(SgSolution {
                node_values: Vec::new(),
                values: ev.gain,
                bias: ev.bias,
                strategies: pair,
                rounds,
            });
        }
    }
}

/// Value of a strongly connected game at ratio r.
pub fn scc_value(graph: &GameGraph, r: &Q) -> Result<Q, SolverError> {
    let sol = solve_on_graph(graph, r)?;
    let v = sol.values[0].clone();
    if sol.values.iter().any(|x| *x != v) {
        return Err(SolverError::UnequalValues);
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable {
    pub ids: Vec<String>,
    pub ratio: Q,
    pub nu: Q,
    /// MP(RT^r(G)) of the original weights; the shifted game has value 0.
    pub value: Q,
    pub pot: Vec<Q>,
    pub strength: Vec<Q>,
    pub normalized: Vec<Q>,
    pub max_strength: Q,
    pub spread: Q,
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
}

#[derive(Serialize)]
struct PotentialJson {
    ratio: String,
    nu: String,
    value: String,
    shifted_value: String,
    max_strength: String,
    spread: String,
    pot: BTreeMap<String, String>,
    strength: BTreeMap<String, String>,
    normalized: BTreeMap<String, String>,
    witnesses: BTreeMap<String, [String; 2]>,
}

impl PotentialTable {
    pub fn to_json(&self) -> String {
        let m = |xs: &[Q]| self.ids.iter().cloned().zip(xs.iter().map(fmt_q)).collect();
        let j = PotentialJson {
            ratio: fmt_q(&self.ratio),
            nu: fmt_q(&self.nu),
            value: fmt_q(&self.value),
            shifted_value: "0".into(),
            max_strength: fmt_q(&self.max_strength),
            spread: fmt_q(&self.spread),
            pot: m(&self.pot),
            strength: m(&self.strength),
            normalized: m(&self.normalized),
            witnesses: (0..self.ids.len())
                .map(|v| (self.ids[v].clone(), [self.ids[self.plus[v]].clone(), self.ids[self.minus[v]].clone()]))
                .collect(),
        };
        serde_json::to_string_pretty(&j).expect("serializable") + "\n"
    }

    /// Residual of the potential equation at `v` under weights `w`, exactly.
    pub fn residual(&self, graph: &GameGraph, v: usize) -> Q {
        let rhs = (&self.nu * &self.pot[self.plus[v]] + &self.pot[self.minus[v]]) / (&self.nu + Q::one())
            + graph.weight(v)
            - &self.value;
        &self.pot[v] - rhs
    }
}

/// Potentials, strengths and normalised strengths of a strongly connected game.
pub fn potentials(graph: &GameGraph, r: &BudgetRatio) -> Result<PotentialTable, SolverError> {
    if !is_strongly_connected(graph) {
        return Err(SolverError::NotStronglyConnected);
    }
    let nu = match r.nu() {
        Some(nu) if !nu.is_zero() => nu,
        _ => return Err(SolverError::DegenerateRatio),
    };
    let sol = solve_on_graph(graph, r.value())?;
    let value = sol.values[0].clone();
    if sol.values.iter().any(|x| *x != value) {
        return Err(SolverError::UnequalValues);
    }
    let lowest = sol.bias.iter().min().expect("nonempty").clone();
    let pot: Vec<Q> = sol.bias.iter().map(|h| h - &lowest).collect();
    let n = graph.len();
    let mut plus = vec![0; n];
    let mut minus = vec![0; n];
    for v in 0..n {
        let succ = graph.succ(v);
        let (mut hi, mut lo) = (succ[0], succ[0]);
        for &u in succ {
            if pot[u] > pot[hi] {
                hi = u;
            }
            if pot[u] < pot[lo] {
                lo = u;
            }
        }
        plus[v] = hi;
        minus[v] = lo;
    }
    let one_nu = &nu + Q::one();
    let strength: Vec<Q> = (0..n).map(|v| (&pot[plus[v]] - &pot[minus[v]]) / &one_nu).collect();
    let max_strength = strength.iter().max().expect("nonempty").clone();
    let normalized = strength
        .iter()
        .map(|s| if max_strength.is_zero() { Q::zero() } else { s / &max_strength })
        .collect();
    let spread = pot.iter().max().expect("nonempty").clone();
    let table = PotentialTable {
        ids: graph.ids().to_vec(),
        ratio: r.value().clone(),
        nu,
        value,
        pot,
        strength,
        normalized,
        max_strength,
        spread,
        plus,
        minus,
    };
    for v in 0..n {
        if !table.residual(graph, v).is_zero() {
            return Err(SolverError::PotentialCheck(graph.id(v).to_string()));
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::num::{q, qf};

    fn ratio(n: i64, d: i64) -> BudgetRatio {
        BudgetRatio::new(qf(n, d)).unwrap()
    }

    #[test]
    fn loops_values() {
        let g = fixtures::loops();
        let s = solve_game(&g, &ratio(1, 2)).unwrap();
        assert!(s.node_values.iter().all(|v| *v == q(0)));
        let s = solve_game(&g, &ratio(1, 3)).unwrap();
        assert!(s.node_values.iter().all(|v| *v == qf(-1, 3)));
        for (n, d) in [(0, 1), (1, 4), (3, 4), (1, 1)] {
            let v = scc_value(&g, &qf(n, d)).unwrap();
            assert_eq!(v, qf(2 * n - d, d));
        }
    }

    #[test]
    fn loops_potentials_half() {
        let t = potentials(&fixtures::loops(), &ratio(1, 2)).unwrap();
        assert_eq!(t.value, q(0));
        assert_eq!(t.pot, vec![q(2), q(0)]);
        assert_eq!(t.strength, vec![q(1), q(1)]);
        assert_eq!(t.normalized, vec![q(1), q(1)]);
        assert_eq!(t.plus, vec![0, 0]);
        assert_eq!(t.minus, vec![1, 1]);
    }

    #[test]
    fn loops_potentials_third() {
        let t = potentials(&fixtures::loops(), &ratio(1, 3)).unwrap();
        assert_eq!(t.value, qf(-1, 3));
        assert_eq!(t.strength[0], t.strength[1]);
        assert_eq!(t.strength[0], qf(4, 3));
    }

    #[test]
    fn selfloop_has_flat_potentials() {
        let t = potentials(&fixtures::selfloop(q(5)), &ratio(9, 10)).unwrap();
        assert_eq!(t.value, q(5));
        assert_eq!(t.pot, vec![q(0)]);
        assert_eq!(t.strength, vec![q(0)]);
        assert_eq!(t.normalized, vec![q(0)]);
    }

    #[test]
    fn potentials_require_scc() {
        assert!(matches!(
            potentials(&fixtures::chain(), &ratio(1, 2)),
            Err(SolverError::NotStronglyConnected)
        ));
        assert!(matches!(potentials(&fixtures::loops(), &ratio(1, 1)), Err(SolverError::DegenerateRatio)));
    }

    #[test]
    fn non_scc_game_has_per_vertex_values() {
        let g = fixtures::mp_two_bscc();
        let s = solve_game(&g, &ratio(1, 2)).unwrap();
        let a1 = g.vertex("a1").unwrap();
        let n = g.vertex("n").unwrap();
        assert_eq!(s.values[a1], q(0));
        assert_eq!(s.values[n], q(-1));
    }
}
