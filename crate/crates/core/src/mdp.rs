//! Out-degree-2 games as Markov decision processes, solved by average-reward
//! policy iteration.

use crate::chain::{Chain, Evaluation};
use crate::graph::GameGraph;
use crate::num::{qf, Q};
use crate::random_turn::BudgetRatio;
use crate::stochastic::{SolverError, ITERATION_CAP};
use num_traits::One;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdpSense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone)]
pub struct ControlledState {
    pub id: String,
    pub weight: Q,
    /// Indices into `MdpModel::nature`.
    pub actions: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct NatureState {
    pub id: String,
    pub weight: Q,
    /// `(controlled state, probability)` pairs summing to one.
    pub dist: Vec<(usize, Q)>,
}

#[derive(Debug, Clone)]
pub struct MdpModel {
    pub sense: MdpSense,
    pub controlled: Vec<ControlledState>,
    pub nature: Vec<NatureState>,
}

#[derive(Debug, thiserror::Error)]
pub enum MdpError {
    #[error("OutDegreeNotTwo: vertex {0}")]
    OutDegreeNotTwo(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Splits every vertex `v` with successors `u1 < u2` into a controlled state
/// and two nature states: `v_1` favours `u1` with probability r, `v_2` with 1−r.
pub fn build_outdeg2_mdp(graph: &GameGraph, r: &BudgetRatio) -> Result<MdpModel, MdpError> {
    let r = r.value();
    let one_minus = Q::one() - r;
    let mut controlled = Vec::new();
    let mut nature = Vec::new();
    for v in 0..graph.len() {
        let succ = graph.succ(v);
        if succ.len() != 2 {
            return Err(MdpError::OutDegreeNotTwo(graph.id(v).to_string()));
        }
        let (u1, u2) = (succ[0], succ[1]);
        let base = nature.len();
        for (tag, p) in [("1", r.clone()), ("2", one_minus.clone())] {
            let q = Q::one() - &p;
            nature.push(NatureState {
                id: format!("{}_{}", graph.id(v), tag),
                weight: graph.weight(v).clone(),
                dist: vec![(u1, p), (u2, q)],
            });
        }
        controlled.push(ControlledState {
            id: graph.id(v).to_string(),
            weight: graph.weight(v).clone(),
            actions: vec![base, base + 1],
        });
    }
    let sense = if *r >= qf(1, 2) { MdpSense::Maximize } else { MdpSense::Minimize };
    Ok(MdpModel { sense, controlled, nature })
}

#[derive(Debug, Clone)]
pub struct MdpSolution {
    /// Optimal gain of each controlled state.
    pub values: Vec<Q>,
    /// Chosen action (index into the state's `actions`) per controlled state.
    pub policy: Vec<usize>,
    pub rounds: usize,
}

impl MdpModel {
    fn sign(&self) -> Q {
        match self.sense {
            MdpSense::Maximize => Q::one(),
            MdpSense::Minimize => -Q::one(),
        }
    }

    /// Reward of a controlled step through nature state `a`, in maximisation form.
    fn reward(&self, s: usize, a: usize) -> Q {
        self.sign() * (&self.controlled[s].weight + &self.nature[a].weight) / Q::from_integer(2.into())
    }

    fn chain(&self, policy: &[usize]) -> Chain {
        let trans = policy
            .iter()
            .enumerate()
            .map(|(s, &k)| {
                let a = self.controlled[s].actions[k];
                let mut row: Vec<(usize, Q)> = Vec::new();
                for (t, p) in &self.nature[a].dist {
                    if num_traits::Zero::is_zero(p) {
                        continue;
                    }
                    match row.iter_mut().find(|(u, _)| u == t) {
                        Some(e) => e.1 += p,
                        None => row.push((*t, p.clone())),
                    }
                }
                row
            })
            .collect();
        let reward = policy.iter().enumerate().map(|(s, &k)| self.reward(s, self.controlled[s].actions[k])).collect();
        Chain { trans, reward }
    }

    fn action_key(&self, s: usize, a: usize, ev: &Evaluation) -> (Q, Q) {
        let dist = &self.nature[a].dist;
        let g: Q = dist.iter().map(|(t, p)| p * &ev.gain[*t]).sum();
        let h: Q = self.reward(s, a) + dist.iter().map(|(t, p)| p * &ev.bias[*t]).sum::<Q>();
        (g, h)
    }
}

pub fn solve_mdp_mp(mdp: &MdpModel) -> Result<MdpSolution, SolverError> {
    let n = mdp.controlled.len();
    let mut policy = vec![0usize; n];
    for rounds in 1..=ITERATION_CAP {
        let ev = mdp.chain(&policy).evaluate();
        let mut changed = false;
        for s in 0..n {
            let actions = &mdp.controlled[s].actions;
            let mut best = policy[s];
            let mut best_key = mdp.action_key(s, actions[best], &ev);
            for (k, &a) in actions.iter().enumerate() {
                let key = mdp.action_key(s, a, &ev);
                if key > best_key {
                    best = k;
                    best_key = key;
                }
            }
            if best != policy[s] {
                policy[s] = best;
                changed = true;
            }
        }
        if !changed {
            let sign = mdp.sign();
            return Ok(MdpSolution { values: ev.gain.iter().map(|g| g * &sign).collect(), policy, rounds });
        }
    }
    Err(SolverError::NonConvergence(ITERATION_CAP))
}
