//! Gain and bias of a finite Markov reward chain (multichain formulation).

use crate::linalg::solve;
use crate::num::Q;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

#[derive(Debug, Clone)]
pub struct Chain {
    /// Sparse rows: `(successor, probability)`; each row sums to one.
    pub trans: Vec<Vec<(usize, Q)>>,
    pub reward: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub gain: Vec<Q>,
    /// Bias normalised so that the stationary mean of every recurrent class is zero.
    pub bias: Vec<Q>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.reward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reward.is_empty()
    }

    /// Closed communicating classes of the support graph, each sorted.
    pub fn recurrent_classes(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut g = DiGraph::<(), ()>::with_capacity(n, n * 2);
        let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
        for (s, row) in self.trans.iter().enumerate() {
            for (t, p) in row {
                if !p.is_zero() {
                    g.add_edge(nodes[s], nodes[*t], ());
                }
            }
        }
        let comps = tarjan_scc(&g);
        let mut comp = vec![0; n];
        for (i, c) in comps.iter().enumerate() {
            for v in c {
                comp[v.index()] = i;
            }
        }
        let mut out: Vec<Vec<usize>> = comps
            .iter()
            .enumerate()
            .filter(|(i, c)| {
                c.iter().all(|v| {
                    self.trans[v.index()].iter().all(|(t, p)| p.is_zero() || comp[*t] == *i)
                })
            })
            .map(|(_, c)| {
                let mut c: Vec<usize> = c.iter().map(|v| v.index()).collect();
                c.sort_unstable();
                c
            })
            .collect();
        out.sort_by_key(|c| c[0]);
        out
    }

    pub fn evaluate(&self) -> Evaluation {
        let n = self.len();
        let mut gain = vec![Q::zero(); n];
        let mut bias = vec![Q::zero(); n];
        let mut recurrent = vec![false; n];
        for class in self.recurrent_classes() {
            let c = class.len();
            let pos = |s: usize| class.binary_search(&s).ok();
            // stationary distribution: π (I − P) = 0 with the last equation replaced by Σπ = 1
            let mut a = vec![vec![Q::zero(); c]; c];
            for (i, &s) in class.iter().enumerate() {
                a[i][i] += Q::one();
                for (t, p) in &self.trans[s] {
                    if let Some(j) = pos(*t) {
                        a[j][i] -= p;
                    }
                }
            }
            let mut b = vec![Q::zero(); c];
            a[c - 1] = vec![Q::one(); c];
            b[c - 1] = Q::one();
            let pi = solve(a, b).expect("irreducible class has a stationary distribution");
            let g: Q = class.iter().zip(&pi).map(|(&s, p)| p * &self.reward[s]).sum();
            // bias: (I − P) h = r − g with the first equation replaced by π·h = 0
            let mut a = vec![vec![Q::zero(); c]; c];
            let mut b = vec![Q::zero(); c];
            for (i, &s) in class.iter().enumerate() {
                a[i][i] += Q::one();
                for (t, p) in &self.trans[s] {
                    if let Some(j) = pos(*t) {
                        a[i][j] -= p;
                    }
                }
                b[i] = &self.reward[s] - &g;
            }
            a[0] = pi.clone();
            b[0] = Q::zero();
            let h = solve(a, b).expect("bias system is nonsingular");
            for (i, &s) in class.iter().enumerate() {
                gain[s] = g.clone();
                bias[s] = h[i].clone();
                recurrent[s] = true;
            }
        }
        let transient: Vec<usize> = (0..n).filter(|&s| !recurrent[s]).collect();
        if !transient.is_empty() {
            let t = transient.len();
            let idx = |s: usize| transient.binary_search(&s).ok();
            let mut a = vec![vec![Q::zero(); t]; t];
            let mut bg = vec![Q::zero(); t];
            for (i, &s) in transient.iter().enumerate() {
                a[i][i] += Q::one();
                for (u, p) in &self.trans[s] {
                    match idx(*u) {
                        Some(j) => a[i][j] -= p,
                        None => bg[i] += p * &gain[*u],
                    }
                }
            }
            let gt = solve(a.clone(), bg).expect("transient block is nonsingular");
            let mut bh = vec![Q::zero(); t];
            for (i, &s) in transient.iter().enumerate() {
                bh[i] = &self.reward[s] - &gt[i];
                for (u, p) in &self.trans[s] {
                    if idx(*u).is_none() {
                        bh[i] += p * &bias[*u];
                    }
                }
            }
            let ht = solve(a, bh).expect("transient block is nonsingular");
            for (i, &s) in transient.iter().enumerate() {
                gain[s] = gt[i].clone();
                bias[s] = ht[i].clone();
            }
        }
        Evaluation { gain, bias }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q, qf};

    #[test]
    fn two_state_cycle() {
        let chain = Chain {
            trans: vec![vec![(1, q(1))], vec![(0, q(1))]],
            reward: vec![q(1), q(-1)],
        };
        let ev = chain.evaluate();
        assert_eq!(ev.gain, vec![q(0), q(0)]);
        assert_eq!(ev.bias, vec![qf(1, 2), qf(-1, 2)]);
    }

    #[test]
    fn transient_state_inherits_mixture_of_gains() {
        // 0 → {1, 2} evenly; 1 and 2 absorbing with rewards 2 and 0
        let chain = Chain {
            trans: vec![vec![(1, qf(1, 2)), (2, qf(1, 2))], vec![(1, q(1))], vec![(2, q(1))]],
            reward: vec![q(5), q(2), q(0)],
        };
        let ev = chain.evaluate();
        assert_eq!(ev.gain, vec![q(1), q(2), q(0)]);
        // g + h = r + P h at the transient state
        assert_eq!(&ev.gain[0] + &ev.bias[0], q(5) + (&ev.bias[1] + &ev.bias[2]) / q(2));
        assert_eq!(chain.recurrent_classes(), vec![vec![1], vec![2]]);
    }

    #[test]
    fn evaluation_equations_hold() {
        let chain = Chain {
            trans: vec![
                vec![(0, qf(1, 3)), (1, qf(2, 3))],
                vec![(2, q(1))],
                vec![(0, qf(1, 2)), (1, qf(1, 2))],
            ],
            reward: vec![q(3), q(-1), q(2)],
        };
        let ev = chain.evaluate();
        for s in 0..3 {
            let ph: Q = chain.trans[s].iter().map(|(t, p)| p * &ev.bias[*t]).sum();
            assert_eq!(&ev.gain[s] + &ev.bias[s], &chain.reward[s] + ph);
        }
    }
}
