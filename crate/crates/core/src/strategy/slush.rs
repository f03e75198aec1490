//! Reachability strategy splitting Player 1's budget into a real budget that
//! tracks the threshold ratio exactly and a slush fund that grows whenever the
//! opponent wins.

use super::{Outcome, Strategy, View};
use crate::amount::Amount;
use crate::graph::GameGraph;
use crate::num::{from_f64, log2_floor, q, Q};
use crate::threshold::ThresholdMap;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone)]
pub struct SlushFundState {
    /// Real budget x′.
    pub real: Q,
    /// Current slush fund.
    pub slush: Q,
    /// Slush fund at the opponent's last win (or initially), ε′.
    pub eps: Q,
    pub delta: Vec<Q>,
    pub delta_v: Vec<Q>,
    pub schedule: Vec<Q>,
    pub gamma: Q,
    pub delta_min: Q,
    pub dist: Vec<usize>,
}

/// Thresholds this close count as tied when choosing moves.
const TIE_TOL: f64 = 1e-9;

pub struct SlushFundStrategy {
    target: usize,
    f: Vec<Q>,
    moves: Vec<usize>,
    delta: Vec<Q>,
    delta_v: Vec<Q>,
    schedule: Vec<Q>,
    gamma: Q,
    delta_min: Q,
    dist: Vec<usize>,
    real: Q,
    slush: Q,
    eps: Q,
    started: bool,
    pending_move: Option<usize>,
    growth: Vec<Q>,
    faults: Vec<String>,
}

/// Δ(v) = (f(v) − f(v⁻))/(f(v)(1 − f(v⁻))) when f(v) > 0 and f(v⁻) < 1, else 0.
pub fn delta(f_v: &Q, f_minus: &Q) -> Q {
    if f_v.is_positive() && *f_minus < Q::one() {
        (f_v - f_minus) / (f_v * (Q::one() - f_minus))
    } else {
        Q::zero()
    }
}

/// δ_1 = 1 and δ_i = 4·Σ_{j<i} δ_j / Δ_min, so that Σ_{j<i} δ_j < Δ_min/2 · δ_i.
pub fn delta_schedule(len: usize, delta_min: &Q) -> Vec<Q> {
    let mut out = vec![Q::one()];
    let mut sum = Q::one();
    for _ in 1..len {
        let next = q(4) * &sum / delta_min;
        sum += &next;
        out.push(next);
    }
    out
}

impl SlushFundStrategy {
    pub fn new(graph: &GameGraph, target: usize, th: &ThresholdMap) -> Self {
        let n = graph.len();
        let f: Vec<Q> = th.th.iter().map(|&x| from_f64(x)).collect();
        // winning moves go to a successor of least threshold; among (numerical)
        // ties, the one closest to the target along such moves
        let good: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                let lo = graph.succ(v).iter().map(|&u| th.th[u]).fold(f64::INFINITY, f64::min);
                graph.succ(v).iter().copied().filter(|&u| th.th[u] <= lo + TIE_TOL).collect()
            })
            .collect();
        let mut reach = vec![usize::MAX; n];
        reach[target] = 0;
        for _ in 0..n {
            for v in 0..n {
                if let Some(d) = good[v].iter().map(|&u| reach[u]).filter(|&d| d != usize::MAX).min() {
                    reach[v] = reach[v].min(d + 1);
                }
            }
            reach[target] = 0;
        }
        let moves: Vec<usize> = (0..n)
            .map(|v| good[v].iter().copied().min_by_key(|&u| (reach[u], u)).unwrap_or(th.minus[v]))
            .collect();
        let delta: Vec<Q> = (0..n).map(|v| delta(&f[v], &f[moves[v]]).max(Q::zero())).collect();
        // the smallest positive Δ(v) or f(v); 1 when there is none
        let delta_min = delta
            .iter()
            .chain(f.iter())
            .filter(|x| x.is_positive())
            .min()
            .cloned()
            .unwrap_or_else(Q::one)
            .min(Q::one());
        let dist: Vec<usize> = (0..n)
            .map(|v| {
                let mut cur = v;
                for steps in 0..=n {
                    if cur == target {
                        return steps;
                    }
                    cur = moves[cur];
                }
                n - 1
            })
            .map(|d| d.min(n - 1))
            .collect();
        let schedule = delta_schedule(n, &delta_min);
        let total: Q = schedule.iter().sum();
        let gamma = Q::one() / (q(2) * total);
        let delta_v = dist.iter().map(|&d| &gamma * &schedule[n - d - 1]).collect();
        SlushFundStrategy {
            target,
            f,
            moves,
            delta,
            delta_v,
            schedule,
            gamma,
            delta_min,
            dist,
            real: Q::zero(),
            slush: Q::zero(),
            eps: Q::zero(),
            started: false,
            pending_move: None,
            growth: Vec::new(),
            faults: Vec::new(),
        }
    }

    pub fn state(&self) -> SlushFundState {
        SlushFundState {
            real: self.real.clone(),
            slush: self.slush.clone(),
            eps: self.eps.clone(),
            delta: self.delta.clone(),
            delta_v: self.delta_v.clone(),
            schedule: self.schedule.clone(),
            gamma: self.gamma.clone(),
            delta_min: self.delta_min.clone(),
            dist: self.dist.clone(),
        }
    }

    /// Slush-fund growth factors, one per opponent win.
    pub fn growth_factors(&self) -> &[Q] {
        &self.growth
    }

    /// Real budget matching ratio f against opponent budget y.
    fn real_for(&self, f: &Q, y: &Q) -> Option<Q> {
        if *f >= Q::one() {
            None
        } else {
            Some(f * y / (Q::one() - f))
        }
    }

    fn start(&mut self, view: &View) {
        let (own, opp) = (view.own.to_q(), view.opp.to_q());
        match self.real_for(&self.f[view.vertex], &opp) {
            Some(x) if x < own => {
                self.real = x;
                self.slush = &own - &self.real;
            }
            _ => {
                self.faults.push("InvariantBroken: initial ratio does not exceed the threshold".into());
                self.real = own.clone();
                self.slush = Q::zero();
            }
        }
        self.eps = self.slush.clone();
        self.started = true;
    }
}

impl Strategy for SlushFundStrategy {
    fn name(&self) -> String {
        "slush".into()
    }

    fn bid(&mut self, view: &View) -> Amount {
        if !self.started {
            self.start(view);
        }
        let v = view.vertex;
        let fund_part = &self.delta_v[v] * &self.eps;
        let exact = &self.delta[v] * &self.real + &fund_part;
        if !fund_part.is_positive() {
            return Amount::zero();
        }
        let grid = log2_floor(&fund_part) - 30;
        Amount::from_q(&exact, grid, true).min(view.own.clone())
    }

    fn choose(&mut self, view: &View) -> usize {
        let m = self.moves[view.vertex];
        self.pending_move = Some(m);
        m
    }

    fn observe(&mut self, o: &Outcome) {
        let own_after = o.own_after.to_q();
        let v = o.view.vertex;
        if o.won {
            self.real = (Q::one() - &self.delta[v]) * &self.real;
        } else if o.next != self.target {
            match self.real_for(&self.f[o.next], &o.opp_after.to_q()) {
                Some(x) => self.real = x,
                None => self.faults.push(format!("InvariantBroken: round {} reached threshold 1", o.view.round)),
            }
        }
        self.slush = &own_after - &self.real;
        if !self.slush.is_positive() && o.next != self.target {
            self.faults.push(format!("InvariantBroken: round {}: slush fund exhausted", o.view.round));
        }
        if !o.won {
            if self.eps.is_positive() {
                self.growth.push(&self.slush / &self.eps);
            }
            self.eps = self.slush.clone();
        }
    }

    fn faults(&self) -> Vec<String> {
        self.faults.clone()
    }
}
