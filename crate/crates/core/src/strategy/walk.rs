//! The mean-payoff budget-walk strategy.

use super::{grid_below, Outcome, Side, Strategy, View};
use crate::amount::Amount;
use crate::graph::GameGraph;
use crate::num::{min_q, q, Q};
use crate::random_turn::BudgetRatio;
use crate::stochastic::{potentials, PotentialTable, SolverError};
use num_traits::{One, Signed};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WalkError {
    #[error("PreconditionViolated: x(x+1) = {xx} is not above 2·n·min(1,ν) = {bound}")]
    PreconditionViolated { xx: String, bound: String },
    #[error("walk position left the positive axis")]
    NonPositive,
}

/// Position `x` on the budget walk with ratio parameter ν.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    pub x: Q,
    pub nu: Q,
    pub kappa: Q,
}

impl WalkState {
    pub fn new(nu: Q, kappa: Q) -> Self {
        assert!(nu.is_positive() && kappa.is_positive());
        WalkState { x: kappa.clone(), nu, kappa }
    }

    /// ν_x = ν(1 + 2/x).
    pub fn nu_x(&self) -> Q {
        nu_at(&self.nu, &self.x)
    }

    /// β_x = 2·min(1,ν)/(x(x+1)).
    pub fn beta(&self) -> Q {
        // one reduction instead of four: 2·m·d² / (n(n+d)) for x = n/d
        let one = Q::one();
        let m = min_q(&one, &self.nu);
        let (n, d) = (self.x.numer(), self.x.denom());
        Q::new(m.numer() * d * d * 2, m.denom() * n * (n + d))
    }

    /// Bid as a fraction of the opponent's budget at a vertex with normalised strength `n`.
    pub fn bid_fraction(&self, n: &Q) -> Q {
        n * self.beta()
    }

    /// `bid_fraction` left unreduced, for callers that only scale or compare with it.
    pub fn bid_fraction_raw(&self, n: &Q) -> Q {
        let one = Q::one();
        let m = min_q(&one, &self.nu);
        let (xn, xd) = (self.x.numer(), self.x.denom());
        Q::new_raw(n.numer() * m.numer() * xd * xd * 2, n.denom() * m.denom() * xn * (xn + xd))
    }

    pub fn precondition(&self, n: &Q) -> bool {
        // x(x+1) > 2·n·min(1,ν), cross-multiplied
        let one = Q::one();
        let m = min_q(&one, &self.nu);
        let (xn, xd) = (self.x.numer(), self.x.denom());
        xn * (xn + xd) * n.denom() * m.denom() > n.numer() * m.numer() * xd * xd * 2
    }

    /// Win: x + n·min(1, 1/ν); loss: x − n·min(1, ν).
    pub fn update(&self, n: &Q, won: bool) -> Result<WalkState, WalkError> {
        let one = Q::one();
        let x = if won {
            step(&self.x, n, min_q(&one, &self.nu.recip()), true)
        } else {
            if !self.precondition(n) {
                return Err(WalkError::PreconditionViolated {
                    xx: crate::num::fmt_q(&(&self.x * (&self.x + Q::one()))),
                    bound: crate::num::fmt_q(&(q(2) * n * min_q(&Q::one(), &self.nu))),
                });
            }
            step(&self.x, n, min_q(&one, &self.nu), false)
        };
        if !x.is_positive() {
            return Err(WalkError::NonPositive);
        }
        Ok(WalkState { x, nu: self.nu.clone(), kappa: self.kappa.clone() })
    }
}

/// x ± n·c with a single reduction.
fn step(x: &Q, n: &Q, c: &Q, up: bool) -> Q {
    let d = n.denom() * c.denom();
    let a = x.numer() * &d;
    let b = n.numer() * c.numer() * x.denom();
    Q::new(if up { a + b } else { a - b }, x.denom() * d)
}

pub fn nu_at(nu: &Q, x: &Q) -> Q {
    let r = nu_at_raw(nu, x);
    Q::new(r.numer().clone(), r.denom().clone())
}

/// ν(n + 2d)/n for x = n/d, unreduced.
pub fn nu_at_raw(nu: &Q, x: &Q) -> Q {
    let (n, d) = (x.numer(), x.denom());
    Q::new_raw(nu.numer() * (n + d * 2), nu.denom() * n)
}

/// Smallest positive integer κ with ν_κ < `ratio` (own budget over opponent's), if any.
pub fn select_kappa(nu: &Q, ratio: &Q) -> Option<Q> {
    if ratio <= nu {
        return None;
    }
    // ν(1 + 2/κ) < R  ⇔  κ > 2ν/(R − ν)
    let bound: Q = q(2) * nu / (ratio - nu);
    let k: num_bigint::BigInt = bound.floor().to_integer() + 1;
    let k = Q::from_integer(k.max(num_bigint::BigInt::one()));
    debug_assert!(nu_at(nu, &k) < *ratio);
    debug_assert!(k == Q::one() || nu_at(nu, &(&k - Q::one())) >= *ratio);
    Some(k)
}

/// Bid (fraction of the opponent's budget) and move-on-win at `vertex`.
pub fn max_walk_bid(state: &WalkState, table: &PotentialTable, vertex: usize) -> (Q, usize) {
    (state.bid_fraction(&table.normalized[vertex]), table.plus[vertex])
}

/// Both inequalities certifying a step of the walk, in exact arithmetic.
pub fn verify_walk_inequalities(x: &Q, nu: &Q, n: &Q) -> bool {
    let m = min_q(&Q::one(), nu).clone();
    let bid = q(2) * n * &m / (x * (x + Q::one()));
    let nu_x = nu_at(nu, x);
    let down = x - n * &m;
    if !down.is_positive() || bid >= Q::one() {
        return false;
    }
    let lose = &nu_x / (Q::one() - &bid) >= nu_at(nu, &down);
    let up = x + n * min_q(&Q::one(), &nu.recip());
    let win = &nu_x - &bid >= nu_at(nu, &up);
    lose && win
}

/// Parameters an external monitor needs to audit a walk play.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkCertificate {
    pub side: Side,
    pub nu: Q,
    pub kappa: Q,
    pub spread: Q,
    pub max_strength: Q,
    /// Design value in the strategy's own orientation (weights negated for Min).
    pub value: Q,
}

impl WalkCertificate {
    /// −P − S·κ·max(1, ν).
    pub fn energy_bound(&self) -> Q {
        let m = if self.nu > Q::one() { self.nu.clone() } else { Q::one() };
        -(&self.spread) - &self.max_strength * &self.kappa * m
    }
}

/// Bits of slack kept below the invariant margin when rounding bids.
const SLACK_BITS: i64 = 40;

pub struct WalkStrategy {
    side: Side,
    table: PotentialTable,
    state: Option<WalkState>,
    faults: Vec<String>,
}

impl WalkStrategy {
    /// `design` is the strategy owner's own ratio; Min plays the walk on the negated game.
    pub fn new(graph: &GameGraph, side: Side, design: &BudgetRatio) -> Result<Self, SolverError> {
        let g = match side {
            Side::Max => graph.clone(),
            Side::Min => graph.negated(),
        };
        Ok(Self::from_table(potentials(&g, design)?, side))
    }

    pub fn from_table(table: PotentialTable, side: Side) -> Self {
        WalkStrategy { side, table, state: None, faults: Vec::new() }
    }

    pub fn table(&self) -> &PotentialTable {
        &self.table
    }

    pub fn state(&self) -> Option<&WalkState> {
        self.state.as_ref()
    }

    fn init(&mut self, own: &Amount, opp: &Amount) {
        if self.state.is_some() {
            return;
        }
        let kappa = if opp.is_zero() {
            Some(Q::one())
        } else {
            select_kappa(&self.table.nu, &own.ratio(opp))
        };
        let kappa = kappa.unwrap_or_else(|| {
            self.faults.push("initial ratio does not exceed the design ratio".into());
            Q::one()
        });
        self.state = Some(WalkState::new(self.table.nu.clone(), kappa));
    }
}

impl Strategy for WalkStrategy {
    fn name(&self) -> String {
        format!("walk:{}", crate::num::fmt_q(&self.table.ratio))
    }

    fn bid(&mut self, view: &View) -> Amount {
        self.init(view.own, view.opp);
        let state = self.state.as_ref().expect("initialised");
        let frac = state.bid_fraction_raw(&self.table.normalized[view.vertex]);
        let Some(slack_log2) = view.own.excess_log2(view.opp, &nu_at_raw(&state.nu, &state.x)) else {
            self.faults.push(format!("round {}: walk invariant already broken", view.round));
            return view.own.mul_q(&frac.min(Q::one()), grid_below(view.own, SLACK_BITS), false).min(view.own.clone());
        };
        let grid = slack_log2 - SLACK_BITS;
        let unit = Amount::pow2(grid);
        let prescribed = view.opp.mul_q(&frac, grid, true);
        let bid = if prescribed < *view.opp {
            prescribed
        } else {
            // forcing position: beat the opponent's whole budget strictly
            view.opp.round_to(grid, true).add(&unit)
        };
        if bid > *view.own {
            self.faults.push(format!("round {}: bid above budget", view.round));
            return view.own.clone();
        }
        bid
    }

    fn choose(&mut self, view: &View) -> usize {
        self.table.plus[view.vertex]
    }

    fn observe(&mut self, o: &Outcome) {
        let n = self.table.normalized[o.view.vertex].clone();
        let state = self.state.as_ref().expect("bid before observe");
        match state.update(&n, o.won) {
            Ok(s) => self.state = Some(s),
            Err(e) => {
                self.faults.push(format!("round {}: {e}", o.view.round));
            }
        }
    }

    fn walk_x(&self) -> Option<Q> {
        self.state.as_ref().map(|s| s.x.clone())
    }

    fn walk_certificate(&self) -> Option<WalkCertificate> {
        let s = self.state.as_ref()?;
        Some(WalkCertificate {
            side: self.side,
            nu: self.table.nu.clone(),
            kappa: s.kappa.clone(),
            spread: self.table.spread.clone(),
            max_strength: self.table.max_strength.clone(),
            value: self.table.value.clone(),
        })
    }

    fn faults(&self) -> Vec<String> {
        self.faults.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::num::qf;
    use proptest::prelude::*;

    #[test]
    fn loops_bid_at_two() {
        let t = potentials(&fixtures::loops(), &BudgetRatio::new(qf(1, 2)).unwrap()).unwrap();
        let s = WalkState { x: q(2), nu: q(1), kappa: q(2) };
        assert_eq!(max_walk_bid(&s, &t, 0), (qf(1, 3), 0));
        assert_eq!(max_walk_bid(&s, &t, 1), (qf(1, 3), 0));
    }

    #[test]
    fn forcing_at_one() {
        let s = WalkState { x: q(1), nu: q(1), kappa: q(1) };
        assert_eq!(s.bid_fraction(&q(1)), q(1));
        assert_eq!(s.bid_fraction(&q(0)), q(0));
    }

    #[test]
    fn walk_steps() {
        let s = WalkState { x: q(2), nu: q(1), kappa: q(2) };
        assert_eq!(s.update(&q(1), true).unwrap().x, q(3));
        assert_eq!(s.update(&q(1), false).unwrap().x, q(1));
        let s = WalkState { x: q(4), nu: q(2), kappa: q(4) };
        assert_eq!(s.update(&q(1), true).unwrap().x, qf(9, 2));
        assert_eq!(s.update(&q(1), false).unwrap().x, q(3));
        let s = WalkState { x: q(1), nu: q(1), kappa: q(1) };
        assert!(matches!(s.update(&q(1), false), Err(WalkError::PreconditionViolated { .. })));
    }

    #[test]
    fn inequality_examples() {
        assert!(verify_walk_inequalities(&q(2), &q(1), &q(1)));
        // the first inequality is tight here
        assert_eq!(nu_at(&q(1), &q(2)) / (Q::one() - qf(1, 3)), nu_at(&q(1), &q(1)));
        assert!(verify_walk_inequalities(&qf(7, 3), &qf(1, 2), &q(0)));
    }

    #[test]
    fn kappa_is_minimal() {
        // ν = 1, ratio 11/9: ν_10 = 6/5 < 11/9 ≤ ν_9 = 11/9
        assert_eq!(select_kappa(&q(1), &qf(11, 9)), Some(q(10)));
        assert_eq!(select_kappa(&q(1), &q(1)), None);
        assert_eq!(select_kappa(&q(1), &q(5)), Some(q(1)));
    }

    proptest! {
        #[test]
        fn step_inequalities_hold(xn in 1u32..4000, xd in 1u32..200, nn in 1u32..500, nd in 1u32..100, k in 0u32..=64) {
            let x = qf(xn as i64, xd as i64);
            let nu = qf(nn as i64, nd as i64);
            let n = qf(k as i64, 64);
            let s = WalkState { x: x.clone(), nu: nu.clone(), kappa: q(1) };
            prop_assume!(s.precondition(&n));
            prop_assert!(verify_walk_inequalities(&x, &nu, &n));
        }
    }
}
