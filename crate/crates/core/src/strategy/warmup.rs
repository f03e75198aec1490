//! Warm-up energy strategy for the two-loop game: keep the energy positive
//! from energy k whenever Max's ratio exceeds T_{k+1}/(k+1)².

use super::{Strategy, View};
use crate::amount::Amount;
use crate::num::{q, Q};
use num_traits::{One, Signed};

/// t_k = k(k−1)/2.
pub fn t(k: u64) -> Q {
    q((k * (k.saturating_sub(1)) / 2) as i64)
}

/// T_k = k(k+1)/2.
pub fn big_t(k: u64) -> Q {
    q((k * (k + 1) / 2) as i64)
}

/// T_{k+1}/(k+1)², the ratio Max must keep at energy k.
pub fn warmup_threshold(k: u64) -> Q {
    big_t(k + 1) / q(((k + 1) * (k + 1)) as i64)
}

/// Max's bid at energy `k` in units where Min's budget is t_{k+1}/(k+1)²:
/// one unit 1/(k+1)² plus half the surplus ε.
pub fn warmup_bid(k: u64, eps: &Q) -> Q {
    Q::one() / q(((k + 1) * (k + 1)) as i64) + eps / q(2)
}

pub struct WarmupStrategy {
    up: usize,
    faults: Vec<String>,
}

impl WarmupStrategy {
    /// `up` is the vertex Max moves to after winning (the positive loop).
    pub fn new(up: usize) -> Self {
        WarmupStrategy { up, faults: Vec::new() }
    }

    /// Energy coordinate after the current vertex's weight is counted.
    pub fn coordinate(view: &View) -> Q {
        view.energy + view.graph.weight(view.vertex)
    }
}

impl Strategy for WarmupStrategy {
    fn name(&self) -> String {
        "warmup".into()
    }

    fn bid(&mut self, view: &View) -> Amount {
        let kq = Self::coordinate(view);
        if !kq.is_integer() || !kq.is_positive() {
            self.faults.push(format!("round {}: energy coordinate {} is not a positive integer", view.round, kq));
            return view.own.clone();
        }
        let k: u64 = kq.to_integer().try_into().expect("energy fits in u64");
        if view.opp.is_zero() {
            // any positive bid wins; ties go to Min
            return match view.own.log2() {
                Some(l) => Amount::pow2(l - 30),
                None => Amount::zero(),
            };
        }
        // with unit u = m/t_{k+1} and surplus ε = M − T_{k+1}·u, bid u + ε/2;
        // S = t·M − T·m is ε scaled by t, and the bid is (S + 2m)/(2t)
        let (tk, bk) = (t(k + 1), big_t(k + 1));
        let s = view.own.scale(tk.numer()).sub(&view.opp.scale(bk.numer()));
        if !s.is_positive() {
            self.faults.push(format!("round {}: ratio invariant broken at energy {k}", view.round));
            return view.own.clone();
        }
        let grid = s.log2().expect("positive") - tk.numer().bits() as i64 - 5;
        let num = s.add(&view.opp.shl(1));
        let bid = num.mul_q(&(Q::one() / (q(2) * &tk)), grid, true);
        if bid > *view.own || bid.is_zero() {
            self.faults.push(format!("round {}: bid out of range", view.round));
            return view.own.clone();
        }
        bid
    }

    fn choose(&mut self, _view: &View) -> usize {
        self.up
    }

    fn faults(&self) -> Vec<String> {
        self.faults.clone()
    }
}
