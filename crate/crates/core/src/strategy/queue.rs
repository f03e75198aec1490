//! Queue-based adversary: remembers the opponent's winning bids and replays them.

use super::{baseline::Mover, Outcome, Strategy, View};
use crate::amount::Amount;
use std::collections::BTreeMap;

/// Bids `ε·2^{−i}` in round `i` while the queue is empty, otherwise the
/// largest queued bid. Each opponent win pushes its bid `m` times; each own
/// win pops the smallest entry.
pub struct QueueStrategy {
    queue: BTreeMap<Amount, usize>,
    len: usize,
    multiplier: usize,
    /// ε as a power-of-two fraction of the initial budget.
    eps_shift: i64,
    eps: Option<Amount>,
    mover: Mover,
}

impl QueueStrategy {
    pub fn new(multiplier: usize, mover: Mover) -> Self {
        assert!(multiplier >= 1);
        QueueStrategy { queue: BTreeMap::new(), len: 0, multiplier, eps_shift: 20, eps: None, mover }
    }

    /// Fixes ε instead of deriving it from the initial budget.
    pub fn with_eps(mut self, eps: Amount) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn with_eps_shift(mut self, shift: i64) -> Self {
        self.eps_shift = shift;
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, b: Amount) {
        *self.queue.entry(b).or_insert(0) += self.multiplier;
        self.len += self.multiplier;
    }

    pub fn pop_min(&mut self) -> Option<Amount> {
        let (k, c) = self.queue.iter_mut().next()?;
        let k = k.clone();
        *c -= 1;
        if *c == 0 {
            self.queue.remove(&k);
        }
        self.len -= 1;
        Some(k)
    }

    pub fn max(&self) -> Option<&Amount> {
        self.queue.keys().next_back()
    }

    /// The rule itself, without budget capping.
    pub fn raw_bid(&self, round: u64, eps: &Amount) -> Amount {
        match self.max() {
            Some(b) => b.clone(),
            None => eps.shl(-(round as i64)),
        }
    }
}

impl Strategy for QueueStrategy {
    fn name(&self) -> String {
        format!("queue:{}", self.multiplier)
    }

    fn bid(&mut self, view: &View) -> Amount {
        let shift = self.eps_shift;
        let eps = self.eps.get_or_insert_with(|| view.own.shl(-shift)).clone();
        self.raw_bid(view.round, &eps).min(view.own.clone())
    }

    fn choose(&mut self, view: &View) -> usize {
        self.mover.choose(view)
    }

    fn observe(&mut self, o: &Outcome) {
        if o.won {
            self.pop_min();
        } else {
            self.push(o.opp_bid.clone());
        }
    }

    fn queue_len(&self) -> Option<usize> {
        Some(self.len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::qf;

    fn a(n: i64, d: i64) -> Amount {
        Amount::from_q(&qf(n, d), -40, false)
    }

    #[test]
    fn empty_queue_halves_epsilon() {
        let s = QueueStrategy::new(1, Mover::First);
        assert_eq!(s.raw_bid(3, &Amount::from_i64(1)).to_q(), qf(1, 8));
    }

    #[test]
    fn replays_the_maximum() {
        let mut s = QueueStrategy::new(1, Mover::First);
        s.push(a(1, 5));
        s.push(a(3, 10));
        assert_eq!(s.raw_bid(4, &Amount::from_i64(1)), a(3, 10));
        assert_eq!(s.pop_min(), Some(a(1, 5)));
        assert_eq!(s.len(), 1);
        assert_eq!(s.raw_bid(5, &Amount::from_i64(1)), a(3, 10));
    }

    #[test]
    fn multiplier_pushes_twice() {
        let mut s = QueueStrategy::new(2, Mover::First);
        s.push(a(1, 5));
        assert_eq!(s.len(), 2);
        s.pop_min();
        assert_eq!(s.max(), Some(&a(1, 5)));
        s.pop_min();
        assert!(s.is_empty());
    }
}
