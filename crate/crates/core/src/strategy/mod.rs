//! Bidding strategies. Every strategy sees budgets as dyadic ledger amounts
//! and must return a bid no larger than its own budget.

pub mod baseline;
pub mod queue;
pub mod roster;
pub mod slush;
pub mod walk;
pub mod warmup;

use crate::amount::Amount;
use crate::graph::GameGraph;
use crate::num::Q;
use serde::Serialize;

pub use baseline::{AlwaysZero, ConstantFraction, Mover, UniformRandom};
pub use queue::QueueStrategy;
pub use slush::SlushFundStrategy;
pub use walk::{verify_walk_inequalities, WalkCertificate, WalkState, WalkStrategy};
pub use warmup::WarmupStrategy;

/// Max is Player 1 (maximiser, reachability player); Min is Player 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Max,
    Min,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Max => Side::Min,
            Side::Min => Side::Max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PaymentRule {
    Poorman,
    Richman,
    SecondPrice,
}

/// What a player sees before bidding.
#[derive(Debug, Clone, Copy)]
pub struct View<'a> {
    pub graph: &'a GameGraph,
    /// 1-based round number.
    pub round: u64,
    pub vertex: usize,
    pub side: Side,
    pub own: &'a Amount,
    pub opp: &'a Amount,
    /// Accumulated weight of the vertices left so far.
    pub energy: &'a Q,
    pub rule: PaymentRule,
}

/// The resolved round, from the observing player's perspective.
#[derive(Debug, Clone, Copy)]
pub struct Outcome<'a> {
    pub view: View<'a>,
    pub own_bid: &'a Amount,
    pub opp_bid: &'a Amount,
    pub won: bool,
    pub next: usize,
    pub own_after: &'a Amount,
    pub opp_after: &'a Amount,
}

pub trait Strategy: Send {
    fn name(&self) -> String;
    fn bid(&mut self, view: &View) -> Amount;
    /// Successor to move to; called only when this player won the bidding.
    fn choose(&mut self, view: &View) -> usize;
    fn observe(&mut self, _outcome: &Outcome) {}
    /// Budget-walk position, when the strategy keeps one.
    fn walk_x(&self) -> Option<Q> {
        None
    }
    fn walk_certificate(&self) -> Option<WalkCertificate> {
        None
    }
    /// Number of pending entries for queue-based strategies.
    fn queue_len(&self) -> Option<usize> {
        None
    }
    /// Internal invariant failures detected by the strategy itself.
    fn faults(&self) -> Vec<String> {
        Vec::new()
    }
}

/// Grid exponent `log2(a) − bits`, or a fixed fallback for zero amounts.
pub(crate) fn grid_below(a: &Amount, bits: i64) -> i64 {
    a.log2().map(|e| e - bits).unwrap_or(-bits)
}
