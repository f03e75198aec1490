//! Simple adversaries and move policies.

use super::{grid_below, Side, Strategy, View};
use crate::amount::Amount;
use crate::num::{fmt_q, Q};
use crate::stochastic::PotentialTable;
use num_bigint::BigInt;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How a baseline player moves after winning a bid.
#[derive(Debug, Clone)]
pub enum Mover {
    /// Fixed successor per vertex.
    Table(Vec<usize>),
    /// Smallest-id successor.
    First,
}

impl Mover {
    /// Worst case for the opponent of `side` under the Max-perspective potentials:
    /// Min moves to the potential minimiser, Max to the maximiser.
    pub fn from_potentials(table: &PotentialTable, side: Side) -> Mover {
        match side {
            Side::Max => Mover::Table(table.plus.clone()),
            Side::Min => Mover::Table(table.minus.clone()),
        }
    }

    pub fn choose(&self, view: &View) -> usize {
        match self {
            Mover::Table(t) => t[view.vertex],
            Mover::First => view.graph.succ(view.vertex)[0],
        }
    }
}

const ADVERSARY_BITS: i64 = 64;

pub struct ConstantFraction {
    p: Q,
    mover: Mover,
}

impl ConstantFraction {
    pub fn new(p: Q, mover: Mover) -> Self {
        assert!(p >= Q::from_integer(0.into()) && p <= Q::from_integer(1.into()), "fraction in [0,1]");
        ConstantFraction { p, mover }
    }
}

impl Strategy for ConstantFraction {
    fn name(&self) -> String {
        format!("const:{}", fmt_q(&self.p))
    }

    fn bid(&mut self, view: &View) -> Amount {
        view.own.mul_q(&self.p, grid_below(view.own, ADVERSARY_BITS), false)
    }

    fn choose(&mut self, view: &View) -> usize {
        self.mover.choose(view)
    }
}

pub struct AlwaysZero {
    mover: Mover,
}

impl AlwaysZero {
    pub fn new(mover: Mover) -> Self {
        AlwaysZero { mover }
    }
}

impl Strategy for AlwaysZero {
    fn name(&self) -> String {
        "zero".into()
    }

    fn bid(&mut self, _view: &View) -> Amount {
        Amount::zero()
    }

    fn choose(&mut self, view: &View) -> usize {
        self.mover.choose(view)
    }
}

/// Bids a uniformly random share `k/2^64` of its budget.
pub struct UniformRandom {
    rng: ChaCha8Rng,
    seed: u64,
    mover: Mover,
}

impl UniformRandom {
    pub fn new(seed: u64, mover: Mover) -> Self {
        UniformRandom { rng: ChaCha8Rng::seed_from_u64(seed), seed, mover }
    }
}

impl Strategy for UniformRandom {
    fn name(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn bid(&mut self, view: &View) -> Amount {
        let k = self.rng.next_u64();
        let share = Q::new_raw(BigInt::from(k), BigInt::from(1u8) << 64);
        view.own.mul_q(&share, grid_below(view.own, ADVERSARY_BITS), false)
    }

    fn choose(&mut self, view: &View) -> usize {
        self.mover.choose(view)
    }
}
