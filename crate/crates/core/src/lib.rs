//! Poorman-bidding games on graphs: threshold ratios, random-turn game values,
//! bidding strategies and an exact-ledger simulator.

#![allow(clippy::needless_range_loop)]

pub mod amount;
pub mod auction;
pub mod chain;
pub mod etr;
pub mod fixtures;
pub mod gen;
pub mod graph;
pub mod linalg;
pub mod mdp;
pub mod num;
pub mod random_turn;
pub mod scc;
pub mod stochastic;
pub mod sim;
pub mod strategy;
pub mod threshold;

pub use graph::GameGraph;
pub use num::Q;
pub use random_turn::BudgetRatio;
