//! Strategies by name, e.g. `walk`, `walk:1/2`, `queue:2`, `const:0.3`,
//! `random`, `zero`, `warmup`, `slush:u1`.

use super::{
    AlwaysZero, ConstantFraction, Mover, QueueStrategy, Side, SlushFundStrategy, Strategy, UniformRandom,
    WalkStrategy, WarmupStrategy,
};
use crate::graph::GameGraph;
use crate::num::{parse_q, q, Q};
use crate::random_turn::BudgetRatio;
use crate::scc::is_strongly_connected;
use crate::stochastic::{potentials, PotentialTable};
use crate::threshold::{critical_ratio, solve_reachability, SolveOptions, DEFAULT_TOL};
use num_traits::{One, Zero};

#[derive(Debug, thiserror::Error)]
pub enum RosterError {
    #[error("unknown strategy '{0}'")]
    Unknown(String),
    #[error("bad parameter for '{name}': {reason}")]
    BadParam { name: String, reason: String },
    #[error("strategy '{0}' needs a strongly connected game")]
    NeedsScc(String),
    #[error("strategy '{0}' is only available to Max")]
    MaxOnly(String),
    #[error("{0}")]
    Solver(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrategySpec {
    /// Budget walk with an optional design ratio (the walker's own share).
    Walk(Option<Q>),
    Queue(usize),
    Constant(Q),
    Random,
    Zero,
    Warmup,
    /// Slush-fund reachability strategy towards the given vertex id.
    Slush(String),
}

impl std::str::FromStr for StrategySpec {
    type Err = RosterError;

    fn from_str(s: &str) -> Result<Self, RosterError> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let bad = |reason: &str| RosterError::BadParam { name: name.to_string(), reason: reason.to_string() };
        let ratio = |p: &str| parse_q(p).map_err(|e| bad(&e.to_string()));
        Ok(match (name, param) {
            ("walk", None) => StrategySpec::Walk(None),
            ("walk", Some(p)) => StrategySpec::Walk(Some(ratio(p)?)),
            ("queue", None) => StrategySpec::Queue(1),
            ("queue", Some(p)) => {
                let m: usize = p.parse().map_err(|_| bad("multiplier must be a positive integer"))?;
                if m == 0 {
                    return Err(bad("multiplier must be a positive integer"));
                }
                StrategySpec::Queue(m)
            }
            ("const", Some(p)) => {
                let f = ratio(p)?;
                if f < Q::zero() || f > Q::one() {
                    return Err(bad("fraction must lie in [0,1]"));
                }
                StrategySpec::Constant(f)
            }
            ("const", None) => return Err(bad("missing fraction, e.g. const:1/2")),
            ("random", None) => StrategySpec::Random,
            ("zero", None) => StrategySpec::Zero,
            ("warmup", None) => StrategySpec::Warmup,
            ("slush", p) => StrategySpec::Slush(p.unwrap_or("u1").to_string()),
            _ => return Err(RosterError::Unknown(s.to_string())),
        })
    }
}

/// Per-game data shared by the strategies of one match.
pub struct Arena<'g> {
    pub graph: &'g GameGraph,
    /// Smallest ratio at which Max's random-turn value is nonnegative, for
    /// strongly connected games.
    pub critical: Option<Q>,
    /// Max-perspective potentials at the critical ratio, when defined.
    pub table: Option<PotentialTable>,
}

impl<'g> Arena<'g> {
    pub fn new(graph: &'g GameGraph) -> Self {
        if !is_strongly_connected(graph) {
            return Arena { graph, critical: None, table: None };
        }
        let critical = critical_ratio(graph, DEFAULT_TOL).ok();
        let table = critical
            .as_ref()
            .filter(|r| **r > Q::zero() && **r < Q::one())
            .and_then(|r| potentials(graph, &BudgetRatio::new(r.clone()).ok()?).ok());
        Arena { graph, critical, table }
    }

    /// Move policy for baseline players: towards the Max witness for Max,
    /// the Min witness for Min, or the first successor without potentials.
    pub fn mover(&self, side: Side) -> Mover {
        match &self.table {
            Some(t) => Mover::from_potentials(t, side),
            None => Mover::First,
        }
    }

    pub fn build(&self, spec: &StrategySpec, side: Side, seed: u64) -> Result<Box<dyn Strategy>, RosterError> {
        Ok(match spec {
            StrategySpec::Walk(design) => {
                let own = match design {
                    Some(r) => r.clone(),
                    None => {
                        let c = self.critical.clone().ok_or_else(|| RosterError::NeedsScc("walk".into()))?;
                        match side {
                            Side::Max => c,
                            Side::Min => Q::one() - c,
                        }
                    }
                };
                let ratio = BudgetRatio::new(own).map_err(|e| RosterError::BadParam {
                    name: "walk".into(),
                    reason: e.to_string(),
                })?;
                Box::new(WalkStrategy::new(self.graph, side, &ratio).map_err(|e| RosterError::Solver(e.to_string()))?)
            }
            StrategySpec::Queue(m) => Box::new(QueueStrategy::new(*m, self.mover(side))),
            StrategySpec::Constant(p) => Box::new(ConstantFraction::new(p.clone(), self.mover(side))),
            StrategySpec::Random => {
                let salt = match side {
                    Side::Max => 0x9e37_79b9_7f4a_7c15,
                    Side::Min => 0x6a09_e667_f3bc_c908,
                };
                Box::new(UniformRandom::new(seed ^ salt, self.mover(side)))
            }
            StrategySpec::Zero => Box::new(AlwaysZero::new(self.mover(side))),
            StrategySpec::Warmup => {
                if side != Side::Max {
                    return Err(RosterError::MaxOnly("warmup".into()));
                }
                let w = self.graph.weights();
                let up = (0..w.len()).max_by(|&a, &b| w[a].cmp(&w[b]).then(b.cmp(&a))).expect("nonempty");
                Box::new(WarmupStrategy::new(up))
            }
            StrategySpec::Slush(target) => {
                if side != Side::Max {
                    return Err(RosterError::MaxOnly("slush".into()));
                }
                let t = self.graph.vertex(target).map_err(|e| RosterError::BadParam {
                    name: "slush".into(),
                    reason: e.to_string(),
                })?;
                let th = solve_reachability(self.graph, t, &SolveOptions::default())
                    .map_err(|e| RosterError::Solver(e.to_string()))?;
                Box::new(SlushFundStrategy::new(self.graph, t, &th))
            }
        })
    }
}

/// The adversary suite: queue m ∈ {1,2}, constant fractions 0.1…0.9,
/// uniform random and always-zero.
pub fn adversary_suite() -> Vec<StrategySpec> {
    let mut out = vec![StrategySpec::Queue(1), StrategySpec::Queue(2)];
    out.extend((1..=9).map(|k| StrategySpec::Constant(q(k) / q(10))));
    out.push(StrategySpec::Random);
    out.push(StrategySpec::Zero);
    out
}
