//! Threshold ratios: generalized reachability fixed points, parity and
//! mean-payoff reductions, and the per-SCC critical ratio.

use crate::graph::{require_parity, GameGraph, GraphError};
use crate::num::{from_f64, q, to_f64, Q};
use crate::scc::{bsccs, is_strongly_connected};
use crate::stochastic::{scc_value, SolverError};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SWEEPS: usize = 1_000_000;
pub const BISECTION_STEPS: usize = 200;
pub const TOL_ENV: &str = "GAME_SOLVER_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Poorman,
    Richman,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    pub mode: Mode,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: DEFAULT_TOL, max_sweeps: DEFAULT_MAX_SWEEPS, mode: Mode::Poorman }
    }
}

impl SolveOptions {
    /// Defaults with the tolerance taken from `GAME_SOLVER_TOL` when set.
    pub fn from_env() -> Result<Self, ThresholdError> {
        let mut o = Self::default();
        if let Ok(s) = std::env::var(TOL_ENV) {
            o.tol = s.trim().parse().map_err(|_| ThresholdError::BadTolerance(s.clone()))?;
            if !(o.tol > 0.0 && o.tol.is_finite()) {
                return Err(ThresholdError::BadTolerance(s));
            }
        }
        Ok(o)
    }

    pub fn richman(mut self) -> Self {
        self.mode = Mode::Richman;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ThresholdError {
    #[error("IterationCap: no convergence after {sweeps} sweeps (best residual {residual:e})")]
    IterationCap { sweeps: usize, residual: f64 },
    #[error("UnreachableBoundary: no boundary vertex reachable from {0}")]
    UnreachableBoundary(String),
    #[error("boundary must be nonempty with values in [0, 1]")]
    BadBoundary,
    #[error("invalid tolerance {0:?}")]
    BadTolerance(String),
    #[error("degenerate recurrence denominator at {0}")]
    DegenerateDenominator(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdMap {
    pub ids: Vec<String>,
    pub th: Vec<f64>,
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
    pub boundary: Vec<bool>,
    pub mode: Mode,
    pub residual: f64,
    pub sweeps: usize,
    /// Every sweep was pointwise nondecreasing.
    pub monotone: bool,
}

#[derive(Serialize)]
struct ThresholdJson<'a> {
    mode: Mode,
    residual: f64,
    sweeps: usize,
    th: BTreeMap<&'a str, f64>,
    witnesses: BTreeMap<&'a str, [&'a str; 2]>,
    boundary: Vec<&'a str>,
}

impl ThresholdMap {
    pub fn get(&self, graph: &GameGraph, id: &str) -> Result<f64, GraphError> {
        Ok(self.th[graph.vertex(id)?])
    }

    pub fn to_json(&self) -> String {
        let ids = &self.ids;
        let j = ThresholdJson {
            mode: self.mode,
            residual: self.residual,
            sweeps: self.sweeps,
            th: ids.iter().map(|s| s.as_str()).zip(self.th.iter().copied()).collect(),
            witnesses: (0..ids.len())
                .map(|v| (ids[v].as_str(), [ids[self.plus[v]].as_str(), ids[self.minus[v]].as_str()]))
                .collect(),
            boundary: (0..ids.len()).filter(|&v| self.boundary[v]).map(|v| ids[v].as_str()).collect(),
        };
        serde_json::to_string_pretty(&j).expect("serializable") + "\n"
    }

    /// Recomputes the recurrence residual by substitution at every interior vertex.
    pub fn substituted_residual(&self, graph: &GameGraph) -> f64 {
        (0..graph.len())
            .filter(|&v| !self.boundary[v])
            .map(|v| (self.th[v] - update(self.mode, &self.th, graph.succ(v)).0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest violation of `th(v⁻) ≤ th(v′) ≤ th(v⁺)` over all neighbours.
    pub fn ordering_violation(&self, graph: &GameGraph) -> f64 {
        let mut worst: f64 = 0.0;
        for v in 0..graph.len() {
            for &u in graph.succ(v) {
                worst = worst.max(self.th[self.minus[v]] - self.th[u]).max(self.th[u] - self.th[self.plus[v]]);
            }
        }
        worst
    }
}

/// One application of the recurrence at a vertex; returns (value, v⁺, v⁻).
fn update(mode: Mode, th: &[f64], succ: &[usize]) -> (f64, usize, usize) {
    let (mut hi, mut lo) = (succ[0], succ[0]);
    for &u in succ {
        if th[u] > th[hi] {
            hi = u;
        }
        if th[u] < th[lo] {
            lo = u;
        }
    }
    let (p, m) = (th[hi], th[lo]);
    let val = match mode {
        Mode::Richman => 0.5 * (p + m),
        Mode::Poorman => {
            let den = 1.0 - m + p;
            if den <= 0.0 {
                f64::NAN
            } else {
                p / den
            }
        }
    };
    (val, hi, lo)
}

/// Least fixed point of the recurrence with `boundary` clamped, by
/// Gauss–Seidel sweeps in canonical order starting from zero.
pub fn solve_generalized_reachability(
    graph: &GameGraph,
    boundary: &BTreeMap<usize, f64>,
    opts: &SolveOptions,
) -> Result<ThresholdMap, ThresholdError> {
    if boundary.is_empty() || boundary.values().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(ThresholdError::BadBoundary);
    }
    let n = graph.len();
    let targets: Vec<usize> = boundary.keys().copied().collect();
    let dist = graph.distances_to(&targets);
    if let Some(v) = (0..n).find(|&v| dist[v].is_none()) {
        return Err(ThresholdError::UnreachableBoundary(graph.id(v).to_string()));
    }
    let mut is_boundary = vec![false; n];
    let mut th = vec![0.0; n];
    for (&v, &x) in boundary {
        is_boundary[v] = true;
        th[v] = x;
    }
    let interior: Vec<usize> = (0..n).filter(|&v| !is_boundary[v]).collect();
    let mut monotone = true;
    let mut sweeps = 0;
    let mut residual = residual_of(opts.mode, &th, graph, &interior)?;
    while residual > opts.tol {
        if sweeps >= opts.max_sweeps {
            return Err(ThresholdError::IterationCap { sweeps, residual });
        }
        sweeps += 1;
        for &v in &interior {
            let (x, _, _) = update(opts.mode, &th, graph.succ(v));
            if x.is_nan() {
                return Err(ThresholdError::DegenerateDenominator(graph.id(v).to_string()));
            }
            if x < th[v] - 1e-15 {
                monotone = false;
            }
            th[v] = x.clamp(0.0, 1.0);
        }
        residual = residual_of(opts.mode, &th, graph, &interior)?;
    }
    let mut plus = vec![0; n];
    let mut minus = vec![0; n];
    for v in 0..n {
        let (_, hi, lo) = update(opts.mode, &th, graph.succ(v));
        plus[v] = hi;
        minus[v] = lo;
    }
    Ok(ThresholdMap {
        ids: graph.ids().to_vec(),
        th,
        plus,
        minus,
        boundary: is_boundary,
        mode: opts.mode,
        residual,
        sweeps,
        monotone,
    })
}

fn residual_of(mode: Mode, th: &[f64], graph: &GameGraph, interior: &[usize]) -> Result<f64, ThresholdError> {
    let mut r: f64 = 0.0;
    for &v in interior {
        let (x, _, _) = update(mode, th, graph.succ(v));
        if x.is_nan() {
            return Err(ThresholdError::DegenerateDenominator(graph.id(v).to_string()));
        }
        r = r.max((x - th[v]).abs());
    }
    Ok(r)
}

/// Player 1 must reach `target`; vertices with no path to it get threshold 1.
pub fn solve_reachability(graph: &GameGraph, target: usize, opts: &SolveOptions) -> Result<ThresholdMap, ThresholdError> {
    let dist = graph.distances_to(&[target]);
    let mut boundary = BTreeMap::new();
    boundary.insert(target, 0.0);
    for v in 0..graph.len() {
        if dist[v].is_none() {
            boundary.insert(v, 1.0);
        }
    }
    solve_generalized_reachability(graph, &boundary, opts)
}

/// Player 1 must reach `t1` before Player 2 reaches `t2`.
pub fn solve_double_reachability(
    graph: &GameGraph,
    t1: usize,
    t2: usize,
    opts: &SolveOptions,
) -> Result<ThresholdMap, ThresholdError> {
    let dist = graph.distances_to(&[t1]);
    let mut boundary = BTreeMap::new();
    boundary.insert(t1, 0.0);
    boundary.insert(t2, 1.0);
    for v in 0..graph.len() {
        if dist[v].is_none() {
            boundary.insert(v, 1.0);
        }
    }
    solve_generalized_reachability(graph, &boundary, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsccObjective {
    Parity,
    MeanPayoff,
}

/// Boundary value of a strongly connected game for the given objective.
pub fn classify_bscc(scc: &GameGraph, objective: BsccObjective, tol: f64) -> Result<Q, ThresholdError> {
    match objective {
        BsccObjective::Parity => {
            require_parity(scc)?;
            let top = (0..scc.len()).filter_map(|v| scc.parity(v)).max().expect("nonempty");
            Ok(if top % 2 == 1 { Q::zero() } else { Q::one() })
        }
        BsccObjective::MeanPayoff => critical_ratio(scc, tol),
    }
}

/// The least r at which the strongly connected game's value becomes nonnegative.
///
/// Values are monotone in r, so bisection keeps `value(lo) < 0 ≤ value(hi)`;
/// an interval of zero values resolves to its infimum.
pub fn critical_ratio(scc: &GameGraph, tol: f64) -> Result<Q, ThresholdError> {
    if !is_strongly_connected(scc) {
        return Err(SolverError::NotStronglyConnected.into());
    }
    if scc_value(scc, &Q::zero())? >= Q::zero() {
        return Ok(Q::zero());
    }
    if scc_value(scc, &Q::one())? < Q::zero() {
        return Ok(Q::one());
    }
    let tol = from_f64(tol);
    let (mut lo, mut hi) = (Q::zero(), Q::one());
    for _ in 0..BISECTION_STEPS {
        if &hi - &lo <= tol {
            break;
        }
        let mid = (&lo + &hi) / q(2);
        if scc_value(scc, &mid)? >= Q::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Parity thresholds: BSCCs pinned to 0/1, interior by generalized reachability.
pub fn solve_parity(graph: &GameGraph, opts: &SolveOptions) -> Result<ThresholdMap, ThresholdError> {
    require_parity(graph)?;
    let mut boundary = BTreeMap::new();
    for comp in bsccs(graph) {
        let sub = graph.induced(&comp)?;
        let alpha = to_f64(&classify_bscc(&sub, BsccObjective::Parity, opts.tol)?);
        for v in comp {
            boundary.insert(v, alpha);
        }
    }
    solve_generalized_reachability(graph, &boundary, opts)
}

/// Per-BSCC critical ratios of a mean-payoff game.
pub fn bscc_ratios(graph: &GameGraph, tol: f64) -> Result<Vec<(Vec<usize>, Q)>, ThresholdError> {
    bsccs(graph)
        .into_iter()
        .map(|comp| {
            let sub = graph.induced(&comp)?;
            Ok((comp, critical_ratio(&sub, tol)?))
        })
        .collect()
}

/// Mean-payoff thresholds: BSCCs pinned to their critical ratios.
pub fn solve_meanpayoff_thresholds(graph: &GameGraph, opts: &SolveOptions) -> Result<ThresholdMap, ThresholdError> {
    let mut boundary = BTreeMap::new();
    for (comp, r) in bscc_ratios(graph, opts.tol)? {
        let x = to_f64(&r);
        for v in comp {
            boundary.insert(v, x);
        }
    }
    solve_generalized_reachability(graph, &boundary, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::num::qf;

    fn id(g: &GameGraph, s: &str) -> usize {
        g.vertex(s).unwrap()
    }

    #[test]
    fn chain_thresholds_follow_the_recurrence() {
        let g = fixtures::chain();
        let t = solve_reachability(&g, id(&g, "u1"), &SolveOptions::default()).unwrap();
        let s5 = 5f64.sqrt();
        // the vertex next to the target needs the smaller share
        assert!((t.th[id(&g, "v1")] - (3.0 - s5) / 2.0).abs() < 1e-8);
        assert!((t.th[id(&g, "v2")] - (s5 - 1.0) / 2.0).abs() < 1e-8);
        assert_eq!(t.th[id(&g, "u1")], 0.0);
        assert_eq!(t.th[id(&g, "u2")], 1.0);
        assert!(t.residual <= 1e-10 && t.monotone);
        assert!(t.substituted_residual(&g) <= 1e-10);
        assert_eq!(t.ordering_violation(&g), 0.0);
        let d = solve_double_reachability(&g, id(&g, "u1"), id(&g, "u2"), &SolveOptions::default()).unwrap();
        assert_eq!(d.th, t.th);
    }

    #[test]
    fn boundary_only_input() {
        let g = fixtures::loops();
        let b = BTreeMap::from([(0, 0.25), (1, 0.75)]);
        let t = solve_generalized_reachability(&g, &b, &SolveOptions::default()).unwrap();
        assert_eq!(t.th, vec![0.25, 0.75]);
        assert_eq!(t.sweeps, 0);
    }

    #[test]
    fn richman_midpoint() {
        let g = GameGraph::from_parts(
            &[("u1", q(0)), ("u2", q(0)), ("v", q(0))],
            &[("u1", "u1"), ("u2", "u2"), ("v", "u1"), ("v", "u2")],
        );
        let b = BTreeMap::from([(0, 0.0), (1, 1.0)]);
        let t = solve_generalized_reachability(&g, &b, &SolveOptions::default().richman()).unwrap();
        assert_eq!(t.th[2], 0.5);
        let c = solve_reachability(&fixtures::chain(), 0, &SolveOptions::default().richman()).unwrap();
        assert!((c.th[2] - 1.0 / 3.0).abs() < 1e-9 && (c.th[3] - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn unreachable_target_gets_one() {
        let g = GameGraph::from_parts(
            &[("t", q(0)), ("a", q(0)), ("b", q(0))],
            &[("t", "t"), ("a", "b"), ("b", "a")],
        );
        let t = solve_reachability(&g, id(&g, "t"), &SolveOptions::default()).unwrap();
        assert_eq!(t.th[id(&g, "a")], 1.0);
        assert_eq!(t.th[id(&g, "b")], 1.0);
        assert_eq!(t.th[id(&g, "t")], 0.0);
    }

    #[test]
    fn unreachable_boundary_is_an_error() {
        let g = GameGraph::from_parts(&[("a", q(0)), ("b", q(0))], &[("a", "a"), ("b", "b")]);
        let err = solve_generalized_reachability(&g, &BTreeMap::from([(0, 0.0)]), &SolveOptions::default());
        assert!(matches!(err, Err(ThresholdError::UnreachableBoundary(v)) if v == "b"));
    }

    #[test]
    fn complete_triangle_reachability() {
        let g = GameGraph::from_parts(
            &[("a", q(0)), ("b", q(0)), ("t", q(0))],
            &[("a", "a"), ("a", "b"), ("a", "t"), ("b", "a"), ("b", "b"), ("b", "t"), ("t", "t")],
        );
        let t = solve_reachability(&g, id(&g, "t"), &SolveOptions::default()).unwrap();
        assert!(t.substituted_residual(&g) <= 1e-8);
        assert_eq!(t.ordering_violation(&g), 0.0);
    }

    #[test]
    fn parity_classification() {
        let odd = fixtures::odd_scc();
        assert_eq!(classify_bscc(&odd, BsccObjective::Parity, 1e-10).unwrap(), q(0));
        let t = solve_parity(&odd, &SolveOptions::default()).unwrap();
        assert!(t.th.iter().all(|&x| x == 0.0));
        let even = odd.map_weights(|_, w| w.clone());
        let even = GameGraph::new(
            even.specs().into_iter().map(|s| s.with_parity(2)).collect(),
            even.edge_list(),
        )
        .unwrap();
        assert_eq!(classify_bscc(&even, BsccObjective::Parity, 1e-10).unwrap(), q(1));
        assert!(solve_parity(&even, &SolveOptions::default()).unwrap().th.iter().all(|&x| x == 1.0));
        assert!(solve_parity(&fixtures::loops(), &SolveOptions::default()).is_err());
    }

    #[test]
    fn parity_chain_reduces_to_the_chain() {
        let g = fixtures::parity_chain();
        let p = solve_parity(&g, &SolveOptions::default()).unwrap();
        let r = solve_reachability(&fixtures::chain(), 0, &SolveOptions::default()).unwrap();
        assert_eq!(p.th, r.th);
    }

    #[test]
    fn critical_ratios() {
        assert_eq!(critical_ratio(&fixtures::loops(), 1e-10).unwrap(), qf(1, 2));
        assert_eq!(critical_ratio(&fixtures::selfloop(q(-1)), 1e-10).unwrap(), q(1));
        assert_eq!(critical_ratio(&fixtures::selfloop(q(0)), 1e-10).unwrap(), q(0));
        let r = critical_ratio(&fixtures::loops_weighted(q(2), q(-1)), 1e-10).unwrap();
        assert!((to_f64(&r) - 1.0 / 3.0).abs() <= 1e-10);
        assert!(r >= qf(1, 3));
    }

    #[test]
    fn meanpayoff_thresholds() {
        let t = solve_meanpayoff_thresholds(&fixtures::loops(), &SolveOptions::default()).unwrap();
        assert_eq!(t.th, vec![0.5, 0.5]);
        let pos = fixtures::loops_weighted(q(1), q(1));
        assert_eq!(solve_meanpayoff_thresholds(&pos, &SolveOptions::default()).unwrap().th, vec![0.0, 0.0]);
        let g = fixtures::mp_two_bscc();
        let t = solve_meanpayoff_thresholds(&g, &SolveOptions::default()).unwrap();
        assert_eq!(t.th[id(&g, "a1")], 0.5);
        assert_eq!(t.th[id(&g, "n")], 1.0);
        assert!(t.substituted_residual(&g) <= 1e-10);
    }
}
