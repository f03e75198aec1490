//! Match execution on an exact dyadic ledger, with per-round records,
//! bookkeeping audit and the usual post-hoc statistics.

use crate::amount::Amount;
use crate::graph::GameGraph;
use crate::num::{cmp_q, fmt_q, lcm_denominators, to_f64, Q};
use crate::stochastic::PotentialTable;
use crate::strategy::{Outcome, PaymentRule, Side, Strategy, View, WalkCertificate};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum TieBreak {
    #[default]
    MinWins,
    MaxWins,
    /// Ties go to Min, Max, Min, … by tie occurrence.
    Alternate,
}

#[derive(Debug, Clone)]
pub struct MatchConfig {
    pub start: usize,
    pub budget_max: Q,
    pub budget_min: Q,
    pub rule: PaymentRule,
    pub tie: TieBreak,
    pub rounds: u64,
    pub seed: u64,
    pub initial_energy: Q,
    /// The play ends once the token enters one of these vertices.
    pub stop_at: Vec<usize>,
}

impl MatchConfig {
    pub fn new(start: usize, budget_max: Q, budget_min: Q, rounds: u64) -> Self {
        MatchConfig {
            start,
            budget_max,
            budget_min,
            rule: PaymentRule::Poorman,
            tie: TieBreak::MinWins,
            rounds,
            seed: 0,
            initial_energy: Q::zero(),
            stop_at: Vec::new(),
        }
    }

    pub fn rule(mut self, rule: PaymentRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn tie(mut self, tie: TieBreak) -> Self {
        self.tie = tie;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn energy(mut self, e: Q) -> Self {
        self.initial_energy = e;
        self
    }

    pub fn stop_at(mut self, targets: Vec<usize>) -> Self {
        self.stop_at = targets;
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize)]
pub enum SimError {
    #[error("IllegalBid: {side:?} bid {bid} above its budget {budget} in round {round}")]
    IllegalBid { side: Side, round: u64, bid: String, budget: String },
    #[error("IllegalMove: {side:?} moved to a non-successor in round {round}")]
    IllegalMove { side: Side, round: u64 },
    #[error("BadConfig: {0}")]
    BadConfig(String),
}

#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub round: u64,
    pub vertex: usize,
    pub bid_max: Amount,
    pub bid_min: Amount,
    pub winner: Side,
    pub next: usize,
    pub budget_max: Amount,
    pub budget_min: Amount,
    pub energy: Q,
    pub walk_x: Option<Q>,
}

#[derive(Debug, Clone)]
pub struct PlayTrace {
    /// Ledger amounts are budgets multiplied by this integer.
    pub scale: BigInt,
    pub start: usize,
    pub rule: PaymentRule,
    pub seed: u64,
    pub initial_budgets: (Amount, Amount),
    pub initial_energy: Q,
    pub records: Vec<RoundRecord>,
    pub rounds_played: u64,
    pub max_wins: u64,
    pub min_wins: u64,
    pub final_vertex: usize,
    pub final_budgets: (Amount, Amount),
    pub final_energy: Q,
    pub min_energy: Q,
    /// min over n ≥ N/2 of E(πⁿ)/n, where N is the configured horizon.
    pub tail_min: Option<Q>,
    /// max over n ≥ N/2 of E(πⁿ)/n.
    pub tail_max: Option<Q>,
    pub reached: Option<usize>,
    pub error: Option<SimError>,
    pub faults: Vec<String>,
}

impl PlayTrace {
    pub fn unscale(&self, a: &Amount) -> Q {
        a.to_q() / Q::from_integer(self.scale.clone())
    }

    /// Vertex sequence v₀, v₁, … of the recorded rounds.
    pub fn path(&self) -> Vec<usize> {
        let mut p = vec![self.start];
        p.extend(self.records.iter().map(|r| r.next));
        p
    }

    pub fn to_csv(&self, graph: &GameGraph) -> String {
        let mut s = String::from("round,vertex,bid1,bid2,winner,budget1,budget2,energy,walk_x\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.round,
                graph.id(r.vertex),
                fmt_q(&self.unscale(&r.bid_max)),
                fmt_q(&self.unscale(&r.bid_min)),
                match r.winner {
                    Side::Max => 1,
                    Side::Min => 2,
                },
                fmt_q(&self.unscale(&r.budget_max)),
                fmt_q(&self.unscale(&r.budget_min)),
                fmt_q(&r.energy),
                r.walk_x.as_ref().map(fmt_q).unwrap_or_default(),
            );
        }
        s
    }

    pub fn summary(&self, graph: &GameGraph) -> TraceSummary {
        TraceSummary {
            seed: self.seed,
            rounds: self.rounds_played,
            max_wins: self.max_wins,
            min_wins: self.min_wins,
            final_vertex: graph.id(self.final_vertex).to_string(),
            budget1: fmt_q(&self.unscale(&self.final_budgets.0)),
            budget2: fmt_q(&self.unscale(&self.final_budgets.1)),
            energy: fmt_q(&self.final_energy),
            min_energy: fmt_q(&self.min_energy),
            tail_min: self.tail_min.as_ref().map(fmt_q),
            reached: self.reached.map(|v| graph.id(v).to_string()),
            error: self.error.as_ref().map(|e| e.to_string()),
            faults: self.faults.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub seed: u64,
    pub rounds: u64,
    pub max_wins: u64,
    pub min_wins: u64,
    pub final_vertex: String,
    pub budget1: String,
    pub budget2: String,
    pub energy: String,
    pub min_energy: String,
    pub tail_min: Option<String>,
    pub reached: Option<String>,
    pub error: Option<String>,
    pub faults: Vec<String>,
}

/// Called after every round with the fresh record and both strategies.
pub trait Observer {
    fn round(&mut self, record: &RoundRecord, max: &dyn Strategy, min: &dyn Strategy);
}

impl<F: FnMut(&RoundRecord, &dyn Strategy, &dyn Strategy)> Observer for F {
    fn round(&mut self, record: &RoundRecord, max: &dyn Strategy, min: &dyn Strategy) {
        self(record, max, min)
    }
}

struct NoObserver;

impl Observer for NoObserver {
    fn round(&mut self, _: &RoundRecord, _: &dyn Strategy, _: &dyn Strategy) {}
}

pub fn run_match(graph: &GameGraph, cfg: &MatchConfig, max: &mut dyn Strategy, min: &mut dyn Strategy) -> PlayTrace {
    run_match_with(graph, cfg, max, min, &mut NoObserver, true)
}

pub fn run_match_with(
    graph: &GameGraph,
    cfg: &MatchConfig,
    max: &mut dyn Strategy,
    min: &mut dyn Strategy,
    observer: &mut dyn Observer,
    keep_records: bool,
) -> PlayTrace {
    let scale = lcm_denominators([&cfg.budget_max, &cfg.budget_min]);
    let to_ledger = |b: &Q| Amount::from_int((b * Q::from_integer(scale.clone())).to_integer());
    let mut own_max = to_ledger(&cfg.budget_max);
    let mut own_min = to_ledger(&cfg.budget_min);
    let mut trace = PlayTrace {
        scale: scale.clone(),
        start: cfg.start,
        rule: cfg.rule,
        seed: cfg.seed,
        initial_budgets: (own_max.clone(), own_min.clone()),
        initial_energy: cfg.initial_energy.clone(),
        records: Vec::new(),
        rounds_played: 0,
        max_wins: 0,
        min_wins: 0,
        final_vertex: cfg.start,
        final_budgets: (own_max.clone(), own_min.clone()),
        final_energy: cfg.initial_energy.clone(),
        min_energy: cfg.initial_energy.clone(),
        tail_min: None,
        tail_max: None,
        reached: None,
        error: None,
        faults: Vec::new(),
    };
    if cfg.budget_max.is_negative() || cfg.budget_min.is_negative() || (&cfg.budget_max + &cfg.budget_min).is_zero() {
        trace.error = Some(SimError::BadConfig("budgets must be nonnegative with a positive total".into()));
        return trace;
    }
    if cfg.start >= graph.len() {
        trace.error = Some(SimError::BadConfig("start vertex out of range".into()));
        return trace;
    }
    if cfg.stop_at.contains(&cfg.start) {
        trace.reached = Some(cfg.start);
        return trace;
    }
    let mut vertex = cfg.start;
    let mut energy = cfg.initial_energy.clone();
    let mut ties = 0u64;
    let tail_from = cfg.rounds.div_ceil(2).max(1);
    for round in 1..=cfg.rounds {
        let view_max = View {
            graph,
            round,
            vertex,
            side: Side::Max,
            own: &own_max,
            opp: &own_min,
            energy: &energy,
            rule: cfg.rule,
        };
        let view_min = View { side: Side::Min, own: &own_min, opp: &own_max, ..view_max };
        let bid_max = max.bid(&view_max);
        let bid_min = min.bid(&view_min);
        for (side, bid, own) in [(Side::Max, &bid_max, &own_max), (Side::Min, &bid_min, &own_min)] {
            if bid.is_negative() || bid > own {
                trace.error = Some(SimError::IllegalBid {
                    side,
                    round,
                    bid: fmt_q(&trace.unscale(bid)),
                    budget: fmt_q(&trace.unscale(own)),
                });
            }
        }
        if trace.error.is_some() {
            break;
        }
        let winner = match bid_max.cmp(&bid_min) {
            std::cmp::Ordering::Greater => Side::Max,
            std::cmp::Ordering::Less => Side::Min,
            std::cmp::Ordering::Equal => {
                ties += 1;
                match cfg.tie {
                    TieBreak::MinWins => Side::Min,
                    TieBreak::MaxWins => Side::Max,
                    TieBreak::Alternate if ties % 2 == 1 => Side::Min,
                    TieBreak::Alternate => Side::Max,
                }
            }
        };
        let (win_bid, lose_bid) = match winner {
            Side::Max => (&bid_max, &bid_min),
            Side::Min => (&bid_min, &bid_max),
        };
        let pay = match cfg.rule {
            PaymentRule::SecondPrice => lose_bid.clone(),
            _ => win_bid.clone(),
        };
        let (new_max, new_min) = {
            let (w, l) = match winner {
                Side::Max => (&own_max, &own_min),
                Side::Min => (&own_min, &own_max),
            };
            let w2 = w.sub(&pay);
            let l2 = if cfg.rule == PaymentRule::Richman { l.add(&pay) } else { l.clone() };
            match winner {
                Side::Max => (w2, l2),
                Side::Min => (l2, w2),
            }
        };
        let next = match winner {
            Side::Max => max.choose(&view_max),
            Side::Min => min.choose(&view_min),
        };
        if !graph.succ(vertex).contains(&next) {
            trace.error = Some(SimError::IllegalMove { side: winner, round });
            break;
        }
        let om = Outcome {
            view: view_max,
            own_bid: &bid_max,
            opp_bid: &bid_min,
            won: winner == Side::Max,
            next,
            own_after: &new_max,
            opp_after: &new_min,
        };
        max.observe(&om);
        let on = Outcome {
            view: view_min,
            own_bid: &bid_min,
            opp_bid: &bid_max,
            won: winner == Side::Min,
            next,
            own_after: &new_min,
            opp_after: &new_max,
        };
        min.observe(&on);
        energy += graph.weight(vertex);
        own_max = new_max;
        own_min = new_min;
        match winner {
            Side::Max => trace.max_wins += 1,
            Side::Min => trace.min_wins += 1,
        }
        if cmp_q(&energy, &trace.min_energy).is_lt() {
            trace.min_energy = energy.clone();
        }
        if round >= tail_from {
            let avg = Q::new_raw(energy.numer().clone(), energy.denom() * BigInt::from(round));
            if trace.tail_min.as_ref().is_none_or(|m| cmp_q(&avg, m).is_lt()) {
                trace.tail_min = Some(&energy / Q::from_integer(round.into()));
            }
            if trace.tail_max.as_ref().is_none_or(|m| cmp_q(&avg, m).is_gt()) {
                trace.tail_max = Some(&energy / Q::from_integer(round.into()));
            }
        }
        let record = RoundRecord {
            round,
            vertex,
            bid_max,
            bid_min,
            winner,
            next,
            budget_max: own_max.clone(),
            budget_min: own_min.clone(),
            energy: energy.clone(),
            walk_x: max.walk_x().or_else(|| min.walk_x()),
        };
        observer.round(&record, &*max, &*min);
        if keep_records {
            trace.records.push(record);
        }
        trace.rounds_played = round;
        vertex = next;
        if cfg.stop_at.contains(&next) {
            trace.reached = Some(next);
            break;
        }
    }
    trace.final_vertex = vertex;
    trace.final_budgets = (own_max, own_min);
    trace.final_energy = energy;
    trace.faults = max.faults().into_iter().chain(min.faults()).collect();
    trace
}

/// One finished match of a batch, with its walk audit when requested.
pub struct BatchRun {
    pub trace: PlayTrace,
    pub monitor: Option<WalkMonitor>,
}

/// Runs one match per seed in parallel. `make` builds fresh strategies per
/// seed; `monitor` names the side whose budget walk is audited.
pub fn run_batch<F>(
    graph: &GameGraph,
    cfg: &MatchConfig,
    seeds: &[u64],
    monitor: Option<Side>,
    keep_records: bool,
    make: F,
) -> Vec<BatchRun>
where
    F: Fn(u64) -> (Box<dyn Strategy>, Box<dyn Strategy>) + Sync,
{
    seeds
        .par_iter()
        .map(|&seed| {
            let (mut a, mut b) = make(seed);
            let c = cfg.clone().seed(seed);
            match monitor {
                Some(side) => {
                    let mut m = WalkMonitor::new(side);
                    let trace = run_match_with(graph, &c, a.as_mut(), b.as_mut(), &mut m, keep_records);
                    BatchRun { trace, monitor: Some(m) }
                }
                None => {
                    let trace = run_match_with(graph, &c, a.as_mut(), b.as_mut(), &mut NoObserver, keep_records);
                    BatchRun { trace, monitor: None }
                }
            }
        })
        .collect()
}

/// Checks every recorded round against the payment rule. Returns the first
/// offending round, if any.
pub fn audit_bookkeeping(trace: &PlayTrace) -> Result<(), u64> {
    let (mut bm, mut bn) = trace.initial_budgets.clone();
    for r in &trace.records {
        let (w_bid, l_bid) = match r.winner {
            Side::Max => (&r.bid_max, &r.bid_min),
            Side::Min => (&r.bid_min, &r.bid_max),
        };
        if w_bid < l_bid {
            return Err(r.round);
        }
        let pay = if trace.rule == PaymentRule::SecondPrice { l_bid } else { w_bid };
        let (w, l) = match r.winner {
            Side::Max => (&mut bm, &mut bn),
            Side::Min => (&mut bn, &mut bm),
        };
        *w = w.sub(pay);
        if trace.rule == PaymentRule::Richman {
            *l = l.add(pay);
        }
        if bm != r.budget_max || bn != r.budget_min || bm.is_negative() || bn.is_negative() {
            return Err(r.round);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathCheck {
    pub prefixes: usize,
    pub violations: usize,
    pub min_slack: Q,
}

/// Slack rhs − lhs of Pot(v₀) − Pot(vₙ) ≤ E(πⁿ) + ν·G(πⁿ) − I(πⁿ) for every
/// prefix of `path`, with weights shifted by the game value. Step i counts as
/// a Max win iff v_{i+1} = v_i⁺.
pub fn path_slacks(graph: &GameGraph, table: &PotentialTable, path: &[usize]) -> Vec<Q> {
    let mut out = Vec::with_capacity(path.len());
    let Some(&v0) = path.first() else {
        return out;
    };
    let mut rhs = Q::zero();
    out.push(rhs.clone());
    for w in path.windows(2) {
        let (v, u) = (w[0], w[1]);
        rhs += graph.weight(v) - &table.value;
        if u == table.plus[v] {
            rhs -= &table.strength[v];
        } else {
            rhs += &table.nu * &table.strength[v];
        }
        let lhs = &table.pot[v0] - &table.pot[u];
        out.push(&rhs - lhs);
    }
    out
}

pub fn check_path_inequality(graph: &GameGraph, trace: &PlayTrace, table: &PotentialTable) -> PathCheck {
    let slacks = path_slacks(graph, table, &trace.path());
    PathCheck {
        prefixes: slacks.len(),
        violations: slacks.iter().filter(|s| s.is_negative()).count(),
        min_slack: slacks.into_iter().min().unwrap_or_else(Q::zero),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanPayoffStats {
    pub per_trace: Vec<f64>,
    pub min: f64,
    pub mean: f64,
    pub std_dev: f64,
    /// Normal-approximation 95% band around the mean.
    pub band: (f64, f64),
}

/// Empirical lim-inf proxy: per trace, the minimum over n ≥ N/2 of E(πⁿ)/n.
pub fn estimate_meanpayoff(traces: &[PlayTrace]) -> MeanPayoffStats {
    meanpayoff_stats(traces.iter())
}

fn meanpayoff_stats<'a>(traces: impl Iterator<Item = &'a PlayTrace>) -> MeanPayoffStats {
    let per_trace: Vec<f64> = traces.map(|t| t.tail_min.as_ref().map(to_f64).unwrap_or(0.0)).collect();
    let k = per_trace.len().max(1) as f64;
    let mean = per_trace.iter().sum::<f64>() / k;
    let var = per_trace.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    let std_dev = var.sqrt();
    let half = 1.96 * std_dev / k.sqrt();
    MeanPayoffStats {
        min: per_trace.iter().cloned().fold(f64::INFINITY, f64::min),
        mean,
        std_dev,
        band: (mean - half, mean + half),
        per_trace,
    }
}

#[derive(Serialize)]
pub struct BatchSummary<'a> {
    pub rule: PaymentRule,
    pub tie: TieBreak,
    pub rounds: u64,
    pub start: &'a str,
    pub budgets: [String; 2],
    pub runs: Vec<TraceSummary>,
    pub meanpayoff: MeanPayoffStats,
    pub illegal_bids: usize,
    pub bookkeeping_failures: usize,
    pub faults: usize,
    pub walk_violations: u64,
}

pub fn batch_summary_json(graph: &GameGraph, cfg: &MatchConfig, runs: &[BatchRun]) -> String {
    let traces = || runs.iter().map(|r| &r.trace);
    let s = BatchSummary {
        rule: cfg.rule,
        tie: cfg.tie,
        rounds: cfg.rounds,
        start: graph.id(cfg.start),
        budgets: [fmt_q(&cfg.budget_max), fmt_q(&cfg.budget_min)],
        runs: traces().map(|t| t.summary(graph)).collect(),
        meanpayoff: meanpayoff_stats(traces()),
        illegal_bids: traces().filter(|t| matches!(t.error, Some(SimError::IllegalBid { .. }))).count(),
        bookkeeping_failures: traces().filter(|t| audit_bookkeeping(t).is_err()).count(),
        faults: traces().map(|t| t.faults.len()).sum(),
        walk_violations: runs.iter().filter_map(|r| r.monitor.as_ref()).map(|m| m.violations()).sum(),
    };
    serde_json::to_string_pretty(&s).expect("serializable") + "\n"
}

/// Audits a budget-walk player after every round: the ratio invariant
/// own/opp > ν_x, x > 0, and the energy lower bound −P − S·κ·max(1, ν)
/// on the value-shifted energy in the walker's orientation.
#[derive(Debug, Clone, Default, Serialize)]
pub struct WalkMonitor {
    pub side: Option<Side>,
    pub rounds: u64,
    pub ratio_violations: u64,
    pub x_violations: u64,
    pub energy_violations: u64,
    pub missing: u64,
    /// Smallest observed energy minus the bound.
    pub min_energy_margin: Option<f64>,
    /// The walker's certificate and energy bound, fixed once play starts.
    #[serde(skip)]
    cert: Option<(WalkCertificate, Q)>,
    #[serde(skip)]
    lowest: Option<Q>,
}

impl WalkMonitor {
    pub fn new(side: Side) -> Self {
        WalkMonitor { side: Some(side), ..Default::default() }
    }

    pub fn violations(&self) -> u64 {
        self.ratio_violations + self.x_violations + self.energy_violations + self.missing
    }
}

impl Observer for WalkMonitor {
    fn round(&mut self, r: &RoundRecord, max: &dyn Strategy, min: &dyn Strategy) {
        let side = self.side.unwrap_or(Side::Max);
        let (walker, own, opp) = match side {
            Side::Max => (max, &r.budget_max, &r.budget_min),
            Side::Min => (min, &r.budget_min, &r.budget_max),
        };
        self.rounds += 1;
        if self.cert.is_none() {
            self.cert = walker.walk_certificate().map(|c| {
                let bound = c.energy_bound();
                (c, bound)
            });
        }
        let (Some(x), Some((cert, bound))) = (walker.walk_x(), self.cert.as_ref()) else {
            self.missing += 1;
            return;
        };
        if !x.is_positive() {
            self.x_violations += 1;
            return;
        }
        let nu_x = crate::strategy::walk::nu_at_raw(&cert.nu, &x);
        if own.excess_log2(opp, &nu_x).is_none() {
            self.ratio_violations += 1;
        }
        let oriented = match side {
            Side::Max => r.energy.clone(),
            Side::Min => -r.energy.clone(),
        };
        // energy − value·round, left unreduced; only compared and, on a new low, converted
        let shifted = if cert.value.is_zero() {
            oriented
        } else {
            let (v, o) = (&cert.value, &oriented);
            Q::new_raw(
                o.numer() * v.denom() - v.numer() * BigInt::from(r.round) * o.denom(),
                o.denom() * v.denom(),
            )
        };
        if cmp_q(&shifted, bound).is_lt() {
            self.energy_violations += 1;
        }
        if self.lowest.as_ref().is_none_or(|low| cmp_q(&shifted, low).is_lt()) {
            self.min_energy_margin = Some(to_f64(&(&shifted - bound)));
            self.lowest = Some(shifted);
        }
    }
}
