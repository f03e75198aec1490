//! Browser bindings. Every export takes and returns JSON strings; the
//! `*_json` functions hold the logic and run natively in tests.

use poorman::num::{fmt_q, parse_q, to_f64, Q};
use poorman::scc::is_strongly_connected;
use poorman::sim::{run_match_with, MatchConfig, RoundRecord, WalkMonitor};
use poorman::stochastic::scc_value;
use poorman::strategy::roster::{Arena, StrategySpec};
use poorman::strategy::{Side, Strategy};
use poorman::threshold::{solve_meanpayoff_thresholds, solve_parity, solve_reachability, SolveOptions, DEFAULT_TOL};
use poorman::{fixtures, GameGraph};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Longest series handed to the page; longer plays are subsampled.
const MAX_POINTS: usize = 600;

fn load(game: &str) -> Result<GameGraph, String> {
    GameGraph::from_json(game).map_err(|e| e.to_string())
}

pub fn fixture_json(name: &str) -> Result<String, String> {
    fixtures::by_name(name).map(|g| g.to_json()).ok_or_else(|| format!("no fixture named '{name}'"))
}

/// MP(RT^r(G)) at `steps − 1` evenly spaced ratios, with the critical ratio.
pub fn value_curve_json(game: &str, steps: u32) -> Result<String, String> {
    let g = load(game)?;
    if !is_strongly_connected(&g) {
        return Err("the value curve needs a strongly connected game".into());
    }
    let steps = steps.clamp(2, 200);
    let mut points = Vec::new();
    for i in 1..steps {
        let r = Q::new(i.into(), steps.into());
        let v = scc_value(&g, &r).map_err(|e| e.to_string())?;
        points.push(json!({ "r": to_f64(&r), "value": to_f64(&v), "exact": fmt_q(&v) }));
    }
    let critical = poorman::threshold::critical_ratio(&g, DEFAULT_TOL).map_err(|e| e.to_string())?;
    Ok(json!({ "points": points, "critical": to_f64(&critical) }).to_string())
}

/// Threshold map for `objective` ∈ {reachability, parity, mp}.
pub fn thresholds_json(game: &str, objective: &str, target: &str) -> Result<String, String> {
    let g = load(game)?;
    let opts = SolveOptions::default();
    let th = match objective {
        "reachability" => solve_reachability(&g, g.vertex(target).map_err(|e| e.to_string())?, &opts),
        "parity" => solve_parity(&g, &opts),
        "mp" => solve_meanpayoff_thresholds(&g, &opts),
        other => return Err(format!("unknown objective '{other}'")),
    }
    .map_err(|e| e.to_string())?;
    Ok(th.to_json())
}

/// Plays Max's budget walk against `adversary` from a Max share of `share`.
pub fn walk_play_json(game: &str, share: &str, adversary: &str, rounds: u32, seed: u32) -> Result<String, String> {
    let g = load(game)?;
    let share = parse_q(share).map_err(|e| format!("share: {e}"))?;
    if share <= Q::from_integer(0.into()) || share >= Q::from_integer(1.into()) {
        return Err("share must lie strictly between 0 and 1".into());
    }
    let adversary: StrategySpec = adversary.parse().map_err(|e: poorman::strategy::roster::RosterError| e.to_string())?;
    let arena = Arena::new(&g);
    let mut max = arena.build(&StrategySpec::Walk(None), Side::Max, seed as u64).map_err(|e| e.to_string())?;
    let mut min = arena.build(&adversary, Side::Min, seed as u64).map_err(|e| e.to_string())?;
    let rounds = rounds.clamp(1, 200_000) as u64;
    let every = (rounds as usize).div_ceil(MAX_POINTS) as u64;
    let cfg = MatchConfig::new(0, share.clone(), Q::from_integer(1.into()) - share, rounds).seed(seed as u64);
    let mut monitor = WalkMonitor::new(Side::Max);
    let mut series = Vec::new();
    let mut watch = |r: &RoundRecord, a: &dyn Strategy, b: &dyn Strategy| {
        poorman::sim::Observer::round(&mut monitor, r, a, b);
        if r.round.is_multiple_of(every) || r.round == rounds {
            let total = r.budget_max.add(&r.budget_min);
            let share = if total.is_zero() { 0.5 } else { r.budget_max.to_f64() / total.to_f64() };
            series.push(json!({
                "round": r.round,
                "energy": to_f64(&r.energy),
                "share": share,
                "x": r.walk_x.as_ref().map(to_f64),
            }));
        }
    };
    let trace = run_match_with(&g, &cfg, max.as_mut(), min.as_mut(), &mut watch, false);
    Ok(json!({
        "rounds": trace.rounds_played,
        "max_wins": trace.max_wins,
        "min_wins": trace.min_wins,
        "tail_min": trace.tail_min.as_ref().map(to_f64),
        "error": trace.error.as_ref().map(|e| e.to_string()),
        "faults": trace.faults.len(),
        "monitor": monitor,
        "series": series,
    })
    .to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn fixture(name: &str) -> Result<String, JsValue> {
    js(fixture_json(name))
}

#[wasm_bindgen(js_name = valueCurve)]
pub fn value_curve(game: &str, steps: u32) -> Result<String, JsValue> {
    js(value_curve_json(game, steps))
}

#[wasm_bindgen]
pub fn thresholds(game: &str, objective: &str, target: &str) -> Result<String, JsValue> {
    js(thresholds_json(game, objective, target))
}

#[wasm_bindgen(js_name = walkPlay)]
pub fn walk_play(game: &str, share: &str, adversary: &str, rounds: u32, seed: u32) -> Result<String, JsValue> {
    js(walk_play_json(game, share, adversary, rounds, seed))
}
