//! SMT-LIB 2 (QF_NRA) programs deciding whether Th(v) ≥ r for parity and
//! mean-payoff poorman games, plus a small s-expression reader and evaluator
//! used to audit emitted text.

use crate::graph::{require_parity, GameGraph, GraphError};
use crate::num::{fmt_q, parse_q, Q};
use crate::scc::bsccs;
use crate::stochastic::{scc_value, solve_game};
use crate::threshold::{classify_bscc, critical_ratio, BsccObjective, ThresholdError};
use crate::BudgetRatio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error)]
pub enum EtrError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error("ratio {0} is outside [0,1]")]
    BadRatio(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown symbol {0}")]
    Unknown(String),
}

/// A quantifier-free existential program over the reals.
#[derive(Debug, Clone, PartialEq)]
pub struct EtrProgram {
    pub comments: Vec<String>,
    pub vars: Vec<String>,
    pub asserts: Vec<Sexp>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn atom(s: impl Into<String>) -> Sexp {
    Sexp::Atom(s.into())
}

fn list(items: Vec<Sexp>) -> Sexp {
    Sexp::List(items)
}

fn op(name: &str, args: Vec<Sexp>) -> Sexp {
    let mut v = vec![atom(name)];
    v.extend(args);
    list(v)
}

/// Real literal: `3.0`, `(- 3.0)`, `(/ 3.0 5.0)`.
pub fn real(v: &Q) -> Sexp {
    let mag = v.abs();
    let body = if mag.is_integer() {
        atom(format!("{}.0", mag.numer()))
    } else {
        op("/", vec![atom(format!("{}.0", mag.numer())), atom(format!("{}.0", mag.denom()))])
    };
    if v.is_negative() {
        op("-", vec![body])
    } else {
        body
    }
}

impl std::fmt::Display for Sexp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(items) => {
                f.write_str("(")?;
                for (i, s) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl EtrProgram {
    fn new() -> Self {
        EtrProgram { comments: Vec::new(), vars: Vec::new(), asserts: Vec::new() }
    }

    fn var(&mut self, name: String) -> Sexp {
        if !self.vars.contains(&name) {
            self.vars.push(name.clone());
        }
        atom(name)
    }

    fn assert(&mut self, s: Sexp) {
        self.asserts.push(s);
    }

    pub fn to_smt2(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "; {c}");
        }
        s.push_str("(set-logic QF_NRA)\n");
        for v in &self.vars {
            let _ = writeln!(s, "(declare-fun {v} () Real)");
        }
        for a in &self.asserts {
            let _ = writeln!(s, "(assert {a})");
        }
        s.push_str("(check-sat)\n(exit)\n");
        s
    }
}

fn quoted(prefix: &str, id: &str) -> String {
    let clean: String = id.chars().map(|c| if c == '|' || c == '\\' { '_' } else { c }).collect();
    format!("|{prefix}:{clean}|")
}

fn xname(graph: &GameGraph, v: usize) -> String {
    quoted("x", graph.id(v))
}

/// Adds `out = max(args)` (or min) by ordering plus a disjunction of equalities.
fn extremum(p: &mut EtrProgram, out: &Sexp, args: &[Sexp], max: bool) {
    for a in args {
        let rel = if max { ">=" } else { "<=" };
        p.assert(op(rel, vec![out.clone(), a.clone()]));
    }
    let eqs: Vec<Sexp> = args.iter().map(|a| op("=", vec![out.clone(), a.clone()])).collect();
    p.assert(if eqs.len() == 1 { eqs[0].clone() } else { op("or", eqs) });
}

fn check_ratio(r: &Q) -> Result<(), EtrError> {
    if r.is_negative() || *r > Q::one() {
        return Err(EtrError::BadRatio(fmt_q(r)));
    }
    Ok(())
}

/// Interior vertices: x_u·(1 − x_{u⁻} + x_{u⁺}) = x_{u⁺} with u⁺/u⁻ defined
/// as max/min over successors.
fn propagate(p: &mut EtrProgram, graph: &GameGraph, pinned: &[bool]) {
    for u in 0..graph.len() {
        let x = p.var(xname(graph, u));
        p.assert(op("<=", vec![real(&Q::zero()), x.clone()]));
        p.assert(op("<=", vec![x.clone(), real(&Q::one())]));
    }
    for u in 0..graph.len() {
        if pinned[u] {
            continue;
        }
        let x = atom(xname(graph, u));
        let succ: Vec<Sexp> = graph.succ(u).iter().map(|&s| atom(xname(graph, s))).collect();
        let hi = p.var(quoted("hi", graph.id(u)));
        let lo = p.var(quoted("lo", graph.id(u)));
        extremum(p, &hi, &succ, true);
        extremum(p, &lo, &succ, false);
        let factor = op("+", vec![op("-", vec![real(&Q::one()), lo]), hi.clone()]);
        p.assert(op("=", vec![op("*", vec![x, factor]), hi]));
    }
}

fn query(p: &mut EtrProgram, graph: &GameGraph, v: usize, r: &Q) {
    p.assert(op(">=", vec![atom(xname(graph, v)), real(r)]));
}

/// Program satisfiable iff the parity threshold of `v` is at least `r`.
pub fn emit_parity_threshbud(graph: &GameGraph, v: usize, r: &Q) -> Result<EtrProgram, EtrError> {
    require_parity(graph)?;
    check_ratio(r)?;
    let mut p = EtrProgram::new();
    p.comments.push(format!("parity threshold query: x({}) >= {}", graph.id(v), fmt_q(r)));
    let mut pinned = vec![false; graph.len()];
    let mut fixed = Vec::new();
    for comp in bsccs(graph) {
        let alpha = classify_bscc(&graph.induced(&comp)?, BsccObjective::Parity, 0.0)?;
        for u in comp {
            pinned[u] = true;
            fixed.push((u, alpha.clone()));
        }
    }
    propagate(&mut p, graph, &pinned);
    for (u, alpha) in fixed {
        p.assert(op("=", vec![atom(xname(graph, u)), real(&alpha)]));
    }
    query(&mut p, graph, v, r);
    Ok(p)
}

/// A BSCC whose random-turn value vanishes on a whole interval of ratios.
/// Detected by the value being zero both at the critical ratio and halfway
/// between it and 1.
fn degenerate_ratio(sub: &GameGraph, tol: f64) -> Result<Option<Q>, EtrError> {
    if sub.all_weights_zero() {
        return Ok(Some(Q::zero()));
    }
    let rc = critical_ratio(sub, tol)?;
    let mid = (&rc + Q::one()) / Q::from_integer(2.into());
    let flat = scc_value(sub, &rc).map_err(ThresholdError::from)?.is_zero()
        && scc_value(sub, &mid).map_err(ThresholdError::from)?.is_zero();
    Ok(flat.then_some(rc))
}

/// Program satisfiable iff the mean-payoff threshold of `v` is at least `r`.
/// Each BSCC S gets a ratio variable x_S with the optimality equations
/// g + h_u = w(u) + x_S·max h + (1 − x_S)·min h, and x_S is where g crosses 0.
pub fn emit_mp_threshbud(graph: &GameGraph, v: usize, r: &Q) -> Result<EtrProgram, EtrError> {
    check_ratio(r)?;
    let mut p = EtrProgram::new();
    p.comments.push(format!("mean-payoff threshold query: x({}) >= {}", graph.id(v), fmt_q(r)));
    let mut pinned = vec![false; graph.len()];
    let comps = bsccs(graph);
    for comp in &comps {
        for &u in comp {
            pinned[u] = true;
        }
    }
    propagate(&mut p, graph, &pinned);
    for (i, comp) in comps.iter().enumerate() {
        let sub = graph.induced(comp)?;
        let xs = p.var(format!("|xS:{i}|"));
        for &u in comp {
            p.assert(op("=", vec![atom(xname(graph, u)), xs.clone()]));
        }
        if let Some(rc) = degenerate_ratio(&sub, 1e-12)? {
            p.comments.push(format!("component {i}: value is 0 on an interval, pinned to {}", fmt_q(&rc)));
            p.assert(op("=", vec![xs.clone(), real(&rc)]));
            continue;
        }
        let g = p.var(format!("|g:{i}|"));
        p.assert(op("<=", vec![real(&Q::zero()), xs.clone()]));
        p.assert(op("<=", vec![xs.clone(), real(&Q::one())]));
        let h = |u: usize| atom(quoted(&format!("h{i}"), graph.id(u)));
        for &u in comp {
            p.var(quoted(&format!("h{i}"), graph.id(u)));
        }
        for &u in comp {
            let succ: Vec<Sexp> = graph.succ(u).iter().map(|&s| h(s)).collect();
            let hi = p.var(quoted(&format!("hmax{i}"), graph.id(u)));
            let lo = p.var(quoted(&format!("hmin{i}"), graph.id(u)));
            extremum(&mut p, &hi, &succ, true);
            extremum(&mut p, &lo, &succ, false);
            let rhs = op(
                "+",
                vec![
                    real(graph.weight(u)),
                    op("*", vec![xs.clone(), hi]),
                    op("*", vec![op("-", vec![real(&Q::one()), xs.clone()]), lo]),
                ],
            );
            p.assert(op("=", vec![op("+", vec![g.clone(), h(u)]), rhs]));
        }
        let zero = real(&Q::zero());
        p.assert(op(
            "or",
            vec![
                op("=", vec![g.clone(), zero.clone()]),
                op("and", vec![op(">", vec![g.clone(), zero.clone()]), op("=", vec![xs.clone(), zero.clone()])]),
                op("and", vec![op("<", vec![g.clone(), zero.clone()]), op("=", vec![xs.clone(), real(&Q::one())])]),
            ],
        ));
    }
    query(&mut p, graph, v, r);
    Ok(p)
}

/// Parses SMT-LIB text into top-level s-expressions.
pub fn parse_sexps(text: &str) -> Result<Vec<Sexp>, EtrError> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ';' => {
                for d in chars.by_ref() {
                    if d == '\n' {
                        break;
                    }
                }
            }
            '(' => stack.push(Vec::new()),
            ')' => {
                let done = stack.pop().ok_or_else(|| EtrError::Parse("unbalanced ')'".into()))?;
                stack.last_mut().ok_or_else(|| EtrError::Parse("unbalanced ')'".into()))?.push(list(done));
            }
            c if c.is_whitespace() => {}
            '|' => {
                let mut s = String::from("|");
                loop {
                    match chars.next() {
                        Some('|') => break,
                        Some(d) => s.push(d),
                        None => return Err(EtrError::Parse("unterminated quoted symbol".into())),
                    }
                }
                s.push('|');
                stack.last_mut().expect("stack nonempty").push(atom(s));
            }
            c => {
                let mut s = String::from(c);
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || d == '(' || d == ')' || d == ';' {
                        break;
                    }
                    s.push(d);
                    chars.next();
                }
                stack.last_mut().expect("stack nonempty").push(atom(s));
            }
        }
    }
    if stack.len() != 1 {
        return Err(EtrError::Parse("unbalanced '('".into()));
    }
    Ok(stack.pop().expect("one level"))
}

/// Reads back emitted text, checking that every command is known and every
/// symbol in an assertion is declared.
pub fn parse_program(text: &str) -> Result<EtrProgram, EtrError> {
    let mut p = EtrProgram::new();
    for line in text.lines() {
        if let Some(c) = line.strip_prefix("; ") {
            p.comments.push(c.to_string());
        }
    }
    for cmd in parse_sexps(text)? {
        let Sexp::List(items) = &cmd else {
            return Err(EtrError::Parse(format!("stray atom {cmd}")));
        };
        match items.first() {
            Some(Sexp::Atom(h)) if h == "set-logic" || h == "check-sat" || h == "exit" => {}
            Some(Sexp::Atom(h)) if h == "declare-fun" => match items.as_slice() {
                [_, Sexp::Atom(name), Sexp::List(args), Sexp::Atom(sort)] if args.is_empty() && sort == "Real" => {
                    p.vars.push(name.clone())
                }
                _ => return Err(EtrError::Parse(format!("bad declaration {cmd}"))),
            },
            Some(Sexp::Atom(h)) if h == "assert" && items.len() == 2 => {
                check_symbols(&items[1], &p.vars)?;
                p.asserts.push(items[1].clone());
            }
            _ => return Err(EtrError::Parse(format!("unknown command {cmd}"))),
        }
    }
    Ok(p)
}

const OPS: &[&str] = &["and", "or", "not", "=", "<=", ">=", "<", ">", "+", "-", "*", "/", "true", "false"];

fn check_symbols(s: &Sexp, vars: &[String]) -> Result<(), EtrError> {
    match s {
        Sexp::List(items) => items.iter().try_for_each(|i| check_symbols(i, vars)),
        Sexp::Atom(a) => {
            if OPS.contains(&a.as_str()) || vars.contains(a) || a.parse::<f64>().is_ok() {
                Ok(())
            } else {
                Err(EtrError::Unknown(a.clone()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Val {
    Num(f64),
    Bool(bool),
}

fn eval(s: &Sexp, model: &BTreeMap<String, f64>, tol: f64) -> Result<Val, EtrError> {
    match s {
        Sexp::Atom(a) if a == "true" => Ok(Val::Bool(true)),
        Sexp::Atom(a) if a == "false" => Ok(Val::Bool(false)),
        Sexp::Atom(a) => match model.get(a) {
            Some(&x) => Ok(Val::Num(x)),
            None => a.parse::<f64>().map(Val::Num).map_err(|_| EtrError::Unknown(a.clone())),
        },
        Sexp::List(items) => {
            let Some(Sexp::Atom(h)) = items.first() else {
                return Err(EtrError::Parse(format!("bad term {s}")));
            };
            let args = items[1..].iter().map(|a| eval(a, model, tol)).collect::<Result<Vec<_>, _>>()?;
            let nums = || -> Result<Vec<f64>, EtrError> {
                args.iter()
                    .map(|v| match v {
                        Val::Num(x) => Ok(*x),
                        Val::Bool(_) => Err(EtrError::Parse(format!("boolean where a number is expected in {s}"))),
                    })
                    .collect()
            };
            let bools = || -> Result<Vec<bool>, EtrError> {
                args.iter()
                    .map(|v| match v {
                        Val::Bool(b) => Ok(*b),
                        Val::Num(_) => Err(EtrError::Parse(format!("number where a boolean is expected in {s}"))),
                    })
                    .collect()
            };
            Ok(match h.as_str() {
                "and" => Val::Bool(bools()?.iter().all(|&b| b)),
                "or" => Val::Bool(bools()?.iter().any(|&b| b)),
                "not" => Val::Bool(!bools()?[0]),
                "+" => Val::Num(nums()?.iter().sum()),
                "*" => Val::Num(nums()?.iter().product()),
                "-" => {
                    let n = nums()?;
                    Val::Num(if n.len() == 1 { -n[0] } else { n[0] - n[1..].iter().sum::<f64>() })
                }
                "/" => {
                    let n = nums()?;
                    Val::Num(n[1..].iter().fold(n[0], |a, b| a / b))
                }
                rel @ ("=" | "<=" | ">=" | "<" | ">") => {
                    let n = nums()?;
                    let ok = n.windows(2).all(|w| match rel {
                        "=" => (w[0] - w[1]).abs() <= tol,
                        "<=" => w[0] <= w[1] + tol,
                        ">=" => w[0] + tol >= w[1],
                        "<" => w[0] < w[1] + tol,
                        _ => w[0] + tol > w[1],
                    });
                    Val::Bool(ok)
                }
                other => return Err(EtrError::Unknown(other.to_string())),
            })
        }
    }
}

/// Indices of assertions violated by `model` (equalities up to `tol`).
pub fn violated(program: &EtrProgram, model: &BTreeMap<String, f64>, tol: f64) -> Result<Vec<usize>, EtrError> {
    let mut bad = Vec::new();
    for (i, a) in program.asserts.iter().enumerate() {
        if eval(a, model, tol)? != Val::Bool(true) {
            bad.push(i);
        }
    }
    Ok(bad)
}

/// Completes a vertex assignment with the auxiliary max/min variables of the
/// propagation block.
pub fn propagation_model(graph: &GameGraph, th: &[f64]) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    for u in 0..graph.len() {
        m.insert(xname(graph, u), th[u]);
        let vals = graph.succ(u).iter().map(|&s| th[s]);
        m.insert(quoted("hi", graph.id(u)), vals.clone().fold(f64::NEG_INFINITY, f64::max));
        m.insert(quoted("lo", graph.id(u)), vals.fold(f64::INFINITY, f64::min));
    }
    m
}

/// Witness for the mean-payoff block: per-BSCC ratio, gain and bias taken
/// from the stochastic solver at the critical ratio.
pub fn mp_model(graph: &GameGraph, th: &[f64], tol: f64) -> Result<BTreeMap<String, f64>, EtrError> {
    let mut m = propagation_model(graph, th);
    for (i, comp) in bsccs(graph).iter().enumerate() {
        let sub = graph.induced(comp)?;
        let rc = critical_ratio(&sub, tol)?;
        m.insert(format!("|xS:{i}|"), rc.to_f64().unwrap_or(0.0));
        let sol = solve_game(&sub, &BudgetRatio::new(rc.clone()).map_err(|_| EtrError::BadRatio(fmt_q(&rc)))?)
            .map_err(ThresholdError::from)?;
        m.insert(format!("|g:{i}|"), sol.values[0].to_f64().unwrap_or(0.0));
        for (k, &u) in comp.iter().enumerate() {
            m.insert(quoted(&format!("h{i}"), graph.id(u)), sol.bias[k].to_f64().unwrap_or(0.0));
        }
        for (k, &u) in comp.iter().enumerate() {
            let vals: Vec<f64> = sub.succ(k).iter().map(|&s| sol.bias[s].to_f64().unwrap_or(0.0)).collect();
            m.insert(quoted(&format!("hmax{i}"), graph.id(u)), vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            m.insert(quoted(&format!("hmin{i}"), graph.id(u)), vals.iter().cloned().fold(f64::INFINITY, f64::min));
        }
    }
    Ok(m)
}

/// Parses a query ratio such as `0.61` or `3/5`.
pub fn parse_ratio(s: &str) -> Result<Q, EtrError> {
    let r = parse_q(s).map_err(|e| EtrError::Parse(e.to_string()))?;
    check_ratio(&r)?;
    Ok(r)
}
