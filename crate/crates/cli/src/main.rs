use clap::{Parser, Subcommand, ValueEnum};
use poorman::auction::{build_auction_game, AuctionSpec};
use poorman::etr::{emit_mp_threshbud, emit_parity_threshbud};
use poorman::num::{fmt_q, parse_q, Q};
use poorman::scc::is_strongly_connected;
use poorman::sim::{batch_summary_json, run_batch, MatchConfig, SimError, TieBreak};
use poorman::stochastic::{potentials, solve_game};
use poorman::strategy::roster::{Arena, StrategySpec};
use poorman::strategy::{PaymentRule, Side};
use poorman::threshold::{
    solve_meanpayoff_thresholds, solve_parity, solve_reachability, SolveOptions, ThresholdError,
};
use poorman::{BudgetRatio, GameGraph};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "poorman", version, about = "Poorman bidding games: thresholds, values, strategies, simulation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reachability thresholds towards a target vertex.
    SolveReachability {
        game: PathBuf,
        #[arg(long, default_value = "u1")]
        target: String,
        #[arg(long)]
        tol: Option<f64>,
        /// Use the Richman (averaging) recurrence instead of the poorman one.
        #[arg(long)]
        richman: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parity thresholds.
    SolveParity {
        game: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean-payoff thresholds.
    SolveMp {
        game: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean-payoff value of the random-turn game at a ratio, with potentials.
    Value {
        game: PathBuf,
        #[arg(long)]
        ratio: String,
        /// Allow games that are not strongly connected (per-vertex values only).
        #[arg(long)]
        general: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play matches between two strategies.
    Simulate {
        game: PathBuf,
        #[arg(long, default_value = "walk")]
        max: String,
        #[arg(long, default_value = "queue")]
        min: String,
        #[arg(long, num_args = 2, value_names = ["B1", "B2"], default_values = ["11", "9"])]
        budgets: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        rounds: u64,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// First seed; runs use seed, seed+1, …
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Rule::Poorman)]
        rule: Rule,
        #[arg(long, value_enum, default_value_t = Tie::Min)]
        tie: Tie,
        /// Start vertex; defaults to the first vertex id.
        #[arg(long)]
        start: Option<String>,
        #[arg(long, default_value = "0")]
        energy: String,
        /// Stop once the token reaches this vertex.
        #[arg(long)]
        stop_at: Option<String>,
        /// CSV trace path; with several seeds the seed is appended to the file stem.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Summary JSON path; stdout when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// SMT-LIB (QF_NRA) program deciding Th(v) ≥ r.
    ExportEtr {
        game: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        ratio: String,
        #[arg(long, value_enum)]
        objective: Option<Objective>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ad-slot auction game from a reward table.
    Auction {
        #[arg(long)]
        slots: usize,
        #[arg(long)]
        rewards: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Poorman,
    Richman,
    SecondPrice,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tie {
    Min,
    Max,
    Alternate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Parity,
    Mp,
}

struct Failure {
    code: u8,
    msg: String,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, msg: e.to_string() }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::from(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn options(tol: Option<f64>) -> Result<SolveOptions, Failure> {
    let o = SolveOptions::from_env()?;
    match tol {
        Some(t) if t > 0.0 && t.is_finite() => Ok(o.with_tol(t)),
        Some(t) => Err(ThresholdError::BadTolerance(t.to_string()).into()),
        None => Ok(o),
    }
}

fn ratio(s: &str) -> Result<BudgetRatio, Failure> {
    let r = parse_q(s).map_err(|e| Failure::from(format!("ratio '{s}': {e}")))?;
    Ok(BudgetRatio::new(r)?)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn value_cmd(g: &GameGraph, r: &BudgetRatio, general: bool) -> Result<String, Failure> {
    if !is_strongly_connected(g) {
        if !general {
            return Err("NotStronglyConnected: pass --general for per-vertex values".into());
        }
        let sol = solve_game(g, r)?;
        let values: serde_json::Map<String, serde_json::Value> =
            g.ids().iter().zip(&sol.values).map(|(id, v)| (id.clone(), json!(fmt_q(v)))).collect();
        return Ok(pretty(&json!({ "ratio": fmt_q(r.value()), "values": values })));
    }
    match potentials(g, r) {
        Ok(table) => Ok(table.to_json()),
        Err(_) => {
            // r ∈ {0, 1}: the random-turn game is a one-player graph game
            let sol = solve_game(g, r)?;
            Ok(pretty(&json!({ "ratio": fmt_q(r.value()), "value": fmt_q(&sol.values[0]) })))
        }
    }
}

fn with_seed(path: &Path, seed: u64) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{seed}"),
    };
    path.with_file_name(name)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::SolveReachability { game, target, tol, richman, out } => {
            let g = GameGraph::load(&game)?;
            let mut o = options(tol)?;
            if richman {
                o = o.richman();
            }
            let th = solve_reachability(&g, g.vertex(&target)?, &o)?;
            emit(&out, &th.to_json())
        }
        Cmd::SolveParity { game, tol, out } => {
            let g = GameGraph::load(&game)?;
            emit(&out, &solve_parity(&g, &options(tol)?)?.to_json())
        }
        Cmd::SolveMp { game, tol, out } => {
            let g = GameGraph::load(&game)?;
            emit(&out, &solve_meanpayoff_thresholds(&g, &options(tol)?)?.to_json())
        }
        Cmd::Value { game, ratio: r, general, out } => {
            let g = GameGraph::load(&game)?;
            emit(&out, &value_cmd(&g, &ratio(&r)?, general)?)
        }
        Cmd::Simulate {
            game,
            max,
            min,
            budgets,
            rounds,
            seeds,
            seed,
            rule,
            tie,
            start,
            energy,
            stop_at,
            trace,
            summary,
        } => {
            let g = GameGraph::load(&game)?;
            let max: StrategySpec = max.parse()?;
            let min: StrategySpec = min.parse()?;
            let b1 = parse_q(&budgets[0]).map_err(|e| Failure::from(format!("budget '{}': {e}", budgets[0])))?;
            let b2 = parse_q(&budgets[1]).map_err(|e| Failure::from(format!("budget '{}': {e}", budgets[1])))?;
            if b1 < Q::from_integer(0.into()) || b2 < Q::from_integer(0.into()) || (&b1 + &b2) == Q::from_integer(0.into()) {
                return Err("budgets must be nonnegative with a positive total".into());
            }
            let start = match start {
                Some(id) => g.vertex(&id)?,
                None => 0,
            };
            let stop = match (&stop_at, &max) {
                (Some(id), _) => vec![g.vertex(id)?],
                (None, StrategySpec::Slush(id)) => vec![g.vertex(id)?],
                _ => Vec::new(),
            };
            let cfg = MatchConfig::new(start, b1, b2, rounds)
                .rule(match rule {
                    Rule::Poorman => PaymentRule::Poorman,
                    Rule::Richman => PaymentRule::Richman,
                    Rule::SecondPrice => PaymentRule::SecondPrice,
                })
                .tie(match tie {
                    Tie::Min => TieBreak::MinWins,
                    Tie::Max => TieBreak::MaxWins,
                    Tie::Alternate => TieBreak::Alternate,
                })
                .energy(parse_q(&energy).map_err(|e| Failure::from(format!("energy '{energy}': {e}")))?)
                .stop_at(stop);
            let arena = Arena::new(&g);
            // fail early on unresolvable strategies
            arena.build(&max, Side::Max, seed)?;
            arena.build(&min, Side::Min, seed)?;
            let monitor = match (&max, &min) {
                (StrategySpec::Walk(_), _) => Some(Side::Max),
                (_, StrategySpec::Walk(_)) => Some(Side::Min),
                _ => None,
            };
            let seed_list: Vec<u64> = (seed..seed + seeds.max(1)).collect();
            let runs = run_batch(&g, &cfg, &seed_list, monitor, trace.is_some(), |s| {
                (
                    arena.build(&max, Side::Max, s).expect("checked above"),
                    arena.build(&min, Side::Min, s).expect("checked above"),
                )
            });
            if let Some(path) = &trace {
                for r in &runs {
                    let p = if runs.len() == 1 { path.clone() } else { with_seed(path, r.trace.seed) };
                    std::fs::write(&p, r.trace.to_csv(&g)).map_err(|e| Failure::from(format!("{}: {e}", p.display())))?;
                }
            }
            emit(&summary, &batch_summary_json(&g, &cfg, &runs))?;
            if let Some(SimError::IllegalBid { side, round, .. }) =
                runs.iter().find_map(|r| r.trace.error.clone().filter(|e| matches!(e, SimError::IllegalBid { .. })))
            {
                return Err(Failure { code: 3, msg: format!("IllegalBid by {side:?} in round {round}") });
            }
            Ok(())
        }
        Cmd::ExportEtr { game, vertex, ratio: r, objective, out } => {
            let g = GameGraph::load(&game)?;
            let v = g.vertex(&vertex)?;
            let r = ratio(&r)?.value().clone();
            let objective = objective.unwrap_or(if g.has_parity() { Objective::Parity } else { Objective::Mp });
            let p = match objective {
                Objective::Parity => emit_parity_threshbud(&g, v, &r)?,
                Objective::Mp => emit_mp_threshbud(&g, v, &r)?,
            };
            emit(&out, &p.to_smt2())
        }
        Cmd::Auction { slots, rewards, out } => {
            let text = std::fs::read_to_string(&rewards).map_err(|e| Failure::from(format!("{}: {e}", rewards.display())))?;
            let mut spec = AuctionSpec::from_json(&text)?;
            if spec.slots != slots {
                return Err(format!("reward file describes {} slots, --slots is {slots}", spec.slots).into());
            }
            spec.slots = slots;
            emit(&out, &build_auction_game(&spec)?.to_json())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
