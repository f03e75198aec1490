//! Warm-up and slush-fund strategies played against the adversary suite.

use poorman::fixtures;
use poorman::gen;
use poorman::num::{from_f64, q, qf, Q};
use poorman::sim::{audit_bookkeeping, run_match, MatchConfig};
use poorman::strategy::roster::{adversary_suite, Arena, StrategySpec};
use poorman::strategy::{PaymentRule, Side};
use poorman::threshold::{solve_reachability, SolveOptions};

#[test]
fn warmup_keeps_energy_positive() {
    let g = fixtures::loops();
    let arena = Arena::new(&g);
    let v2 = g.vertex("v2").unwrap();
    for k in 1..=6i64 {
        let share = qf(k + 2, 2 * k + 2) + qf(1, 100);
        for (i, adv) in adversary_suite().iter().enumerate() {
            let mut max = arena.build(&StrategySpec::Warmup, Side::Max, i as u64).unwrap();
            let mut min = arena.build(adv, Side::Min, i as u64).unwrap();
            // the first counted weight is v2's −1, so play opens at energy k
            let cfg = MatchConfig::new(v2, share.clone(), Q::from(q(1)) - &share, 20_000).energy(q(k + 1)).seed(i as u64);
            let trace = run_match(&g, &cfg, max.as_mut(), min.as_mut());
            assert!(trace.error.is_none(), "k={k} {adv:?}: {:?}", trace.error);
            assert!(trace.faults.is_empty(), "k={k} {adv:?}: {:?}", trace.faults);
            assert!(trace.min_energy > q(0), "k={k} {adv:?}");
            assert_eq!(audit_bookkeeping(&trace), Ok(()));
        }
    }
}

#[test]
fn warmup_below_threshold_is_flagged() {
    let g = fixtures::loops();
    let arena = Arena::new(&g);
    let mut max = arena.build(&StrategySpec::Warmup, Side::Max, 0).unwrap();
    let mut min = arena.build(&StrategySpec::Queue(1), Side::Min, 0).unwrap();
    // at energy 1 Max needs a share above 3/4
    let cfg = MatchConfig::new(g.vertex("v2").unwrap(), qf(7, 10), qf(3, 10), 100).energy(q(2));
    let trace = run_match(&g, &cfg, max.as_mut(), min.as_mut());
    assert!(!trace.faults.is_empty());
}

fn slush_reaches(g: &poorman::GameGraph, target: &str, start: usize, margin: f64, rule: PaymentRule) {
    let t = g.vertex(target).unwrap();
    let th = solve_reachability(g, t, &SolveOptions::default()).unwrap();
    if th.th[start] + margin >= 1.0 {
        return;
    }
    let share = from_f64(th.th[start] + margin);
    let arena = Arena::new(g);
    for (i, adv) in adversary_suite().iter().enumerate() {
        let mut max = arena.build(&StrategySpec::Slush(target.into()), Side::Max, 0).unwrap();
        let mut min = arena.build(adv, Side::Min, i as u64).unwrap();
        let cfg = MatchConfig::new(start, share.clone(), q(1) - &share, 5_000).rule(rule).stop_at(vec![t]).seed(i as u64);
        let trace = run_match(g, &cfg, max.as_mut(), min.as_mut());
        assert!(trace.error.is_none(), "{adv:?}: {:?}", trace.error);
        assert!(trace.faults.is_empty(), "{adv:?}: {:?}", trace.faults);
        assert_eq!(trace.reached, Some(t), "{adv:?} from {}", g.id(start));
    }
}

#[test]
fn slush_fund_reaches_the_target_on_the_chain() {
    let g = fixtures::chain();
    for v in ["v1", "v2"] {
        slush_reaches(&g, "u1", g.vertex(v).unwrap(), 0.02, PaymentRule::Poorman);
        slush_reaches(&g, "u1", g.vertex(v).unwrap(), 0.02, PaymentRule::SecondPrice);
    }
}

#[test]
fn slush_fund_on_random_double_reachability() {
    let mut rng = gen::rng(77);
    for _ in 0..5 {
        let (g, t1, _) = gen::random_double_reach(&mut rng, 6);
        let target = g.id(t1).to_string();
        for start in 2..g.len() {
            slush_reaches(&g, &target, start, 0.05, PaymentRule::Poorman);
        }
    }
}
