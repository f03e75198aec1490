//! Exported programs: round-trip, witness models, and (when z3 is on PATH)
//! satisfiability on both sides of the threshold.

use poorman::etr::{emit_mp_threshbud, emit_parity_threshbud, mp_model, parse_program, propagation_model, violated, EtrProgram};
use poorman::fixtures;
use poorman::num::qf;
use poorman::threshold::{solve_meanpayoff_thresholds, solve_parity, SolveOptions};
use std::io::Write;
use std::process::{Command, Stdio};

fn z3(program: &EtrProgram) -> Option<String> {
    let mut child = Command::new("z3").args(["-in", "-smt2"]).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().ok()?;
    child.stdin.take()?.write_all(program.to_smt2().as_bytes()).ok()?;
    let out = child.wait_with_output().ok()?;
    Some(String::from_utf8_lossy(&out.stdout).trim().to_string())
}

#[test]
fn programs_round_trip() {
    let g = fixtures::parity_chain();
    let p = emit_parity_threshbud(&g, g.vertex("v2").unwrap(), &qf(61, 100)).unwrap();
    let text = p.to_smt2();
    assert!(text.starts_with("; parity threshold query"));
    assert_eq!(parse_program(&text).unwrap().to_smt2(), text);
    let g = fixtures::mp_two_bscc();
    let p = emit_mp_threshbud(&g, g.vertex("v1").unwrap(), &qf(1, 2)).unwrap();
    assert_eq!(parse_program(&p.to_smt2()).unwrap().to_smt2(), p.to_smt2());
}

#[test]
fn solver_thresholds_satisfy_the_encoding() {
    let g = fixtures::parity_chain();
    let th = solve_parity(&g, &SolveOptions::default()).unwrap();
    let v2 = g.vertex("v2").unwrap();
    let model = propagation_model(&g, &th.th);
    let below = emit_parity_threshbud(&g, v2, &qf(61, 100)).unwrap();
    assert!(violated(&below, &model, 1e-8).unwrap().is_empty());
    let above = emit_parity_threshbud(&g, v2, &qf(63, 100)).unwrap();
    assert_eq!(violated(&above, &model, 1e-8).unwrap().len(), 1);

    let g = fixtures::mp_two_bscc();
    let th = solve_meanpayoff_thresholds(&g, &SolveOptions::default()).unwrap();
    let model = mp_model(&g, &th.th, 1e-9).unwrap();
    for v in 0..g.len() {
        let p = emit_mp_threshbud(&g, v, &qf(1, 100)).unwrap();
        assert!(violated(&p, &model, 1e-6).unwrap().is_empty(), "vertex {v}");
    }
}

#[test]
fn z3_decides_both_sides() {
    let g = fixtures::parity_chain();
    let v2 = g.vertex("v2").unwrap();
    let Some(sat) = z3(&emit_parity_threshbud(&g, v2, &qf(61, 100)).unwrap()) else {
        eprintln!("z3 not found; skipping");
        return;
    };
    assert_eq!(sat, "sat");
    assert_eq!(z3(&emit_parity_threshbud(&g, v2, &qf(63, 100)).unwrap()).unwrap(), "unsat");
    let v1 = g.vertex("v1").unwrap();
    assert_eq!(z3(&emit_parity_threshbud(&g, v1, &qf(38, 100)).unwrap()).unwrap(), "sat");
    assert_eq!(z3(&emit_parity_threshbud(&g, v1, &qf(39, 100)).unwrap()).unwrap(), "unsat");

    let g = fixtures::loops();
    let v1 = g.vertex("v1").unwrap();
    assert_eq!(z3(&emit_mp_threshbud(&g, v1, &qf(49, 100)).unwrap()).unwrap(), "sat");
    assert_eq!(z3(&emit_mp_threshbud(&g, v1, &qf(51, 100)).unwrap()).unwrap(), "unsat");

    let g = fixtures::odd_scc();
    assert_eq!(z3(&emit_parity_threshbud(&g, 0, &qf(1, 100)).unwrap()).unwrap(), "unsat");
}
