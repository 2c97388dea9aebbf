//! Acceptance gate: seven criteria, one PASS/FAIL line each.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use absint::analyzer::{analyze, interval_memory, AnalysisConfig};
use absint::concrete::DEFAULT_STATE_BUDGET;
use absint::difftest::laws::{
    backward_battery, forward_battery, memory_lattice_battery, memory_transfer_battery,
    interval_lattice_battery, LawReport,
};
use absint::difftest::{check_soundness_with, CheckError, Mutant};
use absint::domain::{AbstractDomain, FixStats, Lattice, NumDomain};
use absint::interval::{all_intervals, IntervalDomain, Itv, UBool};
use absint::lang::{gen_batch, parse, Expr, GenConfig, VarId};
use absint::machine_int::{BinOp, Width};
use absint::memory::AMem;

const PROGRAMS: usize = 1000;
const PROGRAM_SEED: u64 = 7;
const BACKWARD_TRIPLES: usize = 10_000;
const BACKWARD_SEED: u64 = 2024;
const TRANSFER_SAMPLES: usize = 3_000;

fn w(bits: u32) -> Width {
    Width::new(bits).unwrap()
}

/// What a criterion run observed.
#[derive(Default)]
struct Outcome {
    passed: bool,
    detail: String,
    fixpoint_errors: u64,
    fixpoints_run: u64,
}

struct EndToEnd {
    checked: usize,
    violations: Vec<String>,
    errors: Vec<String>,
    budget_errors: usize,
    stats: FixStats,
}

fn end_to_end(config: &AnalysisConfig, stop_early: bool) -> EndToEnd {
    let width = w(4);
    let programs = gen_batch(PROGRAM_SEED, PROGRAMS, GenConfig::new(12, 3, width));
    let results: Vec<_> = if stop_early {
        // any detection suffices, so look for the first one
        let hit = programs.par_iter().find_map_any(|p| {
            match check_soundness_with(p, width, config, DEFAULT_STATE_BUDGET) {
                Ok(v) if v.is_sound() => None,
                r => Some(r),
            }
        });
        hit.into_iter().collect()
    } else {
        programs
            .par_iter()
            .map(|p| check_soundness_with(p, width, config, DEFAULT_STATE_BUDGET))
            .collect()
    };
    let mut out = EndToEnd {
        checked: results.len(),
        violations: Vec::new(),
        errors: Vec::new(),
        budget_errors: 0,
        stats: FixStats::default(),
    };
    for r in results {
        match r {
            Ok(v) => {
                out.stats.absorb(&v.stats);
                if !v.is_sound() {
                    out.violations.push(serde_json::to_string(&v).unwrap());
                }
            }
            Err(CheckError::Fixpoint(e)) => out.errors.push(e.to_string()),
            Err(CheckError::Budget(_)) => out.budget_errors += 1,
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let programs = gen_batch(PROGRAM_SEED, PROGRAMS, GenConfig::new(12, 3, w(4)));
    let shapes_ok = programs
        .iter()
        .all(|p| p.body.size() <= 12 && p.body.loop_depth() <= 2 && p.nvars() == 3);
    let r = end_to_end(&AnalysisConfig::default(), false);
    let elapsed = start.elapsed();
    let passed = shapes_ok
        && r.checked == PROGRAMS
        && r.violations.is_empty()
        && r.errors.is_empty()
        && r.budget_errors == 0
        && elapsed <= Duration::from_secs(300);
    let mut detail = format!(
        "{} programs x 4096 initial memories, {} violations, {} fixpoint errors, {} loop fixpoints, {:.1?}",
        r.checked,
        r.violations.len(),
        r.errors.len(),
        r.stats.loop_fixpoints,
        elapsed
    );
    if let Some(v) = r.violations.first() {
        detail.push_str(&format!("; first violation: {v}"));
    }
    Outcome {
        passed,
        detail,
        fixpoint_errors: r.errors.len() as u64,
        fixpoints_run: r.stats.loop_fixpoints + r.stats.backward_fixpoints,
    }
}

fn report_detail(r: &LawReport) -> String {
    match r.failed_laws().next() {
        None => format!("{} checks", r.total_checks()),
        Some(l) => format!(
            "{}: {} failures, first: {}",
            l.law,
            l.failures,
            l.first_failure.as_deref().unwrap_or("")
        ),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let d = IntervalDomain::new(w(4));
    let carrier = all_intervals(w(4));
    let r = forward_battery(&d, &carrier);
    let elapsed = start.elapsed();
    Outcome {
        passed: r.passed() && carrier.len() == 137 && elapsed <= Duration::from_secs(60),
        detail: format!("{}, {:.1?}", report_detail(&r), elapsed),
        ..Default::default()
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let d = IntervalDomain::new(w(4));
    let r = backward_battery(&d, &all_intervals(w(4)), BACKWARD_TRIPLES, BACKWARD_SEED);
    let elapsed = start.elapsed();
    let refinements: u64 = r
        .laws
        .iter()
        .filter(|l| l.law.ends_with("refines"))
        .map(|l| l.checked)
        .sum();
    Outcome {
        passed: r.passed()
            && refinements == 7 * BACKWARD_TRIPLES as u64
            && elapsed <= Duration::from_secs(60),
        detail: format!(
            "{}, {refinements} refinement checks, {:.1?}",
            report_detail(&r),
            elapsed
        ),
        ..Default::default()
    }
}

fn criterion_4() -> Outcome {
    let interval = IntervalDomain::new(w(4));
    let memory = interval_memory(w(3), 2, &AnalysisConfig::default());
    let transfer = interval_memory(w(4), 2, &AnalysisConfig::default());
    let reports = [
        interval_lattice_battery(&interval),
        memory_lattice_battery(&memory),
        memory_transfer_battery(&transfer, TRANSFER_SAMPLES, 4),
    ];
    let strict_checks: u64 = reports
        .iter()
        .filter_map(|r| r.law("measure strictly increasing"))
        .map(|l| l.checked)
        .sum();
    let bound = reports[2].law("backward_asem_fp within bound").unwrap();
    let passed = reports.iter().all(LawReport::passed)
        && reports[0].carrier == 137
        && reports[1].carrier == 1297
        && strict_checks > 0;
    let detail = reports
        .iter()
        .map(|r| format!("{}: {}", r.battery, report_detail(r)))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        passed,
        detail,
        fixpoint_errors: bound.failures,
        fixpoints_run: bound.checked,
    }
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    for bits in [8, 64] {
        let d = IntervalDomain::new(w(bits));
        let max = w(bits).max_int();
        check(
            "backward_lt on false",
            d.backward_lt(&Itv::val(0, max), &Itv::val(5, 15), &Itv::singleton(0))
                == (Itv::val(5, max), Itv::val(5, 15)),
        );
        check("as_bool [0,0]", d.as_bool(&Itv::singleton(0)) == UBool::FF);
        check("as_bool bottom", d.as_bool(&Itv::Bot) == UBool::FF);
        check(
            "widen to threshold",
            d.widen(&Itv::val(0, 5), &Itv::val(0, 6)) == Itv::val(0, 8),
        );
    }
    let m = interval_memory(w(8), 2, &AnalysisConfig::default());
    let left = m.from_entries(vec![Itv::val(0, 5), m.num().top()]);
    let right = m.from_entries(vec![Itv::val(6, 9), m.num().top()]);
    check("meet reduction", m.meet(&left, &right) == AMem::Bot);

    let mut stats = FixStats::default();
    let lt = Expr::binop(BinOp::Lt, Expr::Var(VarId(0)), Expr::Const(10));
    let assumed = m.backward_asem_fp(&lt, &Itv::singleton(1), &m.top(), &mut stats);
    check(
        "assume a < 10",
        assumed.ok().and_then(|r| r.get(VarId(0)).copied()) == Some(Itv::val(-128, 9)),
    );
    let p = parse("a := 0; loop { assume a < 60; a := a + 1 }", w(8)).unwrap();
    let report = analyze(&p, None, &AnalysisConfig::default());
    let fixpoint_errors = u64::from(report.is_err()) + u64::from(stats.backward_fixpoints == 0);
    let report = report.ok();
    check(
        "counting loop",
        report.as_ref().and_then(|r| r.interval("a")) == Some(Itv::val(0, 64)),
    );
    let loop_fixpoints = report.map_or(0, |r| {
        stats.absorb(&r.stats);
        r.stats.loop_fixpoints
    });
    Outcome {
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "9 paper-anchored and 2 frozen regressions exact".to_string()
        } else {
            format!("mismatches: {}", failures.join(", "))
        },
        fixpoint_errors,
        fixpoints_run: loop_fixpoints + stats.backward_fixpoints,
    }
}

/// Which of criteria 1 to 4 notice `mutant`.
fn detections(mutant: Mutant) -> Vec<u8> {
    let config = AnalysisConfig {
        thresholds: None,
        mutant: Some(mutant),
    };
    let interval = interval_memory(w(4), 1, &config).num().clone();
    let carrier = all_intervals(w(4));
    let mut found = Vec::new();
    let e2e = end_to_end(&config, true);
    if !e2e.violations.is_empty() || !e2e.errors.is_empty() {
        found.push(1);
    }
    if !forward_battery(&interval, &carrier).passed() {
        found.push(2);
    }
    if !backward_battery(&interval, &carrier, BACKWARD_TRIPLES, BACKWARD_SEED).passed() {
        found.push(3);
    }
    let lattice_ok = interval_lattice_battery(&interval).passed()
        && memory_lattice_battery(&interval_memory(w(3), 2, &config)).passed()
        && memory_transfer_battery(&interval_memory(w(4), 2, &config), TRANSFER_SAMPLES, 4).passed();
    if !lattice_ok {
        found.push(4);
    }
    found
}

fn criterion_7() -> Outcome {
    let mut missed = Vec::new();
    let mut parts = Vec::new();
    for m in Mutant::ALL {
        let found = detections(m);
        if found.is_empty() {
            missed.push(m.name());
        }
        parts.push(format!("{m} by {found:?}"));
    }
    Outcome {
        passed: missed.is_empty(),
        detail: parts.join(", "),
        ..Default::default()
    }
}

#[test]
fn acceptance_criteria() {
    let outcomes = [
        ("end-to-end soundness", criterion_1()),
        ("forward operators exhaustive", criterion_2()),
        ("backward operators", criterion_3()),
        ("law batteries", criterion_4()),
        ("anchored regressions", criterion_5()),
    ];
    let fixpoint_errors: u64 = outcomes.iter().map(|(_, o)| o.fixpoint_errors).sum();
    let fixpoints_run: u64 = outcomes.iter().map(|(_, o)| o.fixpoints_run).sum();
    let termination = Outcome {
        passed: fixpoint_errors == 0 && fixpoints_run > 0,
        detail: format!("{fixpoints_run} fixpoint runs, {fixpoint_errors} bound or monotonicity failures"),
        ..Default::default()
    };
    let mutation = criterion_7();

    let mut all = true;
    let rows = outcomes
        .iter()
        .map(|(n, o)| (*n, o))
        .chain([("termination instrumentation", &termination), ("mutation sensitivity", &mutation)]);
    for (i, (name, o)) in rows.enumerate() {
        all &= o.passed;
        println!(
            "criterion {}: {} {name}: {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    assert!(all, "some acceptance criteria failed");
}

#[test]
fn interval_carrier_matches_formula() {
    let n = w(4).size() as usize;
    assert_eq!(all_intervals(w(4)).len(), n * (n + 1) / 2 + 1);
    let d = IntervalDomain::new(w(4));
    assert!(all_intervals(w(4)).iter().all(|x| d.measure(x) < d.measure_max()));
    assert_eq!(d.width(), w(4));
}
