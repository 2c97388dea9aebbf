// Refining operands and memories from a known result.
//
// cargo run --example backward_refine

use std::error::Error;

use absint::analyzer::{interval_memory, AnalysisConfig};
use absint::domain::{FixStats, Lattice, MemDomain, NumDomain};
use absint::interval::{IntervalDomain, Itv};
use absint::lang::{parse, Stmt};
use absint::machine_int::{BinOp, Width};

pub fn run() -> Result<(), Box<dyn Error>> {
    let width = Width::new(8)?;
    let d = IntervalDomain::new(width);

    let (x, y) = (Itv::val(0, 127), Itv::val(5, 15));
    let (x2, y2) = d.backward_binop(BinOp::Lt, &x, &y, &Itv::singleton(0));
    println!("if !({x} < {y}) then x ∈ {x2}, y ∈ {y2}");

    let (x2, y2) = d.backward_binop(BinOp::Plus, &d.top(), &Itv::singleton(0), &Itv::singleton(3));
    println!("if ⊤ + [0, 0] ∈ [3, 3] then x ∈ {x2}, y ∈ {y2}");

    // Filtering a memory through conditions.
    let program = parse("assume a < 10 && 0 < b; assume a + b == 20", width)?;
    let mem = interval_memory(width, program.nvars(), &AnalysisConfig::default());
    let mut stats = FixStats::default();
    let mut m = mem.top();
    let mut step = |s: &Stmt, m: &mut _| -> Result<(), Box<dyn Error>> {
        if let Stmt::Assume(e) = s {
            *m = mem.assume(m, e, &mut stats)?;
        }
        Ok(())
    };
    if let Stmt::Seq(first, second) = &program.body {
        for s in [first.as_ref(), second.as_ref()] {
            step(s, &mut m)?;
            println!("after assume: {m:?}");
        }
    }
    println!("backward iterations: {}", stats.backward_steps);

    // Contradictions are found by iterating the refinement. At width 64 the
    // iteration shrinks one unit per round, so this runs at width 8.
    let program = parse("assume a < b && b < a", width)?;
    let mut stats = FixStats::default();
    let Stmt::Assume(e) = &program.body else { unreachable!() };
    let m = mem.assume(&mem.top(), e, &mut stats)?;
    println!("a < b && b < a gives {m:?} after {} iterations", stats.backward_steps);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
