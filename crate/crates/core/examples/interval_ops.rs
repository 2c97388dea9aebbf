// Interval arithmetic on wrapping machine integers.
//
// cargo run --example interval_ops

use std::error::Error;

use absint::domain::{AbstractDomain, Lattice, NumDomain};
use absint::interval::{IntervalDomain, Itv};
use absint::machine_int::{BinOp, Width};

pub fn run() -> Result<(), Box<dyn Error>> {
    let d = IntervalDomain::new(Width::new(8)?);
    let (x, y) = (Itv::val(-2, 3), Itv::val(-4, 5));

    for op in BinOp::ALL {
        println!("{x} {} {y} = {}", op.symbol(), d.forward_binop(op, &x, &y));
    }

    // Bounds that might wrap give up to the full range.
    let big = Itv::val(100, 120);
    println!("{big} + {big} = {}", d.add(&big, &big));
    println!("-{} = {}", Itv::val(-128, 0), d.inv(&Itv::val(-128, 0)));

    println!("join  {}", d.join(&Itv::val(0, 2), &Itv::val(5, 6)));
    println!("meet  {}", d.meet(&Itv::val(0, 2), &Itv::val(5, 6)));
    println!("thresholds {:?}", d.thresholds().values());
    let mut acc = Itv::singleton(0);
    for step in 1..=6 {
        let next = d.join(&acc, &Itv::singleton(step));
        acc = d.widen(&acc, &next);
        println!("widening step {step}: {acc}");
    }
    assert_eq!(d.widen(&Itv::val(0, 5), &Itv::val(0, 6)), Itv::val(0, 8));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
