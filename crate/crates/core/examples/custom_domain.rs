// Plugging a different numeric domain into the memory domain and analyzer.
//
// The flat constant lattice: nothing, one known value, or anything.
//
// cargo run --example custom_domain

use std::error::Error;

use absint::analyzer::asem_stmt;
use absint::difftest::laws::{backward_battery, forward_battery, lattice_battery};
use absint::domain::{AbstractDomain, FixStats, Lattice, NumDomain};
use absint::lang::parse;
use absint::machine_int::{BinOp, Width};
use absint::memory::MemoryDomain;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flat {
    Bot,
    Const(i64),
    Top,
}

pub struct ConstDomain {
    width: Width,
}

impl Lattice for ConstDomain {
    type Value = Flat;

    fn corder(&self, x: &Flat, y: &Flat) -> bool {
        matches!((x, y), (Flat::Bot, _) | (_, Flat::Top)) || x == y
    }

    fn join(&self, x: &Flat, y: &Flat) -> Flat {
        match (x, y) {
            (Flat::Bot, k) | (k, Flat::Bot) => *k,
            _ if x == y => *x,
            _ => Flat::Top,
        }
    }

    fn meet(&self, x: &Flat, y: &Flat) -> Flat {
        match (x, y) {
            (Flat::Top, k) | (k, Flat::Top) => *k,
            _ if x == y => *x,
            _ => Flat::Bot,
        }
    }

    fn bottom(&self) -> Flat {
        Flat::Bot
    }

    fn top(&self) -> Flat {
        Flat::Top
    }
}

impl AbstractDomain for ConstDomain {
    type Concrete = i64;

    fn cgamma(&self, x: &Flat, c: &i64) -> bool {
        match x {
            Flat::Bot => false,
            Flat::Const(k) => k == c,
            Flat::Top => true,
        }
    }

    fn widen(&self, x: &Flat, y: &Flat) -> Flat {
        self.join(x, y)
    }

    fn measure(&self, x: &Flat) -> u128 {
        match x {
            Flat::Bot => 0,
            Flat::Const(_) => 1,
            Flat::Top => 2,
        }
    }

    fn measure_max(&self) -> u128 {
        3
    }
}

impl NumDomain for ConstDomain {
    fn width(&self) -> Width {
        self.width
    }

    fn beta(&self, x: i64) -> Flat {
        Flat::Const(x)
    }

    fn forward_binop(&self, op: BinOp, x: &Flat, y: &Flat) -> Flat {
        match (x, y) {
            (Flat::Bot, _) | (_, Flat::Bot) => Flat::Bot,
            (Flat::Const(a), Flat::Const(b)) => Flat::Const(self.width.binop(op, *a, *b)),
            _ => Flat::Top,
        }
    }

    fn backward_binop(&self, op: BinOp, x: &Flat, y: &Flat, r: &Flat) -> (Flat, Flat) {
        let possible = match (x, y, r) {
            (Flat::Bot, _, _) | (_, Flat::Bot, _) | (_, _, Flat::Bot) => false,
            (Flat::Const(a), Flat::Const(b), Flat::Const(c)) => self.width.binop(op, *a, *b) == *c,
            _ => true,
        };
        match (possible, op, r) {
            (false, _, _) => (Flat::Bot, Flat::Bot),
            // a known sum or difference pins the unknown operand
            (true, BinOp::Plus, Flat::Const(c)) => match (x, y) {
                (Flat::Const(a), Flat::Top) => (*x, Flat::Const(self.width.wrap(*c as i128 - *a as i128))),
                (Flat::Top, Flat::Const(b)) => (Flat::Const(self.width.wrap(*c as i128 - *b as i128)), *y),
                _ => (*x, *y),
            },
            _ => (*x, *y),
        }
    }

    fn gt0(&self) -> Flat {
        Flat::Top
    }

    fn lt0(&self) -> Flat {
        Flat::Top
    }
}

pub fn run() -> Result<(), Box<dyn Error>> {
    // Check the new domain with the same batteries as the interval domain.
    let small = ConstDomain { width: Width::new(3)? };
    let mut carrier = vec![Flat::Bot, Flat::Top];
    carrier.extend(small.width.values().map(Flat::Const));
    let concretes: Vec<i64> = small.width.values().collect();
    for report in [
        lattice_battery(&small, "constant lattice", &carrier, &concretes, None),
        forward_battery(&small, &carrier),
        backward_battery(&small, &carrier, 2_000, 1),
    ] {
        println!("{}: {}", report.battery, if report.passed() { "pass" } else { "FAIL" });
        assert!(report.passed(), "{report}");
    }

    let width = Width::new(32)?;
    let program = parse(
        "a := 3; b := a * 4 + 1; choice { c := b } or { c := 13 }; d := ?",
        width,
    )?;
    let mem = MemoryDomain::new(ConstDomain { width }, program.nvars());
    let mut stats = FixStats::default();
    let result = asem_stmt(&mem, &program.body, &mem.top(), &mut stats)?;
    for (name, value) in program.vars.iter().zip(result.entries().unwrap_or(&[])) {
        println!("{name} = {value:?}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
