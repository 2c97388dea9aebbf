// Random program generation and the concrete syntax round trip.
//
// cargo run --example generate_programs

use std::error::Error;

use absint::lang::{gen_random, parse_with_vars, pretty};
use absint::machine_int::Width;

pub fn run() -> Result<(), Box<dyn Error>> {
    let width = Width::new(8)?;
    for seed in 0..3 {
        let p = gen_random(seed, 12, 3, width);
        let text = pretty(&p);
        println!("# seed {seed}, {} statements, loop depth {}", p.body.size(), p.body.loop_depth());
        println!("{text}\n");
        assert_eq!(parse_with_vars(&text, width, &p.vars)?, p);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
