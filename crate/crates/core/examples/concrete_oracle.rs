// The exhaustive concrete semantics and the random sampler.
//
// cargo run --example concrete_oracle

use std::error::Error;

use absint::concrete::{post_image, sample_run, ConcreteMem, MemSet, SampleConfig, StateSpace, DEFAULT_STATE_BUDGET};
use absint::lang::parse;
use absint::machine_int::Width;

pub fn run() -> Result<(), Box<dyn Error>> {
    let width = Width::new(4)?;
    let program = parse("a := 0; loop { assume a < 5; a := a + 1 }; b := a * a", width)?;
    let space = StateSpace::new(width, program.nvars(), DEFAULT_STATE_BUDGET)?;

    let all = MemSet::full(space);
    let reach = post_image(&program.body, &all);
    println!("{} initial memories reach {} final ones:", all.len(), reach.len());
    for m in reach.iter() {
        println!("  a = {}, b = {}", m.values()[0], m.values()[1]);
    }

    // Values wrap at the width: 5 * 5 = 25 = -7 (mod 16).
    assert!(reach.contains(&[5, -7]));

    for seed in 0..3 {
        let out = sample_run(&program.body, &ConcreteMem(vec![0, 0]), width, seed, SampleConfig::default())?;
        println!("sampled run {seed}: {:?}", out.values());
    }

    let too_big = StateSpace::new(Width::new(16)?, 4, DEFAULT_STATE_BUDGET);
    println!("16-bit, 4 variables: {}", too_big.unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
