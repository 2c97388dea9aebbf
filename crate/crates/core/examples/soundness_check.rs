// Differential checking of the analysis against the concrete semantics.
//
// cargo run --release --example soundness_check

use std::error::Error;

use absint::analyzer::AnalysisConfig;
use absint::concrete::DEFAULT_STATE_BUDGET;
use absint::difftest::{check_soundness, check_soundness_with, Mutant};
use absint::lang::{gen_batch, parse, GenConfig};
use absint::machine_int::Width;

pub fn run() -> Result<(), Box<dyn Error>> {
    let width = Width::new(4)?;

    let programs = gen_batch(7, 100, GenConfig::new(12, 3, width));
    let mut sound = 0;
    for p in &programs {
        if check_soundness(p, width)?.is_sound() {
            sound += 1;
        }
    }
    println!("{sound} of {} generated programs checked sound", programs.len());

    // A deliberately broken negation is caught with a concrete witness.
    let p = parse("b := 0 - a", width)?;
    let broken = AnalysisConfig {
        mutant: Some(Mutant::InvWithoutMinGuard),
        ..Default::default()
    };
    let verdict = check_soundness_with(&p, width, &broken, DEFAULT_STATE_BUDGET)?;
    println!("{}", serde_json::to_string_pretty(&verdict)?);
    assert!(!verdict.is_sound());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
