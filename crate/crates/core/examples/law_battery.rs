// Exhaustive lattice, operator and memory laws at a small width.
//
// cargo run --release --example law_battery

use std::error::Error;

use absint::analyzer::AnalysisConfig;
use absint::difftest::laws::run_law_batteries;
use absint::difftest::Mutant;
use absint::machine_int::Width;

pub fn run() -> Result<(), Box<dyn Error>> {
    let width = Width::new(3)?;
    let summary = run_law_batteries(width, &AnalysisConfig::default());
    print!("{summary}");
    assert!(summary.passed());

    let broken = AnalysisConfig {
        mutant: Some(Mutant::DroppedBotReduction),
        ..Default::default()
    };
    let summary = run_law_batteries(width, &broken);
    for report in &summary.reports {
        for law in report.failed_laws() {
            println!("{}: `{}` failed {} times", report.battery, law.law, law.failures);
        }
    }
    assert!(!summary.passed());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
