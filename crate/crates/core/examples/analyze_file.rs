// Analyse the bundled `.imp` programs and print text and JSON reports.
//
// cargo run --example analyze_file

use std::error::Error;
use std::path::Path;

use absint::analyzer::{analyze, AnalysisConfig};
use absint::interval::Thresholds;
use absint::lang::parse;
use absint::machine_int::Width;

pub fn run() -> Result<(), Box<dyn Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let width = Width::new(8)?;

    let src = std::fs::read_to_string(dir.join("count.imp"))?;
    let program = parse(&src, width)?;
    let report = analyze(&program, None, &AnalysisConfig::default())?;
    println!("count.imp at width 8:\n{report}");
    assert_eq!(report.to_string(), "a ∈ [0, 64]\n");

    // A threshold at the loop bound gives the exact exit range.
    let tight = AnalysisConfig {
        thresholds: Some(Thresholds::new(width, [60])?),
        ..Default::default()
    };
    let report = analyze(&program, None, &tight)?;
    println!("with threshold 60:\n{report}");

    let src = std::fs::read_to_string(dir.join("clamp.imp"))?;
    for bits in [8, 16] {
        let program = parse(&src, Width::new(bits)?)?;
        let report = analyze(&program, None, &AnalysisConfig::default())?;
        println!("clamp.imp at width {bits}:\n{report}");
        println!("{}\n", serde_json::to_string_pretty(&report.to_json())?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
