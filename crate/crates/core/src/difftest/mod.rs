//! Differential soundness testing against the concrete semantics, and
//! exhaustive law batteries for the domains.

pub mod laws;
mod mutants;

use serde::Serialize;
use thiserror::Error;

pub use mutants::Mutant;

use crate::analyzer::{asem_stmt, interval_memory, AnalysisConfig};
use crate::concrete::{post_image, BudgetExceeded, ConcreteMem, MemSet, StateSpace, DEFAULT_STATE_BUDGET};
use crate::domain::{AbstractDomain, FixStats, FixpointError, Lattice};
use crate::interval::Itv;
use crate::lang::Program;
use crate::machine_int::Width;
use crate::memory::AMem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("analysis failed: {0}")]
    Fixpoint(#[from] FixpointError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Sound,
    Violation,
}

/// A reachable memory that the analysis result does not cover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub initial: ConcreteMem,
    #[serde(rename = "final")]
    pub final_mem: ConcreteMem,
    /// The first variable whose abstract entry misses its concrete value;
    /// `None` when the whole abstract memory is bottom.
    pub variable: Option<String>,
    pub value: Option<i64>,
    /// The abstract entry of `variable`, or `"bot"`.
    pub abstract_entry: String,
}

/// The outcome of checking one program.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub program: String,
    pub width: u32,
    pub status: Status,
    pub reachable: usize,
    pub stats: FixStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn is_sound(&self) -> bool {
        self.status == Status::Sound
    }
}

/// Checks that every memory reachable from any initial memory is covered by
/// the analysis of `p` from top.
pub fn check_soundness(p: &Program, width: Width) -> Result<Verdict, CheckError> {
    check_soundness_with(p, width, &AnalysisConfig::default(), DEFAULT_STATE_BUDGET)
}

/// [`check_soundness`] with explicit analysis settings and state budget.
pub fn check_soundness_with(
    p: &Program,
    width: Width,
    config: &AnalysisConfig,
    budget: u64,
) -> Result<Verdict, CheckError> {
    let space = StateSpace::new(width, p.nvars(), budget)?;
    let d = interval_memory(width, p.nvars(), config);
    run_check(p, width, config, MemSet::full(space), d.top())
}

/// Checks `p` from the memories described by `initial` only.
pub fn check_soundness_from(
    p: &Program,
    width: Width,
    initial: &AMem<Itv>,
    config: &AnalysisConfig,
    budget: u64,
) -> Result<Verdict, CheckError> {
    let space = StateSpace::new(width, p.nvars(), budget)?;
    let d = interval_memory(width, p.nvars(), config);
    let mut inputs = MemSet::empty(space);
    for m in MemSet::full(space).iter() {
        if d.cgamma(initial, &m) {
            inputs.insert(m.values());
        }
    }
    run_check(p, width, config, inputs, initial.clone())
}

fn run_check(
    p: &Program,
    width: Width,
    config: &AnalysisConfig,
    inputs: MemSet,
    initial: AMem<Itv>,
) -> Result<Verdict, CheckError> {
    assert_eq!(width, p.width, "program constants were checked at another width");
    let d = interval_memory(width, p.nvars(), config);
    let mut stats = FixStats::default();
    let result = asem_stmt(&d, &p.body, &initial, &mut stats)?;
    let reach = post_image(&p.body, &inputs);
    let miss = reach.iter().find(|m| !d.cgamma(&result, m));
    let witness = miss.map(|final_mem| {
        let initial = inputs
            .iter()
            .find(|m0| post_image(&p.body, &MemSet::singleton(inputs.space(), m0.values())).contains(final_mem.values()))
            .expect("a reachable memory has a predecessor");
        let (variable, value, abstract_entry) = match &result {
            AMem::Bot => (None, None, "bot".to_string()),
            AMem::Val(e) => {
                let i = (0..e.len())
                    .find(|&i| !e[i].contains(final_mem.values()[i]))
                    .unwrap_or(0);
                (
                    Some(p.var_name(crate::lang::VarId(i)).to_string()),
                    Some(final_mem.values()[i]),
                    e[i].to_string(),
                )
            }
        };
        Witness {
            initial,
            final_mem,
            variable,
            value,
            abstract_entry,
        }
    });
    Ok(Verdict {
        program: p.to_string(),
        width: width.bits(),
        status: if witness.is_some() {
            Status::Violation
        } else {
            Status::Sound
        },
        reachable: reach.len(),
        stats,
        witness,
    })
}
