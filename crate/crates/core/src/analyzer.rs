//! Abstract semantics of statements and the analysis report.

use std::fmt;

use serde_json::{json, Value};

use crate::difftest::Mutant;
use crate::domain::{postfixpoint, FixStats, FixpointError, Lattice, MemDomain};
use crate::interval::{IntervalDomain, Itv, Thresholds};
use crate::lang::{Program, Stmt};
use crate::machine_int::Width;
use crate::memory::{AMem, MemoryDomain};

/// Over-approximates the memories reachable by running `s` from any memory
/// in `m`.
///
/// Loops are analysed by iterating `x ↦ widen(x, body(x))` from `m` up to a
/// post-fixpoint; its concretization is closed under the loop body and so
/// contains every iterate.
pub fn asem_stmt<D: MemDomain>(
    d: &D,
    s: &Stmt,
    m: &D::Value,
    stats: &mut FixStats,
) -> Result<D::Value, FixpointError> {
    if d.is_bottom(m) {
        return Ok(d.bottom());
    }
    match s {
        Stmt::Assign(v, e) => Ok(d.assign(m, *v, e)),
        Stmt::Assume(e) => d.assume(m, e, stats),
        Stmt::Seq(a, b) => {
            let mid = asem_stmt(d, a, m, stats)?;
            asem_stmt(d, b, &mid, stats)
        }
        Stmt::Choice(a, b) => {
            let l = asem_stmt(d, a, m, stats)?;
            let r = asem_stmt(d, b, m, stats)?;
            Ok(d.join(&l, &r))
        }
        Stmt::Loop(body) => {
            let mut failure = None;
            let fp = postfixpoint(
                |a, b| d.corder(a, b),
                d.order_measure(),
                |x| {
                    if failure.is_some() {
                        return x.clone();
                    }
                    match asem_stmt(d, body, x, stats) {
                        Ok(y) => d.widen(x, &y),
                        Err(e) => {
                            failure = Some(e);
                            x.clone()
                        }
                    }
                },
                m.clone(),
            );
            if let Some(e) = failure {
                return Err(e);
            }
            let fp = fp?;
            stats.record_loop(&fp);
            Ok(fp.value)
        }
    }
}

/// Knobs of an interval analysis.
#[derive(Clone, Debug, Default)]
pub struct AnalysisConfig {
    /// Widening thresholds; the default ladder when `None`.
    pub thresholds: Option<Thresholds>,
    pub mutant: Option<Mutant>,
}

/// The interval memory domain for `width` and `nvars` variables, with the
/// configured thresholds and mutant.
pub fn interval_memory(width: Width, nvars: usize, config: &AnalysisConfig) -> MemoryDomain<IntervalDomain> {
    let thresholds = config
        .thresholds
        .clone()
        .unwrap_or_else(|| Thresholds::default_for(width));
    let mut num = IntervalDomain::with_thresholds(width, thresholds);
    if let Some(m) = config.mutant {
        num = num.mutated(m);
    }
    let mem = MemoryDomain::new(num, nvars);
    match config.mutant {
        Some(m) => mem.mutated(m),
        None => mem,
    }
}

/// How one variable of the final memory is shown.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarRender {
    Bot,
    Top,
    Range(i64, i64),
}

/// The outcome of analysing a whole program.
#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub vars: Vec<String>,
    pub width: Width,
    pub thresholds: Thresholds,
    pub initial: AMem<Itv>,
    pub final_mem: AMem<Itv>,
    pub stats: FixStats,
}

impl AnalysisReport {
    pub fn render(&self, i: usize) -> VarRender {
        match self.final_mem.entries().map(|e| e[i]) {
            None | Some(Itv::Bot) => VarRender::Bot,
            Some(Itv::Val { low, up }) => {
                if low == self.width.min_int() && up == self.width.max_int() {
                    VarRender::Top
                } else {
                    VarRender::Range(low, up)
                }
            }
        }
    }

    /// The final interval of the variable called `name`.
    pub fn interval(&self, name: &str) -> Option<Itv> {
        let i = self.vars.iter().position(|v| v == name)?;
        Some(self.final_mem.entries().map_or(Itv::Bot, |e| e[i]))
    }

    pub fn to_json(&self) -> Value {
        let bound = |x: i64, extreme: i64| if x == extreme { Value::Null } else { json!(x) };
        let mut vars = serde_json::Map::new();
        for (i, name) in self.vars.iter().enumerate() {
            let entry = match self.final_mem.entries().map(|e| e[i]) {
                None | Some(Itv::Bot) => json!("bot"),
                Some(Itv::Val { low, up }) => json!({
                    "low": bound(low, self.width.min_int()),
                    "up": bound(up, self.width.max_int()),
                }),
            };
            vars.insert(name.clone(), entry);
        }
        json!({
            "vars": vars,
            "stats": self.stats,
            "config": {
                "width": self.width.bits(),
                "thresholds": self.thresholds.values(),
            },
        })
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, name) in self.vars.iter().enumerate() {
            match self.render(i) {
                VarRender::Bot => writeln!(f, "{name} = BOT (unreachable)")?,
                VarRender::Top => {
                    let (l, u) = (self.width.min_int(), self.width.max_int());
                    writeln!(f, "{name} ∈ [{l}, {u}]")?
                }
                VarRender::Range(l, u) => writeln!(f, "{name} ∈ [{l}, {u}]")?,
            }
        }
        Ok(())
    }
}

/// Analyses `p` from `initial`, or from the all-top memory.
pub fn analyze(
    p: &Program,
    initial: Option<AMem<Itv>>,
    config: &AnalysisConfig,
) -> Result<AnalysisReport, FixpointError> {
    let d = interval_memory(p.width, p.nvars(), config);
    let initial = initial.unwrap_or_else(|| d.top());
    let mut stats = FixStats::default();
    let final_mem = asem_stmt(&d, &p.body, &initial, &mut stats)?;
    Ok(AnalysisReport {
        vars: p.vars.clone(),
        width: p.width,
        thresholds: d.num().thresholds().clone(),
        initial,
        final_mem,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::AbstractDomain;
    use crate::lang::parse;

    fn run(src: &str, bits: u32) -> AnalysisReport {
        let p = parse(src, Width::new(bits).unwrap()).unwrap();
        analyze(&p, None, &AnalysisConfig::default()).unwrap()
    }

    #[test]
    fn straight_line() {
        let r = run("a := 1; b := a + 1", 8);
        assert_eq!(r.interval("a"), Some(Itv::singleton(1)));
        assert_eq!(r.interval("b"), Some(Itv::singleton(2)));
    }

    #[test]
    fn choice_joins() {
        let r = run("choice { a := 1 } or { a := 5 }", 8);
        assert_eq!(r.interval("a"), Some(Itv::val(1, 5)));
    }

    #[test]
    fn counting_loop_widens_to_threshold() {
        let r = run("a := 0; loop { assume a < 60; a := a + 1 }", 8);
        assert_eq!(r.interval("a"), Some(Itv::val(0, 64)));
        assert_eq!(r.to_string(), "a ∈ [0, 64]\n");
        let d = interval_memory(r.width, 1, &AnalysisConfig::default());
        assert!((r.stats.loop_steps as u128) <= d.measure_max());
    }

    #[test]
    fn no_effect_keeps_initial() {
        let r = run("a := a; assume 1", 8);
        assert_eq!(r.final_mem, r.initial);
    }

    #[test]
    fn unreachable_rendering() {
        let r = run("a := 1; assume a == 2; b := 3", 8);
        assert!(r.final_mem.is_bot());
        assert_eq!(r.to_string(), "a = BOT (unreachable)\nb = BOT (unreachable)\n");
        assert_eq!(r.to_json()["vars"]["a"], json!("bot"));
    }

    #[test]
    fn json_shape() {
        let r = run("a := 0; b := ?; loop { assume a < 60; a := a + 1 }", 8);
        let j = r.to_json();
        assert_eq!(j["vars"]["a"], json!({"low": 0, "up": 64}));
        assert_eq!(j["vars"]["b"], json!({"low": null, "up": null}));
        assert_eq!(j["config"]["width"], json!(8));
        assert!(j["stats"]["loop_fixpoints"].as_u64().unwrap() >= 1);
    }
}
