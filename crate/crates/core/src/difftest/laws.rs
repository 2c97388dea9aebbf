//! Law batteries: the domain contracts checked over enumerated carriers.
//!
//! Concretizations are precomputed as bitsets over a finite list of
//! concrete values, so every inclusion law becomes a word-wise test.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analyzer::{interval_memory, AnalysisConfig};
use crate::concrete::{osem_expr, ConcreteMem};
use crate::domain::{AbstractDomain, FixStats, Lattice, MemDomain, NumDomain};
use crate::interval::{all_intervals, IntervalDomain, Itv};
use crate::lang::{Expr, VarId};
use crate::machine_int::{BinOp, Width};
use crate::memory::{AMem, MemoryDomain};

/// Outcome of one law over a battery.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawResult {
    pub law: &'static str,
    pub checked: u64,
    pub failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

/// Per-law counts for one battery.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub battery: String,
    pub carrier: usize,
    pub laws: Vec<LawResult>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.laws.iter().all(|l| l.failures == 0)
    }

    pub fn failed_laws(&self) -> impl Iterator<Item = &LawResult> {
        self.laws.iter().filter(|l| l.failures > 0)
    }

    pub fn law(&self, name: &str) -> Option<&LawResult> {
        self.laws.iter().find(|l| l.law == name)
    }

    pub fn total_checks(&self) -> u64 {
        self.laws.iter().map(|l| l.checked).sum()
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} ({} carrier elements)", self.battery, self.carrier)?;
        for l in &self.laws {
            let mark = if l.failures == 0 { "ok  " } else { "FAIL" };
            write!(f, "  {mark} {:<34} {:>10} checks", l.law, l.checked)?;
            if let Some(ctx) = &l.first_failure {
                write!(f, ", {} failures, first: {ctx}", l.failures)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Tally {
    laws: Vec<LawResult>,
}

#[derive(Clone, Copy)]
struct LawId(usize);

impl Tally {
    fn new() -> Self {
        Tally { laws: Vec::new() }
    }

    fn law(&mut self, name: &'static str) -> LawId {
        self.laws.push(LawResult {
            law: name,
            checked: 0,
            failures: 0,
            first_failure: None,
        });
        LawId(self.laws.len() - 1)
    }

    fn check(&mut self, id: LawId, ok: bool, ctx: impl FnOnce() -> String) {
        let l = &mut self.laws[id.0];
        l.checked += 1;
        if !ok {
            l.failures += 1;
            if l.first_failure.is_none() {
                l.first_failure = Some(ctx());
            }
        }
    }

    fn finish(self, battery: impl Into<String>, carrier: usize) -> LawReport {
        LawReport {
            battery: battery.into(),
            carrier,
            laws: self.laws,
        }
    }
}

type Bits = Vec<u64>;

/// A predicate every lattice operation result must satisfy.
pub type Invariant<'a, V> = &'a dyn Fn(&V) -> bool;

fn bits_of(n: usize, mut pred: impl FnMut(usize) -> bool) -> Bits {
    let mut b = vec![0u64; n.div_ceil(64)];
    for i in 0..n {
        if pred(i) {
            b[i / 64] |= 1 << (i % 64);
        }
    }
    b
}

fn subset(a: &Bits, b: &Bits) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn union(a: &Bits, b: &Bits) -> Bits {
    a.iter().zip(b).map(|(x, y)| x | y).collect()
}

fn intersection(a: &Bits, b: &Bits) -> Bits {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

/// Lattice and abstract-domain laws of `d`, exhaustively over `carrier` and
/// the concrete universe `concretes`. `canonical`, when given, must hold for
/// every result of `join`, `meet` and `widen`.
pub fn lattice_battery<D: AbstractDomain>(
    d: &D,
    battery: &str,
    carrier: &[D::Value],
    concretes: &[D::Concrete],
    canonical: Option<Invariant<'_, D::Value>>,
) -> LawReport
where
    D::Concrete: fmt::Debug,
{
    let mut t = Tally::new();
    let refl = t.law("corder reflexive");
    let trans = t.law("corder transitive");
    let join_ub = t.law("join upper bound");
    let meet_lb = t.law("meet lower bound");
    let bot_least = t.law("bottom least");
    let top_greatest = t.law("top greatest");
    let gamma_mono = t.law("gamma monotone");
    let meet_sound = t.law("meet soundness");
    let join_sound = t.law("join soundness");
    let bot_law = t.law("bottom concretizes to nothing");
    let top_law = t.law("top concretizes to everything");
    let widen_ub = t.law("widen upper bound");
    let measure_range = t.law("measure below max");
    let measure_strict = t.law("measure strictly increasing");
    let canon = canonical.map(|_| t.law("canonical form closed"));

    let n = carrier.len();
    let gamma = |x: &D::Value| bits_of(concretes.len(), |i| d.cgamma(x, &concretes[i]));
    let gam: Vec<Bits> = carrier.iter().map(gamma).collect();
    let order: Vec<Bits> = carrier
        .iter()
        .map(|x| bits_of(n, |j| d.corder(x, &carrier[j])))
        .collect();
    let measures: Vec<u128> = carrier.iter().map(|x| d.measure(x)).collect();
    let max = d.measure_max();
    let leq = |i: usize, j: usize| order[i][j / 64] >> (j % 64) & 1 == 1;

    let (bot, top) = (d.bottom(), d.top());
    let (gbot, gtop) = (gamma(&bot), gamma(&top));
    t.check(bot_law, gbot.iter().all(|w| *w == 0), || format!("{bot:?}"));
    let all = bits_of(concretes.len(), |_| true);
    t.check(top_law, gtop == all, || format!("{top:?}"));

    for i in 0..n {
        let x = &carrier[i];
        t.check(refl, leq(i, i), || format!("{x:?}"));
        t.check(bot_least, d.corder(&bot, x), || format!("{x:?}"));
        t.check(top_greatest, d.corder(x, &top), || format!("{x:?}"));
        t.check(measure_range, measures[i] < max, || {
            format!("{x:?} has measure {} >= {max}", measures[i])
        });
    }

    for i in 0..n {
        let x = &carrier[i];
        for j in 0..n {
            let y = &carrier[j];
            if leq(i, j) {
                // everything above y is above x
                t.check(trans, subset(&order[j], &order[i]), || format!("{x:?} ⊑ {y:?}"));
                t.check(gamma_mono, subset(&gam[i], &gam[j]), || format!("{x:?} ⊑ {y:?}"));
                if x != y {
                    t.check(measure_strict, measures[i] < measures[j], || {
                        format!("{x:?} ⊑ {y:?} but {} >= {}", measures[i], measures[j])
                    });
                }
            }
            let jn = d.join(x, y);
            let mt = d.meet(x, y);
            let wd = d.widen(x, y);
            t.check(join_ub, d.corder(x, &jn) && d.corder(y, &jn), || {
                format!("join({x:?}, {y:?}) = {jn:?}")
            });
            t.check(meet_lb, d.corder(&mt, x) && d.corder(&mt, y), || {
                format!("meet({x:?}, {y:?}) = {mt:?}")
            });
            t.check(widen_ub, d.corder(x, &wd) && d.corder(y, &wd), || {
                format!("widen({x:?}, {y:?}) = {wd:?}")
            });
            t.check(meet_sound, subset(&intersection(&gam[i], &gam[j]), &gamma(&mt)), || {
                format!("meet({x:?}, {y:?}) = {mt:?}")
            });
            t.check(join_sound, subset(&union(&gam[i], &gam[j]), &gamma(&jn)), || {
                format!("join({x:?}, {y:?}) = {jn:?}")
            });
            if let (Some(id), Some(is_canonical)) = (canon, canonical) {
                for (what, r) in [("join", &jn), ("meet", &mt), ("widen", &wd)] {
                    t.check(id, is_canonical(r), || format!("{what}({x:?}, {y:?}) = {r:?}"));
                }
            }
        }
    }
    t.finish(battery, n)
}

/// Lattice laws of the interval domain over every interval of its width.
pub fn interval_lattice_battery(d: &IntervalDomain) -> LawReport {
    let w = d.width();
    let carrier = all_intervals(w);
    let concretes: Vec<i64> = w.values().collect();
    lattice_battery(
        d,
        &format!("interval lattice, width {}", w.bits()),
        &carrier,
        &concretes,
        None,
    )
}

/// Forward soundness of every operator over all interval pairs and all
/// concrete operands, plus the `beta`, `gt0` and `lt0` laws.
pub fn forward_battery<N: NumDomain>(d: &N, carrier: &[N::Value]) -> LawReport {
    let w = d.width();
    let mut t = Tally::new();
    let beta = t.law("beta contains its value");
    let gt0 = t.law("gt0 covers positives");
    let lt0 = t.law("lt0 covers negatives");
    for c in w.values() {
        t.check(beta, d.cgamma(&d.beta(c), &c), || c.to_string());
        if c > 0 {
            t.check(gt0, d.cgamma(&d.gt0(), &c), || c.to_string());
        }
        if c < 0 {
            t.check(lt0, d.cgamma(&d.lt0(), &c), || c.to_string());
        }
    }
    let members: Vec<Vec<i64>> = carrier
        .iter()
        .map(|x| w.values().filter(|c| d.cgamma(x, c)).collect())
        .collect();
    for op in BinOp::ALL {
        let law = t.law(forward_law_name(op));
        for (i, x) in carrier.iter().enumerate() {
            for (j, y) in carrier.iter().enumerate() {
                let r = d.forward_binop(op, x, y);
                for &a in &members[i] {
                    for &b in &members[j] {
                        let v = w.binop(op, a, b);
                        t.check(law, d.cgamma(&r, &v), || {
                            format!("{x:?} {} {y:?} = {r:?} misses {a} {} {b} = {v}", op.symbol(), op.symbol())
                        });
                    }
                }
            }
        }
    }
    t.finish(format!("forward operators, width {}", w.bits()), carrier.len())
}

fn forward_law_name(op: BinOp) -> &'static str {
    match op {
        BinOp::Plus => "forward + sound",
        BinOp::Minus => "forward - sound",
        BinOp::Mult => "forward * sound",
        BinOp::Eq => "forward == sound",
        BinOp::Lt => "forward < sound",
        BinOp::And => "forward && sound",
        BinOp::Or => "forward || sound",
    }
}

fn backward_law_names(op: BinOp) -> (&'static str, &'static str) {
    match op {
        BinOp::Plus => ("backward + sound", "backward + refines"),
        BinOp::Minus => ("backward - sound", "backward - refines"),
        BinOp::Mult => ("backward * sound", "backward * refines"),
        BinOp::Eq => ("backward == sound", "backward == refines"),
        BinOp::Lt => ("backward < sound", "backward < refines"),
        BinOp::And => ("backward && sound", "backward && refines"),
        BinOp::Or => ("backward || sound", "backward || refines"),
    }
}

/// Backward soundness and refinement for `samples` random `(x, y, r)`
/// triples per operator, quantifying over all concrete operands.
pub fn backward_battery<N: NumDomain>(
    d: &N,
    carrier: &[N::Value],
    samples: usize,
    seed: u64,
) -> LawReport {
    let w = d.width();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new();
    for op in BinOp::ALL {
        let (sound_name, refine_name) = backward_law_names(op);
        let sound = t.law(sound_name);
        let refine = t.law(refine_name);
        for _ in 0..samples {
            let x = &carrier[rng.gen_range(0..carrier.len())];
            let y = &carrier[rng.gen_range(0..carrier.len())];
            let r = &carrier[rng.gen_range(0..carrier.len())];
            let (x2, y2) = d.backward_binop(op, x, y, r);
            t.check(refine, d.corder(&x2, x) && d.corder(&y2, y), || {
                format!("{op:?}({x:?}, {y:?}, {r:?}) = ({x2:?}, {y2:?})")
            });
            for a in w.values().filter(|a| d.cgamma(x, a)) {
                for b in w.values().filter(|b| d.cgamma(y, b)) {
                    if !d.cgamma(r, &w.binop(op, a, b)) {
                        continue;
                    }
                    t.check(sound, d.cgamma(&x2, &a) && d.cgamma(&y2, &b), || {
                        format!("{op:?}({x:?}, {y:?}, {r:?}) = ({x2:?}, {y2:?}) loses a={a}, b={b}")
                    });
                }
            }
        }
    }
    t.finish(
        format!("backward operators, width {}, {samples} triples per operator", w.bits()),
        carrier.len(),
    )
}

/// Every canonical interval memory over `nvars` variables.
pub fn all_memories(d: &MemoryDomain<IntervalDomain>) -> Vec<AMem<Itv>> {
    let w = d.num().width();
    let values: Vec<Itv> = all_intervals(w).into_iter().filter(|i| !i.is_bot()).collect();
    let mut out = vec![AMem::Bot];
    let mut idx = vec![0usize; d.nvars()];
    loop {
        out.push(AMem::Val(idx.iter().map(|&i| values[i]).collect()));
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < values.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Every concrete memory over `nvars` variables of width `w`.
pub fn all_concrete_memories(w: Width, nvars: usize) -> Vec<ConcreteMem> {
    let mut out = vec![ConcreteMem(vec![w.min_int(); nvars])];
    loop {
        let mut m = out.last().expect("non-empty").clone();
        let mut k = 0;
        loop {
            if k == nvars {
                return out;
            }
            if m.0[k] < w.max_int() {
                m.0[k] += 1;
                break;
            }
            m.0[k] = w.min_int();
            k += 1;
        }
        out.push(m);
    }
}

/// Lattice laws of the memory domain, exhaustively over all its values.
pub fn memory_lattice_battery(d: &MemoryDomain<IntervalDomain>) -> LawReport {
    let carrier = all_memories(d);
    let concretes = all_concrete_memories(d.num().width(), d.nvars());
    let canonical = |m: &AMem<Itv>| d.is_canonical(m);
    lattice_battery(
        d,
        &format!(
            "memory lattice, width {}, {} variables",
            d.num().width().bits(),
            d.nvars()
        ),
        &carrier,
        &concretes,
        Some(&canonical),
    )
}

/// A random expression of depth at most `depth` over `nvars` variables.
pub fn random_expr(rng: &mut impl Rng, depth: usize, nvars: usize, w: Width) -> Expr {
    if depth <= 1 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..5) {
            0 | 1 => Expr::Var(VarId(rng.gen_range(0..nvars))),
            2 | 3 => Expr::Const(rng.gen_range(w.min_int()..=w.max_int())),
            _ => Expr::Unknown,
        };
    }
    let op = BinOp::ALL[rng.gen_range(0..BinOp::ALL.len())];
    Expr::binop(
        op,
        random_expr(rng, depth - 1, nvars, w),
        random_expr(rng, depth - 1, nvars, w),
    )
}

fn random_memory(rng: &mut impl Rng, carrier: &[AMem<Itv>]) -> AMem<Itv> {
    carrier[rng.gen_range(0..carrier.len())].clone()
}

/// Soundness of `backward_asem`, its iteration, `assume` and `assign` on
/// random expressions (depth ≤ 4) and random memories, quantifying over
/// every concrete memory.
pub fn memory_transfer_battery(
    d: &MemoryDomain<IntervalDomain>,
    samples: usize,
    seed: u64,
) -> LawReport {
    let w = d.num().width();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let carrier = all_memories(d);
    let itvs = all_intervals(w);
    let concretes = all_concrete_memories(w, d.nvars());
    let mut t = Tally::new();
    let bw_dec = t.law("backward_asem decreasing");
    let bw_sound = t.law("backward_asem sound");
    let fp_dec = t.law("backward_asem_fp decreasing");
    let fp_sound = t.law("backward_asem_fp sound");
    let fp_term = t.law("backward_asem_fp within bound");
    let assume_sound = t.law("assume sound");
    let assign_sound = t.law("assign sound");
    let canon = t.law("canonical form preserved");
    let mut stats = FixStats::default();
    for _ in 0..samples {
        let e = random_expr(&mut rng, 4, d.nvars(), w);
        let m = random_memory(&mut rng, &carrier);
        let r = itvs[rng.gen_range(0..itvs.len())];
        let ctx = || format!("e = {e:?}, r = {r:?}, m = {m:?}");

        let b = d.backward_asem(&e, &r, &m);
        t.check(bw_dec, d.corder(&b, &m), ctx);
        t.check(canon, d.is_canonical(&b), ctx);
        let fp = d.backward_asem_fp(&e, &r, &m, &mut stats);
        t.check(fp_term, fp.is_ok(), || format!("{ctx}: {fp:?}", ctx = ctx()));
        let fp = fp.unwrap_or_else(|_| m.clone());
        t.check(fp_dec, d.corder(&fp, &m), ctx);
        t.check(canon, d.is_canonical(&fp), ctx);

        let assumed = d.assume(&m, &e, &mut stats);
        t.check(fp_term, assumed.is_ok(), || format!("assume {}", ctx()));
        let assumed = assumed.unwrap_or_else(|_| m.clone());
        t.check(canon, d.is_canonical(&assumed), ctx);

        let v = VarId(rng.gen_range(0..d.nvars()));
        let assigned = d.assign(&m, v, &e);
        t.check(canon, d.is_canonical(&assigned), ctx);

        for c in concretes.iter().filter(|c| d.cgamma(&m, c)) {
            let vals = osem_expr(c.values(), &e, w);
            if vals.iter().any(|x| d.num().cgamma(&r, &x)) {
                t.check(bw_sound, d.cgamma(&b, c), || format!("{} loses {c:?}", ctx()));
                t.check(fp_sound, d.cgamma(&fp, c), || format!("{} loses {c:?}", ctx()));
            }
            if vals.has_nonzero() {
                t.check(assume_sound, d.cgamma(&assumed, c), || {
                    format!("assume {} loses {c:?}", ctx())
                });
            }
            for x in vals.iter() {
                let mut c2 = c.clone();
                c2.set(v, x);
                t.check(assign_sound, d.cgamma(&assigned, &c2), || {
                    format!("assign {v:?} := {e:?} on {m:?} misses {c2:?}")
                });
            }
        }
    }
    t.finish(
        format!(
            "memory transfer functions, width {}, {} variables, {samples} samples",
            w.bits(),
            d.nvars()
        ),
        carrier.len(),
    )
}

/// Summary of all batteries for one configuration.
#[derive(Clone, Debug, Serialize)]
pub struct LawSummary {
    pub reports: Vec<LawReport>,
}

impl LawSummary {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(LawReport::passed)
    }
}

impl fmt::Display for LawSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.reports {
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Runs every battery: interval lattice, forward and backward operators at
/// `width`, and the memory batteries with two variables at `min(width, 3)`.
pub fn run_law_batteries(width: Width, config: &AnalysisConfig) -> LawSummary {
    assert!(width.bits() <= 4, "exhaustive batteries need width <= 4");
    let num = interval_memory(width, 1, config).num().clone();
    let carrier = all_intervals(width);
    let mem_width = Width::new(width.bits().min(3)).expect("valid width");
    let mem = interval_memory(mem_width, 2, config);
    let transfer = interval_memory(width, 2, config);
    LawSummary {
        reports: vec![
            interval_lattice_battery(&num),
            forward_battery(&num, &carrier),
            backward_battery(&num, &carrier, 10_000, 0),
            memory_lattice_battery(&mem),
            memory_transfer_battery(&transfer, 2_000, 0),
        ],
    }
}
