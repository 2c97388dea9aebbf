//! Executable concrete semantics.
//!
//! The set-valued semantics of IMP is computed exactly over explicit finite
//! sets: every machine integer of a small width, and every memory over a
//! program's variables. This is the ground truth the analyzer is tested
//! against. For widths where the state space is too large, [`sample_run`]
//! draws single witnesses of the same relation instead.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use smallvec::SmallVec;
use thiserror::Error;

use crate::lang::{Expr, Stmt};
use crate::machine_int::{BinOp, Width};

/// Default cap on the number of memories in a state space.
pub const DEFAULT_STATE_BUDGET: u64 = 1 << 24;

/// Largest width for which a [`ValueSet`] can be materialized.
pub const MAX_VALUESET_BITS: u32 = 24;

/// A set of machine integers of one width, stored as a bitset indexed by
/// `value - min_int`.
#[derive(Clone, PartialEq, Eq)]
pub struct ValueSet {
    width: Width,
    words: SmallVec<[u64; 4]>,
}

fn word_count(bits: u64) -> usize {
    bits.div_ceil(64) as usize
}

impl ValueSet {
    pub fn empty(width: Width) -> Self {
        assert!(
            width.bits() <= MAX_VALUESET_BITS,
            "value sets are limited to {MAX_VALUESET_BITS}-bit widths"
        );
        ValueSet {
            width,
            words: SmallVec::from_elem(0, word_count(width.size() as u64)),
        }
    }

    pub fn full(width: Width) -> Self {
        let mut s = ValueSet::empty(width);
        let n = width.size() as u64;
        for (i, w) in s.words.iter_mut().enumerate() {
            let lo = i as u64 * 64;
            let count = (n - lo).min(64);
            *w = if count == 64 { u64::MAX } else { (1u64 << count) - 1 };
        }
        s
    }

    pub fn singleton(width: Width, x: i64) -> Self {
        let mut s = ValueSet::empty(width);
        s.insert(x);
        s
    }

    pub fn from_values(width: Width, xs: impl IntoIterator<Item = i64>) -> Self {
        let mut s = ValueSet::empty(width);
        for x in xs {
            s.insert(x);
        }
        s
    }

    pub fn width(&self) -> Width {
        self.width
    }

    fn slot(&self, x: i64) -> usize {
        debug_assert!(self.width.inbounds(x as i128));
        (x as i128 - self.width.min_int() as i128) as usize
    }

    pub fn insert(&mut self, x: i64) {
        let i = self.slot(x);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, x: i64) -> bool {
        let i = self.slot(x);
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_full(&self) -> bool {
        *self == ValueSet::full(self.width)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// True iff the set holds a value other than zero.
    pub fn has_nonzero(&self) -> bool {
        let zero = self.slot(0);
        self.words.iter().enumerate().any(|(i, w)| {
            let mask = if i == zero / 64 { !(1u64 << (zero % 64)) } else { u64::MAX };
            w & mask != 0
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        let min = self.width.min_int();
        iter_bits(&self.words).map(move |i| (min as i128 + i as i128) as i64)
    }

    pub fn union(&self, other: &ValueSet) -> ValueSet {
        let mut s = self.clone();
        for (a, b) in s.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
        s
    }

    pub fn is_subset(&self, other: &ValueSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// `{ -x | x ∈ self }` under wrapping negation.
    pub fn inverse(&self) -> ValueSet {
        ValueSet::from_values(self.width, self.iter().map(|x| self.width.neg(x)))
    }
}

impl fmt::Debug for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            }
        })
    })
}

/// `{ op(a, b) | a ∈ xs, b ∈ ys }`.
pub fn lift_binop(op: BinOp, xs: &ValueSet, ys: &ValueSet) -> ValueSet {
    assert_eq!(xs.width, ys.width, "value sets of different widths");
    let w = xs.width;
    if xs.is_empty() || ys.is_empty() {
        return ValueSet::empty(w);
    }
    // translation by any value is a bijection on the wrapped range
    if matches!(op, BinOp::Plus | BinOp::Minus) && (xs.is_full() || ys.is_full()) {
        return ValueSet::full(w);
    }
    let mut out = ValueSet::empty(w);
    for a in xs.iter() {
        for b in ys.iter() {
            out.insert(w.binop(op, a, b));
        }
    }
    out
}

/// A total assignment of values to a program's variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ConcreteMem(pub Vec<i64>);

impl ConcreteMem {
    pub fn get(&self, v: crate::lang::VarId) -> i64 {
        self.0[v.index()]
    }

    pub fn set(&mut self, v: crate::lang::VarId, x: i64) {
        self.0[v.index()] = x;
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }
}

/// The possible values of `e` in memory `m`.
pub fn osem_expr(m: &[i64], e: &Expr, width: Width) -> ValueSet {
    match e {
        Expr::Const(c) => ValueSet::singleton(width, *c),
        Expr::Var(v) => ValueSet::singleton(width, m[v.index()]),
        Expr::Unknown => ValueSet::full(width),
        Expr::BinOp(op, l, r) => {
            lift_binop(*op, &osem_expr(m, l, width), &osem_expr(m, r, width))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("state space of {required} memories exceeds the budget of {allowed}")]
pub struct BudgetExceeded {
    /// `None` when the count does not even fit in 64 bits.
    pub required: StateCount,
    pub allowed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateCount(pub Option<u64>);

impl fmt::Display for StateCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "more than 2^63"),
        }
    }
}

/// All memories over `nvars` variables of a given width.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateSpace {
    width: Width,
    nvars: usize,
}

impl StateSpace {
    pub fn new(width: Width, nvars: usize, budget: u64) -> Result<Self, BudgetExceeded> {
        let total_bits = width.bits() as u64 * nvars as u64;
        let required = if total_bits < 64 { Some(1u64 << total_bits) } else { None };
        match required {
            Some(n) if n <= budget => Ok(StateSpace { width, nvars }),
            _ => Err(BudgetExceeded {
                required: StateCount(required),
                allowed: budget,
            }),
        }
    }

    pub fn width(&self) -> Width {
        self.width
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn size(&self) -> usize {
        1usize << (self.width.bits() as usize * self.nvars)
    }

    fn shift(&self, var: usize) -> usize {
        self.width.bits() as usize * var
    }

    fn field_mask(&self) -> usize {
        (1usize << self.width.bits()) - 1
    }

    pub fn encode(&self, m: &[i64]) -> usize {
        let min = self.width.min_int() as i128;
        m.iter()
            .enumerate()
            .map(|(i, &x)| ((x as i128 - min) as usize) << self.shift(i))
            .sum()
    }

    pub fn decode_into(&self, idx: usize, out: &mut [i64]) {
        let min = self.width.min_int() as i128;
        for (i, slot) in out.iter_mut().enumerate() {
            let field = (idx >> self.shift(i)) & self.field_mask();
            *slot = (min + field as i128) as i64;
        }
    }

    pub fn decode(&self, idx: usize) -> ConcreteMem {
        let mut m = vec![0; self.nvars];
        self.decode_into(idx, &mut m);
        ConcreteMem(m)
    }

    fn with_var(&self, idx: usize, var: usize, x: i64) -> usize {
        let field = (x as i128 - self.width.min_int() as i128) as usize;
        let sh = self.shift(var);
        (idx & !(self.field_mask() << sh)) | (field << sh)
    }
}

/// A set of memories of one [`StateSpace`], as a dense bitset.
#[derive(Clone, PartialEq, Eq)]
pub struct MemSet {
    space: StateSpace,
    words: Vec<u64>,
}

impl MemSet {
    pub fn empty(space: StateSpace) -> Self {
        MemSet {
            space,
            words: vec![0; word_count(space.size() as u64)],
        }
    }

    pub fn full(space: StateSpace) -> Self {
        let mut s = MemSet::empty(space);
        for i in 0..space.size() {
            s.insert_index(i);
        }
        s
    }

    pub fn singleton(space: StateSpace, m: &[i64]) -> Self {
        let mut s = MemSet::empty(space);
        s.insert(m);
        s
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn insert(&mut self, m: &[i64]) {
        self.insert_index(self.space.encode(m));
    }

    pub fn contains(&self, m: &[i64]) -> bool {
        self.contains_index(self.space.encode(m))
    }

    fn insert_index(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn contains_index(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn union_with(&mut self, other: &MemSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn is_subset(&self, other: &MemSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// `self ∖ other`.
    pub fn difference(&self, other: &MemSet) -> MemSet {
        let mut s = self.clone();
        for (a, b) in s.words.iter_mut().zip(&other.words) {
            *a &= !*b;
        }
        s
    }

    fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        iter_bits(&self.words)
    }

    pub fn iter(&self) -> impl Iterator<Item = ConcreteMem> + '_ {
        self.indices().map(|i| self.space.decode(i))
    }
}

impl fmt::Debug for MemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|m| m.0)).finish()
    }
}

/// Every final memory reachable by `s` from some memory in `inputs`.
pub fn post_image(s: &Stmt, inputs: &MemSet) -> MemSet {
    let space = inputs.space;
    let width = space.width;
    match s {
        Stmt::Assign(v, e) => {
            let mut out = MemSet::empty(space);
            let mut buf = vec![0; space.nvars];
            for idx in inputs.indices() {
                space.decode_into(idx, &mut buf);
                for x in osem_expr(&buf, e, width).iter() {
                    out.insert_index(space.with_var(idx, v.index(), x));
                }
            }
            out
        }
        Stmt::Assume(e) => {
            let mut out = MemSet::empty(space);
            let mut buf = vec![0; space.nvars];
            for idx in inputs.indices() {
                space.decode_into(idx, &mut buf);
                if osem_expr(&buf, e, width).has_nonzero() {
                    out.insert_index(idx);
                }
            }
            out
        }
        Stmt::Seq(a, b) => post_image(b, &post_image(a, inputs)),
        Stmt::Choice(a, b) => {
            let mut out = post_image(a, inputs);
            out.union_with(&post_image(b, inputs));
            out
        }
        Stmt::Loop(body) => {
            // the image is a union of per-memory images, so only memories
            // not seen before need another pass through the body
            let mut reached = inputs.clone();
            let mut frontier = inputs.clone();
            while !frontier.is_empty() {
                let next = post_image(body, &frontier).difference(&reached);
                reached.union_with(&next);
                frontier = next;
            }
            reached
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SampleError {
    #[error("step budget exhausted")]
    FuelExhausted,
    #[error("no witness found: every attempt was blocked by an assume")]
    NoWitness,
}

/// Knobs for [`sample_run`].
#[derive(Clone, Copy, Debug)]
pub struct SampleConfig {
    /// Statement executions allowed across all attempts.
    pub fuel: u64,
    /// Restarts after an `assume` blocks the run.
    pub retries: u32,
    /// Probability of running one more loop iteration.
    pub loop_continue: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            fuel: 10_000,
            retries: 64,
            loop_continue: 0.5,
        }
    }
}

struct Sampler {
    rng: ChaCha8Rng,
    fuel: u64,
    width: Width,
    loop_continue: f64,
}

impl Sampler {
    fn eval(&mut self, m: &[i64], e: &Expr) -> i64 {
        match e {
            Expr::Const(c) => *c,
            Expr::Var(v) => m[v.index()],
            Expr::Unknown => self.rng.gen_range(self.width.min_int()..=self.width.max_int()),
            Expr::BinOp(op, l, r) => {
                let a = self.eval(m, l);
                let b = self.eval(m, r);
                self.width.binop(*op, a, b)
            }
        }
    }

    // Ok(None) means an assume blocked this run.
    fn exec(&mut self, s: &Stmt, mut m: Vec<i64>) -> Result<Option<Vec<i64>>, SampleError> {
        if self.fuel == 0 {
            return Err(SampleError::FuelExhausted);
        }
        self.fuel -= 1;
        match s {
            Stmt::Assign(v, e) => {
                m[v.index()] = self.eval(&m, e);
                Ok(Some(m))
            }
            Stmt::Assume(e) => Ok((self.eval(&m, e) != 0).then_some(m)),
            Stmt::Seq(a, b) => match self.exec(a, m)? {
                Some(m) => self.exec(b, m),
                None => Ok(None),
            },
            Stmt::Choice(a, b) => {
                if self.rng.gen_bool(0.5) {
                    self.exec(a, m)
                } else {
                    self.exec(b, m)
                }
            }
            Stmt::Loop(body) => {
                while self.rng.gen_bool(self.loop_continue) {
                    match self.exec(body, m)? {
                        Some(next) => m = next,
                        None => return Ok(None),
                    }
                }
                Ok(Some(m))
            }
        }
    }
}

/// Draws one final memory `m_f` with `m_f ∈ post_image(s, {m})`.
///
/// Nondeterminism is resolved by a seeded generator: `?` is uniform, each
/// branch of a choice is equally likely, and loops unroll a geometrically
/// distributed number of times.
pub fn sample_run(
    s: &Stmt,
    m: &ConcreteMem,
    width: Width,
    seed: u64,
    cfg: SampleConfig,
) -> Result<ConcreteMem, SampleError> {
    let mut sampler = Sampler {
        rng: ChaCha8Rng::seed_from_u64(seed),
        fuel: cfg.fuel,
        width,
        loop_continue: cfg.loop_continue,
    };
    for _ in 0..=cfg.retries {
        if let Some(out) = sampler.exec(s, m.0.clone())? {
            return Ok(ConcreteMem(out));
        }
    }
    Err(SampleError::NoWitness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{gen_random, Stmt};

    fn w(bits: u32) -> Width {
        Width::new(bits).unwrap()
    }

    fn space(bits: u32, nvars: usize) -> StateSpace {
        StateSpace::new(w(bits), nvars, DEFAULT_STATE_BUDGET).unwrap()
    }

    #[test]
    fn lift_examples() {
        let w8 = w(8);
        let r = lift_binop(
            BinOp::Plus,
            &ValueSet::from_values(w8, [1, 2]),
            &ValueSet::singleton(w8, 10),
        );
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![11, 12]);
        assert!(lift_binop(BinOp::Plus, &ValueSet::empty(w8), &ValueSet::full(w8)).is_empty());
    }

    #[test]
    fn lift_matches_double_loop() {
        let w4 = w(4);
        let full = ValueSet::full(w4);
        for op in BinOp::ALL {
            let mut expected = ValueSet::empty(w4);
            for a in w4.values() {
                for b in w4.values() {
                    expected.insert(w4.binop(op, a, b));
                }
            }
            assert_eq!(lift_binop(op, &full, &full), expected, "{op:?}");
        }
        // the shortcut for translations agrees with enumeration
        let some = ValueSet::from_values(w4, [-3, 5]);
        for op in [BinOp::Plus, BinOp::Minus] {
            let mut expected = ValueSet::empty(w4);
            for a in some.iter() {
                for b in w4.values() {
                    expected.insert(w4.binop(op, a, b));
                    expected.insert(w4.binop(op, b, a));
                }
            }
            assert_eq!(lift_binop(op, &some, &full), expected);
        }
    }

    #[test]
    fn expression_semantics() {
        let w4 = w(4);
        assert_eq!(osem_expr(&[0], &Expr::Const(3), w4), ValueSet::singleton(w4, 3));
        assert!(osem_expr(&[0], &Expr::Unknown, w4).is_full());
        let e = Expr::binop(BinOp::Plus, Expr::var(0), Expr::Unknown);
        assert!(osem_expr(&[2], &e, w4).is_full());
    }

    #[test]
    fn has_nonzero() {
        let w4 = w(4);
        assert!(!ValueSet::singleton(w4, 0).has_nonzero());
        assert!(!ValueSet::empty(w4).has_nonzero());
        assert!(ValueSet::from_values(w4, [0, -8]).has_nonzero());
        assert!(ValueSet::full(w(8)).has_nonzero());
    }

    #[test]
    fn statement_images() {
        let sp = space(4, 2);
        let m0 = [1, 2];
        let out = post_image(&Stmt::assign(0, Expr::Const(5)), &MemSet::singleton(sp, &m0));
        assert_eq!(out, MemSet::singleton(sp, &[5, 2]));
        let out = post_image(&Stmt::Assume(Expr::Const(0)), &MemSet::full(sp));
        assert!(out.is_empty());
    }

    #[test]
    fn increment_loop_wraps_to_every_value() {
        let sp = space(4, 1);
        let step = Stmt::assign(0, Expr::binop(BinOp::Plus, Expr::var(0), Expr::Const(1)));
        let out = post_image(&Stmt::looping(step.clone()), &MemSet::singleton(sp, &[0]));
        // independent check: iterate the step function to a fixpoint
        let mut reached = MemSet::singleton(sp, &[0]);
        loop {
            let mut next = reached.clone();
            next.union_with(&post_image(&step, &reached));
            if next == reached {
                break;
            }
            reached = next;
        }
        assert_eq!(out, reached);
        assert_eq!(out.len(), 16);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(StateSpace::new(w(16), 4, DEFAULT_STATE_BUDGET).is_err());
        assert!(StateSpace::new(w(64), 2, DEFAULT_STATE_BUDGET).is_err());
        let err = StateSpace::new(w(8), 4, DEFAULT_STATE_BUDGET).unwrap_err();
        assert_eq!(err.required, StateCount(Some(1 << 32)));
        assert!(StateSpace::new(w(4), 3, DEFAULT_STATE_BUDGET).is_ok());
    }

    #[test]
    fn encode_decode() {
        let sp = space(3, 3);
        for i in 0..sp.size() {
            let m = sp.decode(i);
            assert_eq!(sp.encode(&m.0), i);
        }
    }

    #[test]
    fn sampler_basics() {
        let w4 = w(4);
        let m0 = ConcreteMem(vec![3, 3]);
        for seed in 0..20 {
            let out = sample_run(&Stmt::assign(0, Expr::Const(1)), &m0, w4, seed, Default::default());
            assert_eq!(out, Ok(ConcreteMem(vec![1, 3])));
        }
        assert_eq!(
            sample_run(&Stmt::Assume(Expr::Const(0)), &m0, w4, 0, Default::default()),
            Err(SampleError::NoWitness)
        );
        let spin = Stmt::looping(Stmt::assign(0, Expr::Const(0)));
        let cfg = SampleConfig {
            fuel: 5,
            loop_continue: 1.0,
            ..Default::default()
        };
        assert_eq!(sample_run(&spin, &m0, w4, 0, cfg), Err(SampleError::FuelExhausted));
    }

    #[test]
    fn sampled_memories_lie_in_the_image() {
        let w4 = w(4);
        let sp = space(4, 2);
        let mut checked = 0;
        for seed in 0..1000u64 {
            let p = gen_random(seed, 8, 2, w4);
            let m0 = sp.decode((seed as usize * 37) % sp.size());
            let image = post_image(&p.body, &MemSet::singleton(sp, &m0.0));
            match sample_run(&p.body, &m0, w4, seed, Default::default()) {
                Ok(mf) => {
                    assert!(image.contains(&mf.0), "seed {seed}");
                    checked += 1;
                }
                Err(SampleError::NoWitness) | Err(SampleError::FuelExhausted) => {}
            }
        }
        assert!(checked > 500);
    }
}
