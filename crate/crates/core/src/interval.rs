//! The interval domain over wrapping machine integers.
//!
//! Intervals are always bounded by the width's `min_int`/`max_int`, so top is
//! the full range rather than an infinite interval. Forward operators fall
//! back to top whenever a bound computation might wrap.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::difftest::Mutant;
use crate::domain::{AbstractDomain, Lattice, NumDomain};
use crate::machine_int::{BinOp, Width};

/// An interval `[low, up]` with `low <= up`, or the empty interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Itv {
    Bot,
    Val { low: i64, up: i64 },
}

impl Itv {
    pub fn val(low: i64, up: i64) -> Itv {
        assert!(low <= up, "malformed interval [{low}, {up}]");
        Itv::Val { low, up }
    }

    pub fn singleton(x: i64) -> Itv {
        Itv::Val { low: x, up: x }
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, Itv::Bot)
    }

    pub fn bounds(&self) -> Option<(i64, i64)> {
        match *self {
            Itv::Bot => None,
            Itv::Val { low, up } => Some((low, up)),
        }
    }

    pub fn contains(&self, x: i64) -> bool {
        match *self {
            Itv::Bot => false,
            Itv::Val { low, up } => low <= x && x <= up,
        }
    }
}

impl fmt::Display for Itv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Itv::Bot => f.write_str("⊥"),
            Itv::Val { low, up } => write!(f, "[{low}, {up}]"),
        }
    }
}

/// Three-valued truth of an interval read as a boolean.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UBool {
    Unk,
    TT,
    FF,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThresholdError {
    #[error("threshold {value} does not fit in {bits}-bit integers")]
    OutOfRange { value: i128, bits: u32 },
    #[error("cannot parse threshold `{0}`")]
    Syntax(String),
}

/// Widening thresholds: strictly increasing, starting at `min_int` and
/// ending at `max_int`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Thresholds(Vec<i64>);

impl Thresholds {
    pub const DEFAULT_INNER: [i128; 10] = [-64, -32, -16, -8, -4, 4, 8, 16, 32, 64];

    /// The default ladder `min, -64, -32, ..., 32, 64, max`, keeping only the
    /// values that fit in `width`.
    pub fn default_for(width: Width) -> Self {
        let inner = Self::DEFAULT_INNER
            .iter()
            .copied()
            .filter(|v| width.inbounds(*v))
            .map(|v| v as i64);
        Self::normalized(width, inner)
    }

    /// Sorts and deduplicates user thresholds and brackets them by the
    /// width's extremes. Values outside the width are rejected.
    pub fn new(width: Width, values: impl IntoIterator<Item = i128>) -> Result<Self, ThresholdError> {
        let mut out = Vec::new();
        for v in values {
            if !width.inbounds(v) {
                return Err(ThresholdError::OutOfRange {
                    value: v,
                    bits: width.bits(),
                });
            }
            out.push(v as i64);
        }
        Ok(Self::normalized(width, out))
    }

    /// Parses a comma-separated list of integers.
    pub fn parse(width: Width, text: &str) -> Result<Self, ThresholdError> {
        let values = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<i128>().map_err(|_| ThresholdError::Syntax(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(width, values)
    }

    fn normalized(width: Width, values: impl IntoIterator<Item = i64>) -> Self {
        let mut v: Vec<i64> = values.into_iter().collect();
        v.push(width.min_int());
        v.push(width.max_int());
        v.sort_unstable();
        v.dedup();
        Thresholds(v)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }
}

/// The interval domain for one integer width.
#[derive(Clone, Debug)]
pub struct IntervalDomain {
    width: Width,
    thresholds: Thresholds,
    mutant: Option<Mutant>,
}

impl IntervalDomain {
    pub fn new(width: Width) -> Self {
        IntervalDomain {
            width,
            thresholds: Thresholds::default_for(width),
            mutant: None,
        }
    }

    pub fn with_thresholds(width: Width, thresholds: Thresholds) -> Self {
        debug_assert_eq!(thresholds.0.first(), Some(&width.min_int()));
        debug_assert_eq!(thresholds.0.last(), Some(&width.max_int()));
        IntervalDomain {
            width,
            thresholds,
            mutant: None,
        }
    }

    /// A deliberately broken copy of this domain, for validating the test
    /// harness.
    pub fn mutated(mut self, mutant: Mutant) -> Self {
        self.mutant = Some(mutant);
        self
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    fn min(&self) -> i64 {
        self.width.min_int()
    }

    fn max(&self) -> i64 {
        self.width.max_int()
    }

    fn has(&self, m: Mutant) -> bool {
        self.mutant == Some(m)
    }

    /// `[x, y]` if both fit in the width and `x <= y`, else bottom.
    pub fn mk(&self, x: i128, y: i128) -> Itv {
        if self.width.inbounds(x) && self.width.inbounds(y) && x <= y {
            Itv::Val {
                low: x as i64,
                up: y as i64,
            }
        } else {
            Itv::Bot
        }
    }

    pub fn card(&self, i: &Itv) -> u128 {
        match *i {
            Itv::Bot => 0,
            Itv::Val { low, up } => (up as i128 - low as i128 + 1) as u128,
        }
    }

    pub fn widen_bound_r(&self, b: i64) -> i64 {
        if b == self.max() {
            return b;
        }
        *self
            .thresholds
            .0
            .iter()
            .find(|&&u| u > b)
            .expect("thresholds end at max_int")
    }

    pub fn widen_bound_l(&self, b: i64) -> i64 {
        if b == self.min() {
            return b;
        }
        *self
            .thresholds
            .0
            .iter()
            .rev()
            .find(|&&u| u < b)
            .expect("thresholds start at min_int")
    }

    pub fn as_bool(&self, x: &Itv) -> UBool {
        if *x == Itv::singleton(0) || x.is_bot() {
            UBool::FF
        } else if x.contains(0) {
            UBool::Unk
        } else {
            UBool::TT
        }
    }

    pub fn add(&self, x: &Itv, y: &Itv) -> Itv {
        match (*x, *y) {
            (Itv::Val { low: a, up: b }, Itv::Val { low: c, up: d }) => {
                if self.width.add_overflows(a, c) || self.width.add_overflows(b, d) {
                    self.top()
                } else {
                    Itv::val(a + c, b + d)
                }
            }
            _ => Itv::Bot,
        }
    }

    /// Covers `{ -v | v ∈ i }` under wrapping negation. Since `-min_int`
    /// wraps to `min_int`, an interval containing `min_int` maps to top.
    pub fn inv(&self, i: &Itv) -> Itv {
        match *i {
            Itv::Val { low, .. } if low == self.min() && !self.has(Mutant::InvWithoutMinGuard) => {
                self.top()
            }
            Itv::Val { low, up } => self.mk(self.width.neg(up) as i128, self.width.neg(low) as i128),
            Itv::Bot => Itv::Bot,
        }
    }

    pub fn sub(&self, x: &Itv, y: &Itv) -> Itv {
        self.add(x, &self.inv(y))
    }

    pub fn mul(&self, x: &Itv, y: &Itv) -> Itv {
        match (*x, *y) {
            (Itv::Val { low: a, up: b }, Itv::Val { low: c, up: d }) => {
                let w = self.width;
                if w.mul_overflows(a, c)
                    || w.mul_overflows(a, d)
                    || w.mul_overflows(b, c)
                    || w.mul_overflows(b, d)
                {
                    return self.top();
                }
                let corners = [a * c, a * d, b * c, b * d];
                let lo = *corners.iter().min().expect("four corners");
                let hi = *corners.iter().max().expect("four corners");
                Itv::val(lo, hi)
            }
            _ => Itv::Bot,
        }
    }

    pub fn eq(&self, x: &Itv, y: &Itv) -> Itv {
        match (*x, *y) {
            (Itv::Bot, _) | (_, Itv::Bot) => Itv::Bot,
            (Itv::Val { low: a, up: b }, Itv::Val { low: c, up: d }) => {
                if a == b && c == d && a == c {
                    Itv::singleton(1)
                } else if self.meet(x, y).is_bot() {
                    Itv::singleton(0)
                } else {
                    Itv::val(0, 1)
                }
            }
        }
    }

    pub fn lt(&self, x: &Itv, y: &Itv) -> Itv {
        match (*x, *y) {
            (Itv::Bot, _) | (_, Itv::Bot) => Itv::Bot,
            (Itv::Val { low: a, up: b }, Itv::Val { low: c, up: d }) => {
                if b < c {
                    Itv::singleton(1)
                } else if a >= d {
                    Itv::singleton(0)
                } else {
                    Itv::val(0, 1)
                }
            }
        }
    }

    pub fn andi(&self, x: &Itv, y: &Itv) -> Itv {
        if x.is_bot() || y.is_bot() {
            return Itv::Bot;
        }
        match (self.as_bool(x), self.as_bool(y)) {
            (UBool::TT, UBool::TT) => Itv::singleton(1),
            (UBool::FF, _) | (_, UBool::FF) => Itv::singleton(0),
            _ => Itv::val(0, 1),
        }
    }

    pub fn ori(&self, x: &Itv, y: &Itv) -> Itv {
        if x.is_bot() || y.is_bot() {
            return Itv::Bot;
        }
        match (self.as_bool(x), self.as_bool(y)) {
            (UBool::TT, _) | (_, UBool::TT) => Itv::singleton(1),
            (UBool::FF, UBool::FF) => Itv::singleton(0),
            _ => Itv::val(0, 1),
        }
    }

    /// Over-approximates `γ(x) ∖ γ(y)`. Only a prefix or suffix of `x`
    /// covered by `y` can be trimmed; holes are not representable.
    pub fn diff(&self, x: &Itv, y: &Itv) -> Itv {
        match (*x, *y) {
            (Itv::Bot, _) => Itv::Bot,
            (_, Itv::Bot) => *x,
            (Itv::Val { low: a, up: b }, Itv::Val { low: c, up: d }) => {
                if c <= a && b <= d {
                    Itv::Bot
                } else if c <= a && a <= d {
                    self.mk(d as i128 + 1, b as i128)
                } else if c <= b && b <= d {
                    self.mk(a as i128, c as i128 - 1)
                } else {
                    *x
                }
            }
        }
    }

    fn incrementable(&self, i: &Itv) -> bool {
        matches!(*i, Itv::Val { up, .. } if up < self.max())
    }

    fn decrementable(&self, i: &Itv) -> bool {
        matches!(*i, Itv::Val { low, .. } if low > self.min())
    }

    /// Refines `x` and `y` assuming `x < y` holds.
    pub fn backward_lt_true(&self, x: &Itv, y: &Itv) -> (Itv, Itv) {
        match (*x, *y) {
            (Itv::Val { low: a, up: b }, Itv::Val { low: c, up: d }) => (
                self.mk(a as i128, (b as i128).min(d as i128 - 1)),
                self.mk((a as i128 + 1).max(c as i128), d as i128),
            ),
            _ => (*x, *y),
        }
    }

    pub fn backward_lt(&self, x: &Itv, y: &Itv, r: &Itv) -> (Itv, Itv) {
        let one = Itv::singleton(1);
        match self.as_bool(r) {
            UBool::TT => self.backward_lt_true(x, y),
            UBool::FF => {
                // ¬(x < y) is y < x + 1, or else y - 1 < x
                if self.incrementable(x) || self.has(Mutant::LtWithoutIncrementableGuard) {
                    let (ry, rx) = self.backward_lt_true(y, &self.add(x, &one));
                    (self.sub(&rx, &one), ry)
                } else if self.decrementable(y) {
                    let (ry, rx) = self.backward_lt_true(&self.sub(y, &one), x);
                    (rx, self.add(&ry, &one))
                } else {
                    (*x, *y)
                }
            }
            UBool::Unk => (*x, *y),
        }
    }

    fn backward_and(&self, x: &Itv, y: &Itv, r: &Itv) -> (Itv, Itv) {
        let zero = Itv::singleton(0);
        match (self.as_bool(r), self.as_bool(x), self.as_bool(y)) {
            (UBool::FF, UBool::TT, _) => (*x, self.meet(y, &zero)),
            (UBool::FF, _, UBool::TT) => (self.meet(x, &zero), *y),
            (UBool::TT, _, _) => (self.diff(x, &zero), self.diff(y, &zero)),
            _ => (*x, *y),
        }
    }

    fn backward_or(&self, x: &Itv, y: &Itv, r: &Itv) -> (Itv, Itv) {
        use UBool::*;
        let zero = Itv::singleton(0);
        match (self.as_bool(r), self.as_bool(x), self.as_bool(y)) {
            (TT, FF, Unk) | (TT, FF, FF) => (*x, self.diff(y, &zero)),
            (TT, Unk, FF) => (self.diff(x, &zero), *y),
            (FF, _, TT) | (FF, TT, _) => (self.meet(x, &zero), self.meet(y, &zero)),
            _ => (*x, *y),
        }
    }
}

impl Lattice for IntervalDomain {
    type Value = Itv;

    fn corder(&self, x: &Itv, y: &Itv) -> bool {
        match (*x, *y) {
            (Itv::Bot, _) => true,
            (_, Itv::Bot) => false,
            (Itv::Val { low: a, up: b }, Itv::Val { low: c, up: d }) => a >= c && b <= d,
        }
    }

    fn join(&self, x: &Itv, y: &Itv) -> Itv {
        match (*x, *y) {
            (Itv::Bot, k) | (k, Itv::Bot) => k,
            (Itv::Val { low: a, up: b }, Itv::Val { low: c, up: d }) => Itv::val(a.min(c), b.max(d)),
        }
    }

    fn meet(&self, x: &Itv, y: &Itv) -> Itv {
        match (*x, *y) {
            (Itv::Val { low: a, up: b }, Itv::Val { low: c, up: d }) => {
                self.mk(a.max(c) as i128, b.min(d) as i128)
            }
            _ => Itv::Bot,
        }
    }

    fn bottom(&self) -> Itv {
        Itv::Bot
    }

    fn top(&self) -> Itv {
        Itv::val(self.min(), self.max())
    }

    fn is_bottom(&self, x: &Itv) -> bool {
        x.is_bot()
    }
}

impl AbstractDomain for IntervalDomain {
    type Concrete = i64;

    fn cgamma(&self, x: &Itv, c: &i64) -> bool {
        x.contains(*c)
    }

    fn widen(&self, x: &Itv, y: &Itv) -> Itv {
        if self.has(Mutant::WidenIsMeet) {
            return self.meet(x, y);
        }
        match (*x, *y) {
            (Itv::Bot, k) | (k, Itv::Bot) => k,
            (Itv::Val { low: a, up: b }, Itv::Val { low: c, up: d }) => Itv::val(
                if a <= c { a } else { self.widen_bound_l(c) },
                if b >= d { b } else { self.widen_bound_r(d) },
            ),
        }
    }

    fn measure(&self, x: &Itv) -> u128 {
        self.card(x)
    }

    fn measure_max(&self) -> u128 {
        self.width.size() + 1
    }
}

impl NumDomain for IntervalDomain {
    fn width(&self) -> Width {
        self.width
    }

    fn beta(&self, x: i64) -> Itv {
        Itv::singleton(x)
    }

    fn forward_binop(&self, op: BinOp, x: &Itv, y: &Itv) -> Itv {
        match op {
            BinOp::Plus => self.add(x, y),
            BinOp::Minus => self.sub(x, y),
            BinOp::Mult => self.mul(x, y),
            BinOp::Eq => self.eq(x, y),
            BinOp::Lt => self.lt(x, y),
            BinOp::And => self.andi(x, y),
            BinOp::Or => self.ori(x, y),
        }
    }

    fn backward_binop(&self, op: BinOp, x: &Itv, y: &Itv, r: &Itv) -> (Itv, Itv) {
        match op {
            BinOp::Plus => (self.meet(x, &self.sub(r, y)), self.meet(y, &self.sub(r, x))),
            BinOp::Minus => (self.meet(x, &self.add(r, y)), self.meet(y, &self.sub(x, r))),
            BinOp::Mult => {
                let one = Itv::singleton(1);
                let h = |i: &Itv, j: &Itv| if *j == one { self.meet(i, r) } else { *i };
                (h(x, y), h(y, x))
            }
            BinOp::Eq => match self.as_bool(r) {
                UBool::TT => {
                    let both = self.meet(x, y);
                    (both, both)
                }
                _ => (*x, *y),
            },
            BinOp::Lt => self.backward_lt(x, y, r),
            BinOp::And => self.backward_and(x, y, r),
            BinOp::Or => self.backward_or(x, y, r),
        }
    }

    fn gt0(&self) -> Itv {
        Itv::val(1, self.max())
    }

    fn lt0(&self) -> Itv {
        Itv::val(self.min(), -1)
    }
}

/// Every interval of `width` (bottom first), for exhaustive checks.
pub fn all_intervals(width: Width) -> Vec<Itv> {
    let mut out = vec![Itv::Bot];
    for low in width.values() {
        for up in low..=width.max_int() {
            out.push(Itv::val(low, up));
        }
    }
    out
}
