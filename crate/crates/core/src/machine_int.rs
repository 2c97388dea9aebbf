//! Fixed-width two's-complement machine integers.
//!
//! All arithmetic wraps on overflow. Values are carried as `i64` together
//! with a [`Width`]; intermediate results are computed in `i128`, which holds
//! any sum or product of two 64-bit operands exactly.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WidthError {
    #[error("bit width {0} is outside the supported range 2..=64")]
    OutOfRange(u32),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("value {value} does not fit in a {bits}-bit machine integer")]
pub struct OutOfBounds {
    pub value: i128,
    pub bits: u32,
}

/// Bit width of the machine integers, between 2 and 64 inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Width(u32);

impl Width {
    pub const W64: Width = Width(64);

    pub fn new(bits: u32) -> Result<Self, WidthError> {
        if (2..=64).contains(&bits) {
            Ok(Width(bits))
        } else {
            Err(WidthError::OutOfRange(bits))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn min_int(self) -> i64 {
        (-(1i128 << (self.0 - 1))) as i64
    }

    pub fn max_int(self) -> i64 {
        ((1i128 << (self.0 - 1)) - 1) as i64
    }

    /// Number of distinct values, `2^bits`.
    pub fn size(self) -> u128 {
        1u128 << self.0
    }

    pub fn inbounds(self, x: i128) -> bool {
        self.min_int() as i128 <= x && x <= self.max_int() as i128
    }

    /// Reduces an unbounded integer modulo `2^bits` into `[min_int, max_int]`.
    pub fn wrap(self, x: i128) -> i64 {
        let size = 1i128 << self.0;
        let shifted = (x - self.min_int() as i128).rem_euclid(size);
        (shifted + self.min_int() as i128) as i64
    }

    /// Concrete semantics of a binary operator on raw in-bounds values.
    pub fn binop(self, op: BinOp, a: i64, b: i64) -> i64 {
        let (a, b) = (a as i128, b as i128);
        match op {
            BinOp::Plus => self.wrap(a + b),
            BinOp::Minus => self.wrap(a - b),
            BinOp::Mult => self.wrap(a * b),
            BinOp::Eq => (a == b) as i64,
            BinOp::Lt => (a < b) as i64,
            BinOp::And => (a != 0 && b != 0) as i64,
            BinOp::Or => (a != 0 || b != 0) as i64,
        }
    }

    /// Wrapping negation; `-min_int` is `min_int`.
    pub fn neg(self, a: i64) -> i64 {
        self.wrap(-(a as i128))
    }

    /// True iff the unbounded sum differs from the wrapped one.
    pub fn add_overflows(self, a: i64, b: i64) -> bool {
        !self.inbounds(a as i128 + b as i128)
    }

    /// True iff the unbounded product is out of bounds.
    pub fn mul_overflows(self, a: i64, b: i64) -> bool {
        !self.inbounds(a as i128 * b as i128)
    }

    /// Every value of this width in increasing order. Only sensible for
    /// small widths.
    pub fn values(self) -> impl Iterator<Item = i64> + Clone {
        self.min_int()..=self.max_int()
    }
}

impl Default for Width {
    fn default() -> Self {
        Width::W64
    }
}

impl TryFrom<u32> for Width {
    type Error = WidthError;
    fn try_from(bits: u32) -> Result<Self, Self::Error> {
        Width::new(bits)
    }
}

impl From<Width> for u32 {
    fn from(w: Width) -> u32 {
        w.0
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// True iff `x` lies in `[min_int(w), max_int(w)]`.
pub fn inbounds(x: i128, w: Width) -> bool {
    w.inbounds(x)
}

/// A machine integer: an in-bounds value tagged with its width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntM {
    value: i64,
    width: Width,
}

impl IntM {
    pub fn new(value: i128, width: Width) -> Result<Self, OutOfBounds> {
        if width.inbounds(value) {
            Ok(IntM {
                value: value as i64,
                width,
            })
        } else {
            Err(OutOfBounds {
                value,
                bits: width.bits(),
            })
        }
    }

    pub fn wrapping(value: i128, width: Width) -> Self {
        IntM {
            value: width.wrap(value),
            width,
        }
    }

    pub fn value(self) -> i64 {
        self.value
    }

    pub fn width(self) -> Width {
        self.width
    }
}

impl fmt::Display for IntM {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// The binary operators of the language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinOp {
    Plus,
    Minus,
    Mult,
    Eq,
    Lt,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 7] = [
        BinOp::Plus,
        BinOp::Minus,
        BinOp::Mult,
        BinOp::Eq,
        BinOp::Lt,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Plus => "+",
            BinOp::Minus => "-",
            BinOp::Mult => "*",
            BinOp::Eq => "==",
            BinOp::Lt => "<",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength in the concrete syntax; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Lt => 3,
            BinOp::Plus | BinOp::Minus => 4,
            BinOp::Mult => 5,
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Concrete semantics of `op`. Both operands must share a width.
pub fn concrete_binop(op: BinOp, a: IntM, b: IntM) -> IntM {
    assert_eq!(a.width, b.width, "operands of different widths");
    IntM {
        value: a.width.binop(op, a.value, b.value),
        width: a.width,
    }
}

pub fn add_overflows(a: IntM, b: IntM) -> bool {
    assert_eq!(a.width, b.width, "operands of different widths");
    a.width.add_overflows(a.value, b.value)
}

pub fn mul_overflows(a: IntM, b: IntM) -> bool {
    assert_eq!(a.width, b.width, "operands of different widths");
    a.width.mul_overflows(a.value, b.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(bits: u32) -> Width {
        Width::new(bits).unwrap()
    }

    fn m(v: i128, bits: u32) -> IntM {
        IntM::new(v, w(bits)).unwrap()
    }

    #[test]
    fn bounds() {
        assert!(!inbounds(128, w(8)));
        assert!(inbounds(-128, w(8)));
        for bits in 2..=64 {
            assert!(inbounds(0, w(bits)));
        }
        assert_eq!(w(64).min_int(), i64::MIN);
        assert_eq!(w(64).max_int(), i64::MAX);
        assert_eq!(w(4).size(), 16);
        assert!(Width::new(1).is_err());
        assert!(Width::new(65).is_err());
    }

    #[test]
    fn binop_examples() {
        assert_eq!(concrete_binop(BinOp::Plus, m(127, 8), m(1, 8)).value(), -128);
        assert_eq!(concrete_binop(BinOp::Lt, m(3, 8), m(5, 8)).value(), 1);
        assert_eq!(concrete_binop(BinOp::Eq, m(3, 8), m(5, 8)).value(), 0);
        assert_eq!(concrete_binop(BinOp::And, m(-7, 8), m(2, 8)).value(), 1);
        assert_eq!(w(8).neg(-128), -128);
        assert_eq!(w(64).binop(BinOp::Mult, i64::MIN, -1), i64::MIN);
    }

    #[test]
    fn boolean_ops_follow_nonzero_truth_table() {
        let w4 = w(4);
        for a in w4.values() {
            for b in w4.values() {
                let (ta, tb) = (a != 0, b != 0);
                assert_eq!(w4.binop(BinOp::And, a, b), (ta && tb) as i64);
                assert_eq!(w4.binop(BinOp::Or, a, b), (ta || tb) as i64);
                for op in [BinOp::Eq, BinOp::Lt, BinOp::And, BinOp::Or] {
                    assert!(matches!(w4.binop(op, a, b), 0 | 1));
                }
            }
        }
    }

    #[test]
    fn commutative_ops() {
        let w4 = w(4);
        for a in w4.values() {
            for b in w4.values() {
                for op in [BinOp::Plus, BinOp::Mult, BinOp::Eq, BinOp::And, BinOp::Or] {
                    assert_eq!(w4.binop(op, a, b), w4.binop(op, b, a), "{op:?} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn wrapping_is_arithmetic_mod_size() {
        let w4 = w(4);
        for a in w4.values() {
            for b in w4.values() {
                for (op, exact) in [
                    (BinOp::Plus, a + b),
                    (BinOp::Minus, a - b),
                    (BinOp::Mult, a * b),
                ] {
                    let r = w4.binop(op, a, b);
                    assert!(w4.inbounds(r as i128));
                    assert_eq!((r - exact).rem_euclid(16), 0);
                }
            }
        }
    }

    #[test]
    fn overflow_predicates_match_unbounded_arithmetic() {
        assert!(add_overflows(m(127, 8), m(1, 8)));
        assert!(!add_overflows(m(-1, 8), m(1, 8)));
        assert!(!mul_overflows(m(0, 8), m(-128, 8)));
        assert!(mul_overflows(m(16, 8), m(16, 8)));
        for bits in [4, 8] {
            let wd = w(bits);
            for a in wd.values() {
                for b in wd.values() {
                    let sum = a as i128 + b as i128;
                    assert_eq!(
                        wd.add_overflows(a, b),
                        sum != wd.binop(BinOp::Plus, a, b) as i128
                    );
                    let prod = a as i128 * b as i128;
                    assert_eq!(wd.mul_overflows(a, b), !wd.inbounds(prod));
                }
            }
        }
    }

    #[test]
    fn checked_construction() {
        assert!(IntM::new(200, w(8)).is_err());
        assert_eq!(IntM::wrapping(200, w(8)).value(), -56);
    }
}
