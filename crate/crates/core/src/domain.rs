//! Lattices, abstract domains, and the two terminating fixpoint engines.
//!
//! Concretization is represented only by its computable membership test
//! `cgamma`; every set-inclusion law of a domain is stated pointwise through
//! it. A domain instance is a value (carrying e.g. the integer width) whose
//! methods operate on the domain's abstract values.

use std::fmt::Debug;

use serde::Serialize;
use thiserror::Error;

use crate::concrete::ConcreteMem;
use crate::lang::{Expr, VarId};
use crate::machine_int::{BinOp, Width};

/// Order, bounds and binary joins/meets on `Self::Value`.
///
/// `join` and `meet` need only be upper and lower bounds, not least/greatest
/// ones. The order must be reflexive and transitive; antisymmetry is not
/// required, and mutual `corder` is treated as equivalence.
pub trait Lattice {
    type Value: Clone + PartialEq + Debug;

    fn corder(&self, x: &Self::Value, y: &Self::Value) -> bool;
    fn join(&self, x: &Self::Value, y: &Self::Value) -> Self::Value;
    fn meet(&self, x: &Self::Value, y: &Self::Value) -> Self::Value;
    fn bottom(&self) -> Self::Value;
    fn top(&self) -> Self::Value;

    fn is_bottom(&self, x: &Self::Value) -> bool {
        self.corder(x, &self.bottom())
    }
}

/// A lattice with a concretization, a widening and a bounded measure.
///
/// Laws (checked by [`crate::difftest::laws`]):
/// - `corder(x, y)` implies `cgamma(x, c) ⇒ cgamma(y, c)`;
/// - `cgamma(x, c) ∧ cgamma(y, c) ⇒ cgamma(meet(x, y), c)`;
/// - nothing is in `cgamma(bottom)`, everything is in `cgamma(top)`;
/// - `widen(x, y)` is an upper bound of `x` and `y`;
/// - `measure(x) < measure_max()`, strictly increasing along `corder`.
pub trait AbstractDomain: Lattice {
    type Concrete;

    fn cgamma(&self, x: &Self::Value, c: &Self::Concrete) -> bool;
    fn widen(&self, x: &Self::Value, y: &Self::Value) -> Self::Value;
    fn measure(&self, x: &Self::Value) -> u128;
    fn measure_max(&self) -> u128;

    /// The domain's measure as a standalone [`Measure`].
    fn order_measure(&self) -> Measure<impl Fn(&Self::Value) -> u128 + '_> {
        Measure {
            f: move |x: &Self::Value| self.measure(x),
            max: self.measure_max(),
        }
    }
}

/// A numeric domain abstracting machine integers of one width.
///
/// Forward soundness: if `cgamma(x, a)` and `cgamma(y, b)` then
/// `cgamma(forward_binop(op, x, y), op(a, b))`. Backward soundness: with
/// `(x', y') = backward_binop(op, x, y, r)`, whenever `cgamma(x, a)`,
/// `cgamma(y, b)` and `cgamma(r, op(a, b))`, also `cgamma(x', a)` and
/// `cgamma(y', b)`.
pub trait NumDomain: AbstractDomain<Concrete = i64> {
    fn width(&self) -> Width;
    fn beta(&self, x: i64) -> Self::Value;
    fn forward_binop(&self, op: BinOp, x: &Self::Value, y: &Self::Value) -> Self::Value;
    fn backward_binop(
        &self,
        op: BinOp,
        x: &Self::Value,
        y: &Self::Value,
        r: &Self::Value,
    ) -> (Self::Value, Self::Value);
    /// Covers every strictly positive integer.
    fn gt0(&self) -> Self::Value;
    /// Covers every strictly negative integer.
    fn lt0(&self) -> Self::Value;
}

/// An abstract domain of memories with sound `assume` and `assign`.
pub trait MemDomain: AbstractDomain<Concrete = ConcreteMem> {
    fn assume(
        &self,
        m: &Self::Value,
        e: &Expr,
        stats: &mut FixStats,
    ) -> Result<Self::Value, FixpointError>;
    fn assign(&self, m: &Self::Value, v: VarId, e: &Expr) -> Self::Value;
}

/// A bounded measure `f` with `f(x) < max` for every `x`.
#[derive(Clone, Copy, Debug)]
pub struct Measure<F> {
    pub f: F,
    pub max: u128,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixpointError {
    #[error("step {step} of a decreasing iteration went up or sideways")]
    NotDecreasing { step: u64 },
    #[error("step {step} of an increasing iteration went down or sideways")]
    NotIncreasing { step: u64 },
    #[error("iteration exceeded its measure-derived bound of {bound} steps")]
    BoundExceeded { bound: u128 },
    #[error("measure value {value} is not below the declared maximum {max}")]
    MeasureOutOfRange { value: u128, max: u128 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fixpoint<A> {
    pub value: A,
    /// Applications of the iterated function, including the final
    /// confirming one.
    pub iterations: u64,
    pub bound: u128,
}

fn checked_measure<A>(measure: &Measure<impl Fn(&A) -> u128>, x: &A) -> Result<u128, FixpointError> {
    let value = (measure.f)(x);
    if value < measure.max {
        Ok(value)
    } else {
        Err(FixpointError::MeasureOutOfRange {
            value,
            max: measure.max,
        })
    }
}

/// Iterates a decreasing `f` from `x` until `x ⊑ f(x)`.
///
/// Returns `y ⊑ x` with `y` order-equivalent to `f(y)`, after at most
/// `measure(x) + 1` applications of `f`. A step that does not go down is
/// reported as an error.
pub fn prefixpoint<A>(
    order: impl Fn(&A, &A) -> bool,
    measure: Measure<impl Fn(&A) -> u128>,
    mut f: impl FnMut(&A) -> A,
    x: A,
) -> Result<Fixpoint<A>, FixpointError> {
    let bound = checked_measure(&measure, &x)? + 1;
    let mut x = x;
    let mut steps = 0u64;
    loop {
        steps += 1;
        if steps as u128 > bound {
            return Err(FixpointError::BoundExceeded { bound });
        }
        let next = f(&x);
        checked_measure(&measure, &next)?;
        if !order(&next, &x) {
            return Err(FixpointError::NotDecreasing { step: steps });
        }
        if order(&x, &next) {
            return Ok(Fixpoint {
                value: x,
                iterations: steps,
                bound,
            });
        }
        x = next;
    }
}

/// Iterates an increasing `f` from `x` until `f(x) ⊑ x`.
///
/// Returns `y ⊒ x` with `f(y) ⊑ y`, after at most
/// `measure.max - measure(x) + 1` applications of `f`.
pub fn postfixpoint<A>(
    order: impl Fn(&A, &A) -> bool,
    measure: Measure<impl Fn(&A) -> u128>,
    mut f: impl FnMut(&A) -> A,
    x: A,
) -> Result<Fixpoint<A>, FixpointError> {
    let bound = measure.max - checked_measure(&measure, &x)? + 1;
    let mut x = x;
    let mut steps = 0u64;
    loop {
        steps += 1;
        if steps as u128 > bound {
            return Err(FixpointError::BoundExceeded { bound });
        }
        let next = f(&x);
        checked_measure(&measure, &next)?;
        if !order(&x, &next) {
            return Err(FixpointError::NotIncreasing { step: steps });
        }
        if order(&next, &x) {
            return Ok(Fixpoint {
                value: x,
                iterations: steps,
                bound,
            });
        }
        x = next;
    }
}

/// Iteration counters collected during an analysis.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FixStats {
    pub loop_fixpoints: u64,
    pub loop_steps: u64,
    pub max_loop_steps: u64,
    pub backward_fixpoints: u64,
    pub backward_steps: u64,
    pub max_backward_steps: u64,
}

impl FixStats {
    pub fn record_loop<A>(&mut self, fp: &Fixpoint<A>) {
        self.loop_fixpoints += 1;
        self.loop_steps += fp.iterations;
        self.max_loop_steps = self.max_loop_steps.max(fp.iterations);
    }

    pub fn record_backward<A>(&mut self, fp: &Fixpoint<A>) {
        self.backward_fixpoints += 1;
        self.backward_steps += fp.iterations;
        self.max_backward_steps = self.max_backward_steps.max(fp.iterations);
    }

    pub fn absorb(&mut self, other: &FixStats) {
        self.loop_fixpoints += other.loop_fixpoints;
        self.loop_steps += other.loop_steps;
        self.max_loop_steps = self.max_loop_steps.max(other.max_loop_steps);
        self.backward_fixpoints += other.backward_fixpoints;
        self.backward_steps += other.backward_steps;
        self.max_backward_steps = self.max_backward_steps.max(other.max_backward_steps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // A chain 0 ⊑ 1 ⊑ ... ⊑ 9 measured by the value itself.
    fn chain() -> Measure<impl Fn(&u32) -> u128> {
        Measure {
            f: |x: &u32| *x as u128,
            max: 10,
        }
    }

    fn le(a: &u32, b: &u32) -> bool {
        a <= b
    }

    #[test]
    fn identity_stops_at_once() {
        let fp = prefixpoint(le, chain(), |x| *x, 7).unwrap();
        assert_eq!((fp.value, fp.iterations), (7, 1));
        let fp = postfixpoint(le, chain(), |x| *x, 7).unwrap();
        assert_eq!((fp.value, fp.iterations), (7, 1));
    }

    #[test]
    fn counts_stay_within_bounds() {
        for start in 0..10u32 {
            for stop in 0..=start {
                let fp = prefixpoint(le, chain(), |x| (*x).saturating_sub(1).max(stop), start).unwrap();
                assert_eq!(fp.value, stop);
                assert!(fp.iterations as u128 <= start as u128 + 1);
                assert_eq!(fp.iterations, (start - stop) as u64 + 1);
            }
            let fp = postfixpoint(le, chain(), |x| (*x + 1).min(9), start).unwrap();
            assert_eq!(fp.value, 9);
            assert!(fp.iterations as u128 <= 10 - start as u128 + 1);
        }
    }

    #[test]
    fn wrong_direction_is_reported() {
        assert_eq!(
            prefixpoint(le, chain(), |x| (*x + 1).min(9), 3),
            Err(FixpointError::NotDecreasing { step: 1 })
        );
        assert_eq!(
            postfixpoint(le, chain(), |x| x.saturating_sub(1), 3),
            Err(FixpointError::NotIncreasing { step: 1 })
        );
    }

    #[test]
    fn invalid_measure_is_reported() {
        let bad = Measure {
            f: |x: &u32| *x as u128,
            max: 5,
        };
        assert!(matches!(
            postfixpoint(le, bad, |x| (*x + 1).min(9), 3),
            Err(FixpointError::MeasureOutOfRange { value: 5, max: 5 })
        ));
    }

    #[test]
    fn lying_measure_trips_the_bound() {
        // claims every value has measure 0, so only one step is allowed
        let flat = Measure {
            f: |_: &u32| 0u128,
            max: 1,
        };
        assert_eq!(
            prefixpoint(le, flat, |x| x.saturating_sub(1), 5),
            Err(FixpointError::BoundExceeded { bound: 1 })
        );
    }
}
