//! A sound abstract interpreter for a small imperative language over
//! fixed-width machine integers.
//!
//! The analysis is parameterised by a numeric abstract domain (intervals by
//! default), lifted to memories, and driven by fixpoint engines whose
//! termination is enforced by explicit measures. A concrete reference
//! semantics and a differential harness check soundness empirically.

pub mod analyzer;
pub mod cli;
pub mod concrete;
pub mod difftest;
pub mod domain;
pub mod interval;
pub mod lang;
pub mod machine_int;
pub mod memory;
