//! Model checking for quantified CTL* with imperfect information.
//!
//! Models are compound Kripke structures: states are tuples of local states,
//! and propositional quantifiers are annotated with an observation, the set of
//! tuple coordinates they are allowed to see. Two checkers are provided:
//!
//! * [`mc::check_structure`] evaluates formulas directly on the structure
//!   (quantified labellings are chosen per state, uniformly across
//!   observationally equivalent states);
//! * [`mc::check_tree`] evaluates hierarchical formulas on the infinite
//!   unfolding, through a pipeline of alternating parity tree automata
//!   (dualization, narrowing, nondeterminization, projection) and parity
//!   games.
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion
//! `qctlii` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod alltraces;
pub mod ata;
pub mod formula;
pub mod kripke;
pub mod mc;
pub mod mctree;
pub mod parity;
pub mod pbf;
pub mod simulate;
pub mod tree;
pub mod word;

pub use formula::{Observation, PathFormula, StateFormula};
pub use kripke::Cks;
