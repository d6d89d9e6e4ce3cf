//! Feasibility engine for the music-arrangement decision problem.
//!
//! Given a multi-part score and a constraint profile (a minimum
//! coverage fraction `p`, optional consonance, an optional chord-size
//! cap `j`, an optional minimum segment length), this crate decides
//! whether some subset of parts forms a valid single-instrument
//! arrangement, produces a witness when one exists, and checks candidate
//! arrangements with located violations.
//!
//! It also runs the construction in the other direction: a reduction
//! compiler turns 3SAT/X3SAT formulas into scores whose valid
//! arrangements are exactly the satisfying assignments, one gadget
//! family per constraint variant, with a DPLL oracle to cross-check the
//! equivalence end to end.
//!
//! Module map:
//!
//! - [`rational`]: exact arithmetic for `p`
//! - [`score`]: notes, parts, selections, segments, event timeline
//! - [`engine`]: the polynomial validity checker and per-constraint checks
//! - [`cnf`]: DIMACS parsing, evaluation, DPLL, X3SAT encoding
//! - [`reduce`]: gadget compilers, padding arithmetic, encode/decode
//! - [`solve`]: route dispatch, polynomial solvers, exact subset search
//! - [`musicxml`]: minimal partwise export for human inspection

pub mod cnf;
pub mod engine;
pub mod musicxml;
pub mod rational;
pub mod reduce;
pub mod score;
pub mod solve;

pub use engine::{verify, Violation, ViolationKind};
pub use rational::Rational;
pub use score::{ConstraintProfile, Note, Part, Pitch, Score, Selection};
pub use solve::{dispatch, solve, SolveLimits, SolveReport, SolveStatus, SolverRoute};
