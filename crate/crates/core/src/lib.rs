//! Workbench for one-way finite automata with quantum and classical states
//! (1QCFA).
//!
//! * [`linalg`]: small dense complex linear algebra.
//! * [`models`]: DFA, coin-tossing PFA, MO-1QFA, MM-1QFA, QFA with control
//!   language, and 1QCFA, with structural validation.
//! * [`semantics`]: exact acceptance engines plus enumeration oracles.
//! * [`compile`]: every other model compiled to an equivalent 1QCFA.
//! * [`closure`]: intersection, union, complement and alphabet extension.
//! * [`analysis`]: DFA minimization, distinguishing words, forbidden
//!   construction detection.
//! * [`succinct`]: the `L_m` construction and its verification sweep.
//! * [`random`]: valid random machines for tests and benchmarks.

pub mod analysis;
pub mod closure;
pub mod compile;
pub mod error;
pub mod linalg;
pub mod models;
pub mod random;
pub mod semantics;
pub mod succinct;

pub use error::{Error, Result};
pub use linalg::{Complex, ComplexMatrix, ComplexVector, DensityMatrix, MeasurementFamily, TOL};
pub use models::{
    validate, Alphabet, Dfa, MachineDescription, MachineKind, Mm1qfa, Mo1qfa, Pfa, Qcfa, QcfaRule,
    Qfacl, ValidationReport, Word,
};
pub use semantics::RunOutcome;
