//! Benchmark harness for the rotated Klee-Minty constrained linear
//! minimization family.
//!
//! The harness generates problem instances of any dimension (a bidiagonal
//! inequality system, rotated and translated so the optimum sits at
//! `t = N^3 * 1` with objective value `N^3`), drives pluggable black-box
//! optimizers against them under a budgeted, lexicographic run protocol, and
//! post-processes the resulting run records into quality-indicator tables,
//! ECDF runtime profiles and a three-factor consensus ranking.
//!
//! Ground truth never comes from the optimizers: the [`oracle`] module
//! certifies every instance by direct vertex enumeration and rotation checks.
//!
//! All randomness flows through ChaCha8 generators seeded explicitly, so
//! every run, batch and full campaign is reproducible bit for bit. With the
//! default `parallel` feature the suite fans out across a rayon pool;
//! disabling it yields a dependency-free sequential build with identical
//! output.

pub mod error;
pub mod metrics;
pub mod oracle;
pub mod problem;
pub mod protocol;
pub mod report;
pub mod solvers;
pub mod suite;

pub use error::{Error, Result};
pub use problem::{EvaluationResult, ProblemConfig, ProblemInstance};
pub use protocol::{lex_compare, run_experiment, RunRecord, TerminationReason, TerminationRule};
pub use solvers::{AlgorithmSpec, Optimizer};
pub use suite::{run_suite, SuiteConfig, SuiteManifest};
