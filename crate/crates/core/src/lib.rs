//! Simulation of Lüders-rule measurements of degenerate observables and of a
//! phase-oracle search that decides membership by whether such a measurement
//! disturbs a uniform superposition.
//!
//! Module map:
//! - [`linalg`]: state vectors, Hermitian operators, Jacobi eigensolver.
//! - [`luders`]: eigenspace projectors, outcome probabilities, collapse.
//! - [`operators`]: `Â`, the oracle `B̂`, the symmetrized `Ĉ`, fast appliers
//!   and the closed-form spectrum of `Ĉ`.
//! - [`search`]: membership-test cycles and binary descent.
//! - [`distinguish`]: the two-observable discrimination experiment.
//! - [`experiments`]: seeded Monte Carlo harness and Wilson intervals.

pub mod distinguish;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod luders;
pub mod operators;
pub mod search;

pub use error::{Error, Result};
pub use experiments::{
    derive_trial_seed, monte_carlo, run_trials, wilson_interval, ErrorEstimate, RandomStream,
};
pub use linalg::{
    eig_hermitian, householder_to_e0, inner, HermitianOperator, Matrix, SpectralDecomposition,
    StateVector, UnitaryMap, C64, DEFAULT_GROUP_TOL,
};
pub use luders::{
    collapse, measure_luders, measure_von_neumann, probabilities, projectors, EigenspaceProjector,
    LudersObservable, MeasurementRecord,
};
pub use operators::{
    analytic_spectrum, apply_c_fast, build_a, build_c, build_c_dense, build_oracle,
    uniform_superposition, walsh_hadamard, AnalyticSpectrum, RegisterSpec, SearchOperatorParams,
};
pub use search::{
    cycle_trial, error_budget, run_cycle, run_search, CycleConfig, CycleEngine, CycleOutcome,
    EngineKind, SearchConfig, SearchPlan, SearchResult,
};
