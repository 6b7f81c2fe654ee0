//! Gradient descent with Laplacian gradient smoothing.
//!
//! The crate implements three first-order schemes on a common footing:
//!
//! * plain gradient descent, `x ← x − η∇f(x)`;
//! * Laplacian-smoothing gradient descent (LSGD), `x ← x − η A_σ⁻¹∇f(x)` with
//!   `A_σ = I − σL` and `L` the periodic one-dimensional discrete Laplacian;
//! * modified LSGD, where `σ = σ(k)` follows an iteration-dependent schedule.
//!
//! Around the optimizers sit the tools used to study their behaviour near
//! strict saddle points of quadratic objectives: the eigenstructure of
//! `A_σ⁻¹B`, the attraction subspaces it induces, polar distance-field sweeps
//! and empirical checks of the iteration bound.
//!
//! Indexing is 0-based throughout. Where a coordinate pattern is naturally
//! stated with 1-based indices `l = 1..n` (last coordinate `x_n`), entry `l`
//! lives at index `l − 1` and `x_n` at index `n − 1`.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod optimizers;
pub mod saddle;
pub mod smoothing;

pub use error::{Error, Result};
pub use experiments::{
    emit_csv, rate_check, read_csv, sweep, two_scale_search, DistanceField, FieldMetadata,
    FieldRow, FieldSummary, PolarGrid, RateReport, RateTrial, TwoScaleResult,
};
pub use linalg::{
    dense_solve, eig_similar_nonsymmetric, sym_eigendecompose, DenseMatrix, EigenPair, Vector,
};
pub use optimizers::{
    iteration_bound, run, step_gd, step_mlsgd, GradientSource, RunConfig, RunResult, RunStatus,
    SigmaSchedule,
};
pub use saddle::{
    canonical_attraction_basis, canonical_objective, degenerate_check, eigen_structure,
    general_attraction_basis, nu_rotation, pn_sign_property, Classification, EigenStructure,
    QuadraticObjective, SubspaceBasis,
};
pub use smoothing::{CirculantSmoother, SmootherSpectrum};
