//! Mean ergodic theory for positive contractions on finite tracial algebras.
//!
//! The crate works with finite direct sums of matrix algebras equipped with a
//! faithful trace. Given commuting positive contractions it computes the mean
//! ergodic projection, the invariant/weakly wandering decomposition of the
//! unit, and certificates for convergence of ergodic averages.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod convergence;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod maps;
pub mod neveu;
pub mod random;
pub mod scenario;
pub mod tol;

pub use algebra::{Interval, Operator, Projection, TracialAlgebra};
pub use convergence::{bau_certify, measure_certify, stochastic_run};
pub use dynamics::{FolnerScheme, Picture, SemigroupAction};
pub use error::{Error, Result};
pub use maps::{CheckReport, SuperOperator, Verdict};
pub use neveu::{mean_ergodic_projection, neveu_decompose, NeveuDecomposition, NeveuOptions};
pub use scenario::{gallery, load_scenario, Report, Scenario};
