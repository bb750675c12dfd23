//! Numerical toolkit for n-normed spaces.
//!
//! * [`nnorm`]: the determinant-based n-norm on truncated lp and checks of
//!   its axioms.
//! * [`quotient`]: class-m quotient norms derived from an anchor set.
//! * [`analysis`]: convergence, Cauchy, boundedness and continuity
//!   diagnostics on finite samples.
//! * [`fixedpoint`]: contraction constants and Banach iteration.
//! * [`lp`]: equivalence of the usual, star and class-n norms.
//! * [`verify`]: the property suites behind `verify-all`.

pub mod analysis;
pub mod combinatorics;
pub mod error;
pub mod fixedpoint;
pub mod linalg;
pub mod lp;
pub mod mapping;
pub mod nnorm;
pub mod quotient;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use mapping::{DomainSampler, Mapping, ProbeSampler, SelfMap};
pub use nnorm::{gram_2_norm, is_linearly_independent, lp_n_norm, NormParams};
pub use quotient::{covering_family, enumerate_class, AnchorSet, ClassCollection, IndexSubset};
