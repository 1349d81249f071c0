//! Exact-arithmetic toolkit for self-similar measures with an algebraic
//! contraction ratio lambda = 1/beta given by an integer polynomial.
//!
//! The crate computes two-sided Garsia-entropy bounds from the laws of the
//! partial sums X_n and their finite-group shadows Y_n, decides complete
//! vanishing of character sums at a given level, classifies maximal-entropy
//! measures in the cyclic case, and measures Fourier decay of the measure on
//! the real line.

pub mod angle;
pub mod classify;
pub mod conjugates;
pub mod entropy;
pub mod error;
pub mod field;
pub mod fourier;
pub mod group;
pub mod measure;
pub mod numeric;
pub mod poly;
pub mod snf;
pub mod vanishing;

pub use angle::RationalAngle;
pub use conjugates::{conjugate_profile, Classification, ConjugateProfile};
pub use error::{Error, Result};
pub use field::{mul_by_beta, FieldElement};
pub use group::{Character, FiniteAbelianGroup, GroupElement};
pub use measure::{FiniteMeasure, FourierPolynomial, ZeroAngleSet};
pub use poly::IntPolynomial;
