//! Finite-scale measurement spaces.
//!
//! * [`subspace`]: linear subspaces of M_n(C) with the involutive quantale
//!   operations (join, meet, product, involution).
//! * [`maxa`]: spin-1/2 and spin-1 fixtures, order diagrams and
//!   non-distributivity witnesses.
//! * [`finquant`]: finite involutive quantales as tables and the axiom,
//!   continuity and homomorphism checkers.
//! * [`loctop`]: finite spaces and lattices as locales: specialization order,
//!   sobriety, points, spectra, and the classical/local predicates.
//! * [`relquant`]: boolean relation quantales, finite groupoids and the
//!   support/inclusion pair between relations and subspaces.
//! * [`observer`]: observer contexts, conditional expectations, approximation
//!   maps, lower hyperspaces and change-of-basis maps.
//! * [`cli`]: the `mslab` command line and its run reports.

pub mod cli;
pub mod error;
pub mod finquant;
pub mod law;
pub mod loctop;
pub mod maxa;
pub mod numeric;
pub mod observer;
pub mod order;
pub mod relquant;
pub mod subspace;
pub mod sample;
pub mod topology;

pub use error::{Error, Result};
pub use law::{LawReport, LawVerdict};
pub use subspace::{ComplexMatrix, Subspace, Tolerance};
