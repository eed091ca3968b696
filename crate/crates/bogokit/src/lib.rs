//! Numerical toolkit for bosonic and fermionic Bogoliubov transformations.
//!
//! The crate covers
//!
//! * [`algebra`]: block-matrix transformations, their defining relations,
//!   composition, adjoints and representation changes;
//! * [`mode_decomp`]: the antilinear operator `C = u*vJ` and the splitting of
//!   a transformation into independent modes or Cooper pairs;
//! * [`implementability`]: Fock-space / infinite-tensor-product /
//!   extended-state-space implementability verdicts and vacuum data;
//! * [`fock`]: truncated per-mode Fock spaces, implementers and numerical
//!   checks of conjugation, vacuum annihilation and rapid decay;
//! * [`diagonalize`]: quadratic Hamiltonians, their diagonalization and the
//!   normal-ordering constant;
//! * [`renorm`]: classified formal sums, infinite-product sequence classes
//!   and form-factor classes;
//! * [`models`]: a squeezing model with divergent pair creation, a BCS model
//!   and a pair-creation model in an external field;
//! * [`io`]: JSON/CSV formats shared by the command-line tool.

pub mod algebra;
pub mod cli;
pub mod diagonalize;
pub mod error;
pub mod fock;
pub mod implementability;
pub mod io;
pub mod linalg;
pub mod mode_decomp;
pub mod models;
pub mod renorm;

pub use error::{Error, Result};
