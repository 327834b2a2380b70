//! Exact construction and verification of r-differential posets.
//!
//! The crate builds truncated graded posets (Young's lattice, the
//! Young–Fibonacci lattice, Cartesian products), certifies the
//! differential-poset axioms, and checks the algebraic consequences of
//! differentiality with exact integer and rational arithmetic: the spectrum
//! of `DU_n`, the first column of `(DU_n + kI)^{-1}`, Smith normal forms and
//! strict growth of rank sizes.

pub mod chains;
pub mod constructions;
pub mod error;
pub mod fundamental;
pub mod hasse;
pub mod matrix;
pub mod poset;
pub mod smith;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::{IntMatrix, RationalMatrix, SparseIntMatrix};
pub use poset::{pairing, AxiomReport, AxiomViolation, GradedPoset, RankVector};
