//! Exact-arithmetic workbench for diagonal direct systems over products of
//! 2-spheres.
//!
//! The crate computes the integer/rational stage data of two recursively
//! defined homogeneous systems (a two-summand system with an order-two flip
//! and its one-summand merged companion), tracks K-classes of projections
//! symbolically through the connecting maps, pairs them with extreme traces,
//! and generates/verifies replayable radius-of-comparison certificates.
//! A floating-point matrix suite checks the underlying positive-element
//! calculus on randomized finite-dimensional samples.
//!
//! All certificate-bearing arithmetic is done with arbitrary-precision
//! integers and exact rationals; floating point appears only in display
//! formatting and in the matrix suite.

// error enums carry exact big-integer context; they only move on cold paths
#![allow(clippy::result_large_err)]

pub mod ah_system;
pub mod bundles;
pub mod certificates;
pub mod coords;
pub mod exact;
pub mod matrix_model;
pub mod report;
pub mod sequences;
pub mod traces;
