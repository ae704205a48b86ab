// SPDX-License-Identifier: Apache-2.0

//! Liveness verification of first-order transition systems with implicit
//! rankings.

pub mod fol;
pub mod oracle;
pub mod problem;
pub mod ranking;
pub mod sexp;
pub mod smt;
pub mod vcgen;

/// Heights in machine integers.
pub type Height = oracle::HeightValue<u64>;
/// Heights without overflow.
pub type BigHeight = oracle::HeightValue<num_bigint::BigUint>;
