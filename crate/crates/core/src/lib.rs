//! Wiener–Itô chaos expansions of products of Poisson multiple integrals.
//!
//! Everything here works on a finite measure space: a handful of atoms with
//! strictly positive weights, so every integral is a finite sum and every
//! pathwise identity can be checked exactly against a brute-force oracle.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`measure`] | measure spaces, dense kernels, symmetrization, tensor products, norms |
//! | [`combinat`] | set partitions, non-flat diagrams, diagram pairs, restricted words |
//! | [`chaos`] | partition-identified tensors, product-formula kernels, contractions, Condition A checks |
//! | [`path`] | Poisson sampling, pathwise multiple integrals, add-one costs, word terms |
//! | [`verify`] | exact and Monte Carlo expectations, consistency checks, divergence witness |
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod chaos;
pub mod combinat;
mod error;
mod math;
pub mod measure;
pub mod path;
pub mod rng;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
