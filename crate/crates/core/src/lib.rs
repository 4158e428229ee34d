//! Split Fermi seas on the lattice: dispersion analysis, exact correlation
//! kernels, Toeplitz edge laws, higher-order Airy determinants, sampling of
//! the determinantal process and the dual unitary matrix model.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod dpp_sampler;
pub mod edge_distribution;
pub mod error;
pub mod kernel;
pub mod potential;
pub mod quad;
pub mod schur_oracle;
pub mod unitary_mc;

pub use error::{Error, Result};
pub use potential::{EdgeProfile, FermiSea, HoppingCoefficients};
