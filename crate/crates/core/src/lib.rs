//! Numerical laboratory for Bogoliubov theory of the dilute Bose gas in the
//! unit torus with periodic boundary conditions.
//!
//! * [`lattice`]: shells of the momentum lattice 2πZ³ and reproducible sums over them.
//! * [`scattering`]: zero-energy scattering, Born terms and correlation coefficients η.
//! * [`formulas`]: dispersion laws, quadratic diagonalization, e_Λ and the energy expansion.
//! * [`spectrum`]: excitation spectrum lines with exact multiplicities.
//! * [`fock`]: truncated Fock spaces and the unitary excitation-Hamiltonian pipeline.

pub mod error;
pub mod fock;
pub mod formulas;
pub mod lattice;
pub mod potential;
pub mod quadrature;
pub mod scattering;
pub mod spectrum;
pub mod summation;

pub use error::{Error, Result};
