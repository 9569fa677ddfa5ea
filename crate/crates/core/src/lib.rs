//! Perturbative correlation functions of a lattice SPDE
//! `∂X/∂t = ΔX − m²X − λXᵖ + η` driven by Lévy noise.

pub mod cli;
pub mod error;
pub mod lattice;
pub mod evaluator;
pub mod fitting;
pub mod graphs;
pub mod levy;
pub mod quadrature;
pub mod simulator;
pub mod trees;

pub use error::{Error, Result};
