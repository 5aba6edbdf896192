//! modular-lab: a finite-dimensional toolkit for state theory on matrix
//! von Neumann algebras.
//!
//! The crate computes modular flows, centralizers, Connes cocycles, and
//! broadcast channels, and decides pairwise and joint commutativity of
//! normal-state families, cross-checking every verdict against an
//! independent density-commutation oracle.
//!
//! States are carried as trace densities h inside the algebra; the modular
//! flow of a faithful state is x -> h^{it} x h^{-it} and the cocycle of a
//! pair is h_phi^{it} h_omega^{-it} with the kernel convention 0^{it} = 0.
//!
//! See the `examples/` directory for one runnable walkthrough per major
//! capability, and the `modular-lab` binary for the JSON-driven CLI.

#![forbid(unsafe_code)]

pub mod algebra;
pub mod broadcasting;
pub mod cli;
pub mod cocycles;
pub mod commutativity;
pub mod error;
pub mod linalg_core;
pub mod states;
pub mod tolerances;

pub use error::{Error, Result};
pub use linalg_core::{C64, CMatrix};
pub use tolerances::{default_t_grid, Tolerances};
