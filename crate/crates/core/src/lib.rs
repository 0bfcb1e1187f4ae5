//! Decision, witness and verification routines for Morita-type (TRO and Δ) equivalence of
//! finite-dimensional operator systems, with graph operator systems as the main source of examples.
//!
//! Modules build on each other bottom-up: [`matcore`] supplies complex matrices and subspace
//! arithmetic, [`cstar`] the generated algebras and their block structure, [`ncgraph`] the graph
//! side, [`tro`] the equivalence witnesses and contexts, [`morita`] the induced representations,
//! and [`funcsys`] centres, function systems and rigid systems.

#![forbid(unsafe_code)]

pub mod cstar;
pub mod error;
pub mod funcsys;
pub mod matcore;
pub mod morita;
pub mod ncgraph;
pub mod tro;

pub use error::{Error, Result};
