//! Simulation and statistical verification of generalized Oppenheim expansions.
//!
//! A model is a digit chain `B_1, B_2, ...` on the positive integers whose
//! conditional law is driven by a coefficient family `phi`, a distribution
//! family `F` on `[0, 1]`, and a perturbation sequence `q`. The central
//! observable is the normalized ratio
//!
//! ```text
//! R_n = B_{n+1} * (1 + q_n * phi_n(B_n) / B_{n+1}) / (phi_n(B_n) * (1 + q_n)) >= 1
//! ```
//!
//! whose tail is dominated by `F(1/x)`, with equality on a certified lattice.
//! The crate provides:
//!
//! * exact-rational model evaluation ([`model`], [`phi`], [`dist`], [`qspec`]),
//! * digit samplers on an exact big-integer backend and a bounded lattice
//!   backend ([`sampler`], [`lattice`], [`rng`]),
//! * classic expansion digit maps for Luroth, Engel and Sylvester series on
//!   exact rationals ([`expansions`]),
//! * streaming lightly trimmed sums and checkpoint statistics ([`stats`],
//!   [`mori`], [`quad`]),
//! * statistical verification suites with explicit thresholds ([`verify`]).

pub mod config;
pub mod dist;
pub mod error;
pub mod expansions;
pub mod lattice;
pub mod model;
pub mod mori;
pub mod phi;
pub mod qspec;
pub mod quad;
pub mod rational;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use model::OppenheimModel;
