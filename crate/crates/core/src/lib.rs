//! Hidden-subgroup states over finite Abelian and dihedral groups, elimination
//! observables built from them, and a Monte-Carlo simulation of the sequential
//! state-identification game.
//!
//! The crate is organised bottom-up:
//!
//! - [`abelian`] and [`dihedral`]: exact group arithmetic, subgroup lattices,
//!   characters.
//! - [`linalg`]: dense complex linear algebra on small Hilbert spaces
//!   (density matrices, kernels, subspace intersection, POVM validation).
//! - [`states`]: coset states, the mixed states `rho_H`, the candidate set and
//!   the Fourier observable.
//! - [`elimination`]: elimination sets and operators, the class observable
//!   `A(G)`, refinement and optimality checks, the generic kernel-intersection
//!   construction and the dihedral impossibility report.
//! - [`game`]: the two-player identification game and tournaments.
//! - [`cli`]: the JSON-emitting command-line driver.

pub mod abelian;
pub mod cli;
pub mod dihedral;
pub mod elimination;
pub mod error;
pub mod exec;
pub mod game;
pub mod linalg;
pub mod report;
pub mod states;
pub mod verify;

pub use error::{Error, Result};

/// Largest Hilbert-space dimension (and group order) accepted by default.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;
