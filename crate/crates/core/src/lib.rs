//! GKP error correction applied to single-mode Gaussian states.
//!
//! The corrected logical state is computed two ways, by a direct lattice sum
//! over the Pauli Wigner combs and by a Riemann theta function closed form,
//! and checked against a truncated number-basis oracle. On top of that sit
//! magic-state fidelity maps, success probabilities and threshold occupations
//! for square- and hexagonal-lattice codes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod export;
pub mod gaussian;
pub mod gkp;
pub mod magic;
pub mod oracle;
pub mod quadrature;
pub mod theta;
mod truncation;
pub mod verify;

pub use error::{Error, Result};
pub use gaussian::{damp_thermal, hex_to_square_covariance, GaussianState, LatticeKind};
pub use gkp::{bloch_lattice_sum, bloch_normalized, bloch_theta, heterodyne_to_outcome, pdf, Bloch4, BlochEngine, GkpPauli, Outcome};
pub use magic::{fidelity_map, fidelity_to_nearest, success_probability, threshold_nbar, MagicFamily};
pub use oracle::{OracleConfig, FockOperator};
pub use theta::{riemann_theta, SiegelMatrix, ThetaArgument};
