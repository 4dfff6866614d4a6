use thiserror::Error;

use crate::gaussian::StateError;
use crate::theta::ThetaError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("Pauli index must be 0..=3, got {0}")]
    InvalidPauli(usize),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("outcome has non-finite coordinates")]
    NonFiniteOutcome,
    #[error("theta-route component {mu} has imaginary residue {residue:e} (tolerance {tol:e})")]
    ImaginaryResidue { mu: usize, residue: f64, tol: f64 },
    #[error("outcome probability density {0:e} is too small to normalise the Bloch vector")]
    VanishingProbability(f64),
    #[error("outcome probability density is negative ({0:e})")]
    NegativeDensity(f64),
    #[error("theta and lattice-sum routes disagree for component {mu}: {theta} vs {lattice}")]
    RouteMismatch { mu: usize, theta: f64, lattice: f64 },
    #[error("Bloch vector length {0} exceeds 1")]
    NotABlochVector(f64),
    #[error("{name} = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),
    #[error("max F - f does not change sign on nbar in [{lo}, {hi}] (values {g_lo}, {g_hi})")]
    NoSignChange { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("Fock cutoff {cutoff} too small: trace deficit {deficit:e}")]
    CutoffInsufficient { cutoff: usize, deficit: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
