//! Single-mode Gaussian states in the `(q, p)` quadrature convention with
//! `hbar = 1`, so the vacuum has covariance `I / 2`.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::truncation::sym_eigenvalues;

/// Slack on the uncertainty-principle check `det(cov) >= 1/4`.
pub const PHYSICALITY_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("state has non-finite entries")]
    NonFinite,
    #[error("covariance is not symmetric (off-diagonals {0} and {1})")]
    NotSymmetric(f64, f64),
    #[error("covariance is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("covariance violates the uncertainty principle: det = {0} < 1/4")]
    Unphysical(f64),
    #[error("{name} must be nonnegative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("the hexagonal-lattice mapping is only defined for zero-mean states (mean = [{0}, {1}])")]
    NonzeroMean(f64, f64),
}

/// Gaussian Wigner function `G_{mean, cov}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct GaussianState {
    mean: Vector2<f64>,
    cov: Matrix2<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    mean: [f64; 2],
    cov: [[f64; 2]; 2],
}

impl TryFrom<RawState> for GaussianState {
    type Error = StateError;
    fn try_from(raw: RawState) -> Result<Self, StateError> {
        GaussianState::new(raw.mean, raw.cov)
    }
}

impl From<GaussianState> for RawState {
    fn from(s: GaussianState) -> Self {
        RawState {
            mean: [s.mean[0], s.mean[1]],
            cov: [[s.cov[(0, 0)], s.cov[(0, 1)]], [s.cov[(1, 0)], s.cov[(1, 1)]]],
        }
    }
}

impl GaussianState {
    /// General constructor. Rejects asymmetric, non-positive-definite or
    /// unphysical (`det < 1/4`) covariances.
    pub fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self, StateError> {
        if !mean.iter().chain(cov.iter().flatten()).all(|x| x.is_finite()) {
            return Err(StateError::NonFinite);
        }
        let (b1, b2) = (cov[0][1], cov[1][0]);
        let scale = cov[0][0].abs().max(cov[1][1].abs()).max(1.0);
        if (b1 - b2).abs() > 1e-12 * scale {
            return Err(StateError::NotSymmetric(b1, b2));
        }
        let b = 0.5 * (b1 + b2);
        let (lo, _) = sym_eigenvalues(cov[0][0], b, cov[1][1]);
        if !(lo > 0.0) {
            return Err(StateError::NotPositiveDefinite(lo));
        }
        let det = cov[0][0] * cov[1][1] - b * b;
        if det < 0.25 - PHYSICALITY_SLACK {
            return Err(StateError::Unphysical(det));
        }
        Ok(Self {
            mean: Vector2::new(mean[0], mean[1]),
            cov: Matrix2::new(cov[0][0], b, b, cov[1][1]),
        })
    }

    pub fn from_parts(mean: Vector2<f64>, cov: Matrix2<f64>) -> Result<Self, StateError> {
        Self::new([mean[0], mean[1]], [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]])
    }

    pub fn vacuum() -> Self {
        Self {
            mean: Vector2::zeros(),
            cov: Matrix2::identity() * 0.5,
        }
    }

    /// Thermal state with mean occupation `nbar`: zero mean, covariance `(nbar + 1/2) I`.
    pub fn thermal(nbar: f64) -> Result<Self, StateError> {
        if !nbar.is_finite() {
            return Err(StateError::NonFinite);
        }
        if nbar < 0.0 {
            return Err(StateError::Negative { name: "nbar", value: nbar });
        }
        Ok(Self {
            mean: Vector2::zeros(),
            cov: Matrix2::identity() * (nbar + 0.5),
        })
    }

    pub fn mean(&self) -> Vector2<f64> {
        self.mean
    }

    pub fn cov(&self) -> Matrix2<f64> {
        self.cov
    }

    pub fn det(&self) -> f64 {
        self.cov.determinant()
    }

    /// Pure iff `det(cov) = 1/4`.
    pub fn is_pure(&self, tol: f64) -> bool {
        (self.det() - 0.25).abs() <= tol
    }

    pub fn is_zero_mean(&self) -> bool {
        self.mean[0] == 0.0 && self.mean[1] == 0.0
    }

    /// Covariance proportional to the identity.
    pub fn is_isotropic(&self, tol: f64) -> bool {
        self.cov[(0, 1)].abs() <= tol && (self.cov[(0, 0)] - self.cov[(1, 1)]).abs() <= tol
    }

    /// Normalised Wigner function at `x = (q, p)`.
    pub fn wigner(&self, x: [f64; 2]) -> f64 {
        let d = Vector2::new(x[0] - self.mean[0], x[1] - self.mean[1]);
        let det = self.det();
        let inv = Matrix2::new(self.cov[(1, 1)], -self.cov[(0, 1)], -self.cov[(1, 0)], self.cov[(0, 0)]) / det;
        let quad = d.dot(&(inv * d));
        (-0.5 * quad).exp() / (2.0 * PI * det.sqrt())
    }

    /// Same covariance, displaced mean.
    pub fn with_mean(&self, mean: [f64; 2]) -> Result<Self, StateError> {
        Self::from_parts(Vector2::new(mean[0], mean[1]), self.cov)
    }
}

impl fmt::Display for GaussianState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gauss:{},{},{},{},{}",
            self.mean[0],
            self.mean[1],
            self.cov[(0, 0)],
            self.cov[(0, 1)],
            self.cov[(1, 1)]
        )
    }
}

/// Which GKP lattice performs the error correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeKind {
    #[serde(rename = "square")]
    Square,
    #[serde(rename = "hex", alias = "hexagonal")]
    Hexagonal,
}

impl LatticeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LatticeKind::Square => "square",
            LatticeKind::Hexagonal => "hex",
        }
    }

    /// The input state that square-lattice error correction must see to
    /// reproduce error correction on this lattice.
    pub fn to_square_input(&self, state: &GaussianState) -> Result<GaussianState, StateError> {
        match self {
            LatticeKind::Square => Ok(*state),
            LatticeKind::Hexagonal => hex_to_square_covariance(state),
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LatticeKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "square" | "sq" => Ok(LatticeKind::Square),
            "hex" | "hexagonal" => Ok(LatticeKind::Hexagonal),
            other => Err(format!("unknown lattice '{other}' (expected square or hex)")),
        }
    }
}

/// Symplectic matrix `S = (2 sqrt 3)^{-1/2} [[2, -1], [0, sqrt 3]]` relating
/// hexagonal-lattice and square-lattice encodings.
pub fn hex_symplectic() -> Matrix2<f64> {
    let s3 = 3f64.sqrt();
    Matrix2::new(2.0, -1.0, 0.0, s3) / (2.0 * s3).sqrt()
}

/// `S^{-1}`, written out so it does not depend on a numerical inverse.
fn hex_symplectic_inverse() -> Matrix2<f64> {
    let s3 = 3f64.sqrt();
    // det of the unscaled matrix is 2 sqrt 3, which cancels one factor of the prefactor
    Matrix2::new(s3, 1.0, 0.0, 2.0) / (2.0 * s3).sqrt()
}

/// Equivalent square-lattice input for hexagonal-lattice error correction of
/// a zero-mean state: covariance `S^{-1} cov S^{-T}`.
pub fn hex_to_square_covariance(state: &GaussianState) -> Result<GaussianState, StateError> {
    if !state.is_zero_mean() {
        return Err(StateError::NonzeroMean(state.mean[0], state.mean[1]));
    }
    let s_inv = hex_symplectic_inverse();
    let cov = s_inv * state.cov * s_inv.transpose();
    GaussianState::from_parts(Vector2::zeros(), symmetrize(cov))
}

/// Inverse of [`hex_to_square_covariance`]: `S cov S^T`.
pub fn square_to_hex_covariance(state: &GaussianState) -> Result<GaussianState, StateError> {
    if !state.is_zero_mean() {
        return Err(StateError::NonzeroMean(state.mean[0], state.mean[1]));
    }
    let s = hex_symplectic();
    GaussianState::from_parts(Vector2::zeros(), symmetrize(s * state.cov * s.transpose()))
}

fn symmetrize(m: Matrix2<f64>) -> Matrix2<f64> {
    (m + m.transpose()) * 0.5
}

/// Occupation of the normalised state `K_beta rho_th(nbar) K_beta` with
/// `K_beta = exp(-beta a^dag a)`: `q / (1 - q)` with `q = e^{-2 beta} nbar / (nbar + 1)`.
pub fn damped_occupation(nbar: f64, beta: f64) -> Result<f64, StateError> {
    if !(nbar.is_finite() && beta.is_finite()) {
        return Err(StateError::NonFinite);
    }
    if nbar < 0.0 {
        return Err(StateError::Negative { name: "nbar", value: nbar });
    }
    if beta < 0.0 {
        return Err(StateError::Negative { name: "beta", value: beta });
    }
    let ratio = (-2.0 * beta).exp() * nbar / (nbar + 1.0);
    Ok(ratio / (1.0 - ratio))
}

/// Thermal state seen by ideal GKP error correction when finite-energy
/// codewords `K_beta |j_L>` are used: the envelope moves onto the input.
/// Only zero-mean thermal inputs are supported here.
pub fn damp_thermal(nbar: f64, beta: f64) -> Result<GaussianState, StateError> {
    GaussianState::thermal(damped_occupation(nbar, beta)?)
}
