//! The two-dimensional Riemann (Siegel) theta function
//!
//! `Theta(z, tau) = sum_{m in Z^2} exp[2 pi i (m^T tau m / 2 + m^T z)]`
//!
//! evaluated by direct summation over an integer box whose discarded tail is
//! certified below a caller-supplied absolute tolerance. The bound uses the
//! Gaussian decay `exp(-pi (m - c)^T Im(tau) (m - c))` with the smallest
//! eigenvalue of `Im(tau)`, where `c = -Im(tau)^{-1} Im(z)` is the centre of
//! the dominant terms.

use nalgebra::Matrix2;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::truncation::{certified_radius, log_tail_bound, sorted_offsets, sym_eigenvalues, CompensatedSum};

/// Default absolute tolerance on the discarded tail.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Hard cap on the truncation half-width per axis.
pub const MAX_RADIUS: i64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThetaError {
    #[error("Im(tau) is not positive definite (smallest eigenvalue {0:e})")]
    NotInSiegelSpace(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("required truncation radius {needed:.1} exceeds the cap {cap} (near-degenerate Im(tau))")]
    RadiusCap { needed: f64, cap: i64 },
    #[error("theta argument or matrix has non-finite entries")]
    NonFinite,
}

/// Complex symmetric 2x2 matrix with positive-definite imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiegelMatrix {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    // cached facts about Im(tau)
    im_inv: [f64; 3],
    im_lambda_min: f64,
}

impl SiegelMatrix {
    /// `tau = [[a, b], [b, c]]`; symmetric by construction.
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Result<Self, ThetaError> {
        if ![a, b, c].iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(ThetaError::NonFinite);
        }
        let (lo, _) = sym_eigenvalues(a.im, b.im, c.im);
        if !(lo > 0.0) {
            return Err(ThetaError::NotInSiegelSpace(lo));
        }
        let det = a.im * c.im - b.im * b.im;
        Ok(Self {
            a,
            b,
            c,
            im_inv: [c.im / det, -b.im / det, a.im / det],
            im_lambda_min: lo,
        })
    }

    /// `tau = i * y` for a real symmetric positive-definite `y`.
    pub fn from_imaginary(y: &Matrix2<f64>) -> Result<Self, ThetaError> {
        let off = 0.5 * (y[(0, 1)] + y[(1, 0)]);
        Self::new(
            Complex64::new(0.0, y[(0, 0)]),
            Complex64::new(0.0, off),
            Complex64::new(0.0, y[(1, 1)]),
        )
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(self.a, self.b, self.b, self.c)
    }

    pub fn entries(&self) -> [Complex64; 3] {
        [self.a, self.b, self.c]
    }

    /// Smallest eigenvalue of `Im(tau)`.
    pub fn im_lambda_min(&self) -> f64 {
        self.im_lambda_min
    }
}

/// Argument `z` of the theta function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaArgument(pub [Complex64; 2]);

impl ThetaArgument {
    pub fn new(z1: Complex64, z2: Complex64) -> Result<Self, ThetaError> {
        if [z1, z2].iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(Self([z1, z2]))
        } else {
            Err(ThetaError::NonFinite)
        }
    }

    pub fn real(z1: f64, z2: f64) -> Result<Self, ThetaError> {
        Self::new(Complex64::new(z1, 0.0), Complex64::new(z2, 0.0))
    }
}

/// Result of a truncated theta summation.
///
/// The sum is held as `scaled * exp(log_scale)` so that arguments with large
/// imaginary parts do not overflow before a caller-side prefactor cancels the
/// growth.
#[derive(Debug, Clone, Copy)]
pub struct ThetaSum {
    pub scaled: Complex64,
    pub log_scale: f64,
    /// Box half-width used.
    pub radius: i64,
    /// Natural log of the certified bound on the discarded tail (absolute, unscaled).
    pub log_tail_bound: f64,
}

impl ThetaSum {
    pub fn value(&self) -> Complex64 {
        self.scaled * self.log_scale.exp()
    }
}

/// `Theta(z, tau)` with the discarded tail certified below `tol`.
pub fn riemann_theta(z: &ThetaArgument, tau: &SiegelMatrix, tol: f64) -> Result<Complex64, ThetaError> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(ThetaError::InvalidTolerance(tol));
    }
    Ok(riemann_theta_scaled(z, tau, tol.ln())?.value())
}

/// Scaled evaluation with the tail certified below `exp(log_tol)` in absolute terms.
pub fn riemann_theta_scaled(z: &ThetaArgument, tau: &SiegelMatrix, log_tol: f64) -> Result<ThetaSum, ThetaError> {
    if log_tol.is_nan() || log_tol == f64::INFINITY {
        return Err(ThetaError::InvalidTolerance(log_tol.exp()));
    }
    let (center, log_scale) = dominant_center(z, tau);
    let a = PI * tau.im_lambda_min;
    let radius = certified_radius(a, log_scale, log_tol, MAX_RADIUS)
        .map_err(|needed| ThetaError::RadiusCap { needed, cap: MAX_RADIUS })?;
    let scaled = sum_box(z, tau, center, radius, log_scale);
    Ok(ThetaSum {
        scaled,
        log_scale,
        radius,
        log_tail_bound: log_tail_bound(a, radius, log_scale),
    })
}

/// Truncated sum over a fixed box half-width, without certification.
pub fn riemann_theta_with_radius(z: &ThetaArgument, tau: &SiegelMatrix, radius: i64) -> Complex64 {
    let (center, log_scale) = dominant_center(z, tau);
    sum_box(z, tau, center, radius, log_scale) * log_scale.exp()
}

/// Centre `c = -Im(tau)^{-1} Im(z)` of the Gaussian envelope and the log of
/// its peak value `pi Im(z)^T Im(tau)^{-1} Im(z)`.
fn dominant_center(z: &ThetaArgument, tau: &SiegelMatrix) -> ([f64; 2], f64) {
    let [i00, i01, i11] = tau.im_inv;
    let y = [z.0[0].im, z.0[1].im];
    let w = [i00 * y[0] + i01 * y[1], i01 * y[0] + i11 * y[1]];
    ([-w[0], -w[1]], PI * (y[0] * w[0] + y[1] * w[1]))
}

fn sum_box(z: &ThetaArgument, tau: &SiegelMatrix, center: [f64; 2], radius: i64, log_scale: f64) -> Complex64 {
    let (ci, cj) = (center[0].round() as i64, center[1].round() as i64);
    let [a, b, c] = [tau.a, tau.b, tau.c];
    let [z1, z2] = z.0;
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    for &(di, dj) in sorted_offsets(radius).iter() {
        let (m1, m2) = ((ci + di) as f64, (cj + dj) as f64);
        // q = m^T tau m / 2 + m^T z; the term is exp(2 pi i q)
        let quad_re = 0.5 * (a.re * m1 * m1 + 2.0 * b.re * m1 * m2 + c.re * m2 * m2) + m1 * z1.re + m2 * z2.re;
        let quad_im = 0.5 * (a.im * m1 * m1 + 2.0 * b.im * m1 * m2 + c.im * m2 * m2) + m1 * z1.im + m2 * z2.im;
        let magnitude = (-2.0 * PI * quad_im - log_scale).exp();
        let frac = quad_re - quad_re.round();
        let (s, co) = (2.0 * PI * frac).sin_cos();
        re.add(magnitude * co);
        im.add(magnitude * s);
    }
    Complex64::new(re.value(), im.value())
}
