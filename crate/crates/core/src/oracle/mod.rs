//! Independent brute-force evaluation of the corrected Bloch vector in a
//! truncated number basis, using finite-energy codewords `K_beta |j_L>`.
//!
//! Because the codewords carry the envelope `K_beta = exp(-beta n)`, the
//! oracle reproduces the analytic result for the input `K_beta rho K_beta`
//! rather than for `rho`; [`envelope_comparator`] gives that prediction.

mod code;
mod fock;

pub use code::{approx_codeword, block_components, logical_pauli, pauli_matrix, CodeSpace};
pub use fock::{
    coherent_state, displacement, envelope_diagonal, fock_density, hermite_functions, thermal_diagonal, CMatrix,
    DensityCheck, FockOperator, TRACE_DEFICIT_TOL,
};

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::gkp::{bloch_normalized, heterodyne_to_outcome, Bloch4, Outcome};

/// Largest accepted imaginary part of an oracle trace.
const IMAGINARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub beta: f64,
    pub cutoff: usize,
    pub comb_halfwidth: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            beta: 0.02,
            cutoff: 300,
            comb_halfwidth: 8,
        }
    }
}

impl OracleConfig {
    pub fn new(beta: f64, cutoff: usize, comb_halfwidth: usize) -> Result<Self> {
        let config = Self {
            beta,
            cutoff,
            comb_halfwidth,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::OutOfRange {
                name: "beta",
                value: self.beta,
                range: "(0, inf)",
            });
        }
        if !(4..=512).contains(&self.cutoff) {
            return Err(Error::OutOfRange {
                name: "cutoff",
                value: self.cutoff as f64,
                range: "[4, 512]",
            });
        }
        if self.comb_halfwidth < 1 {
            return Err(Error::OutOfRange {
                name: "comb_halfwidth",
                value: 0.0,
                range: ">= 1",
            });
        }
        Ok(())
    }
}

/// Order of the two quadrature corrections in `V(-t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionOrder {
    /// `Z(-t_p) X(-t_q)`
    QThenP,
    /// `X(-t_q) Z(-t_p)`
    PThenQ,
}

/// `K_beta rho K_beta / Tr(...)` for a Gaussian `rho`, from the Husimi function:
/// with `A = Sigma + I/2` and `P = (1 - e^{-2 beta}) I + e^{-2 beta} A^{-1}`,
/// the result has covariance `P^{-1} - I/2` and mean `e^{-beta} P^{-1} A^{-1} x0`.
pub fn envelope_transfer(state: &GaussianState, beta: f64) -> Result<GaussianState> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::OutOfRange {
            name: "beta",
            value: beta,
            range: "[0, inf)",
        });
    }
    let q = (-2.0 * beta).exp();
    let a = state.cov() + Matrix2::identity() * 0.5;
    let a_inv = a.try_inverse().ok_or(Error::Oracle("singular Husimi covariance".into()))?;
    let p = Matrix2::identity() * (1.0 - q) + a_inv * q;
    let p_inv = p.try_inverse().ok_or(Error::Oracle("singular damped precision".into()))?;
    let cov = p_inv - Matrix2::identity() * 0.5;
    let cov = (cov + cov.transpose()) * 0.5;
    let mean: Vector2<f64> = p_inv * a_inv * state.mean() * (-beta).exp();
    Ok(GaussianState::from_parts(mean, cov)?)
}

/// Analytic Bloch vector the oracle should reproduce at outcome `t`: the
/// displaced input `V(-t) rho V(-t)^dagger` carries the envelope and is read out at `t = 0`.
pub fn envelope_comparator(state: &GaussianState, t: Outcome, beta: f64) -> Result<Bloch4> {
    let m = state.mean();
    let displaced = state.with_mean([m[0] - t.tq, m[1] - t.tp])?;
    bloch_normalized(&envelope_transfer(&displaced, beta)?, Outcome::new(0.0, 0.0))
}

/// `V(-t)` as a single displacement `D(-(t_q + i t_p)/sqrt 2)`.
fn correction_alpha(t: Outcome) -> Complex64 {
    -Complex64::new(t.tq, t.tp) / SQRT_2
}

/// Precomputed code space for repeated oracle evaluations.
#[derive(Debug, Clone)]
pub struct Oracle {
    code: CodeSpace,
}

impl Oracle {
    pub fn new(config: &OracleConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            code: CodeSpace::new(config)?,
        })
    }

    pub fn config(&self) -> &OracleConfig {
        self.code.config()
    }

    pub fn code(&self) -> &CodeSpace {
        &self.code
    }

    /// `V(-t) rho V(-t)^dagger`, failing if the truncation loses more than
    /// [`TRACE_DEFICIT_TOL`] of the trace.
    pub fn displaced_density(&self, state: &GaussianState, t: Outcome) -> Result<CMatrix> {
        let n = self.config().cutoff;
        let rho = fock_density(state, n)?;
        let d = displacement(correction_alpha(t), n);
        let out = &d * rho.matrix() * d.adjoint();
        check_trace(&out, n)?;
        Ok(out)
    }

    /// Unnormalised `Tr[V(-t) rho V(-t)^dagger sigma_L^mu]`.
    pub fn bloch(&self, state: &GaussianState, t: Outcome) -> Result<Bloch4> {
        let rho = self.displaced_density(state, t)?;
        real_components(&self.code.block(&rho))
    }

    /// Same traces through the explicit Kraus operator
    /// `Pi V(-t)`, with `V(-t)` built as a product of the two quadrature corrections.
    pub fn ec_circuit(&self, state: &GaussianState, t: Outcome, order: CorrectionOrder) -> Result<Bloch4> {
        let n = self.config().cutoff;
        let rho = fock_density(state, n)?;
        let x = displacement(Complex64::new(-t.tq / SQRT_2, 0.0), n);
        let z = displacement(Complex64::new(0.0, -t.tp / SQRT_2), n);
        let v = match order {
            CorrectionOrder::QThenP => z * x,
            CorrectionOrder::PThenQ => x * z,
        };
        let displaced = &v * rho.matrix() * v.adjoint();
        check_trace(&displaced, n)?;
        let projector = self.code.logical_pauli(0)?.into_matrix();
        let out = &projector * displaced * &projector;
        let mut c = [0.0; 4];
        for (mu, slot) in c.iter_mut().enumerate() {
            let tr = (&out * self.code.logical_pauli(mu)?.matrix()).trace();
            *slot = real_part(mu, tr)?;
        }
        Ok(Bloch4::from_components(c))
    }

    /// Normalised logical Bloch vector left on mode 2 after projecting mode 1 of
    /// `(|0_L 0_L> + |1_L 1_L>)/sqrt 2` onto the coherent state `|alpha>`.
    ///
    /// Reported as `sum_mu Tr(|alpha><alpha| sigma_L^mu) sigma_L^mu`, which is the
    /// logical transpose (`r_y -> -r_y`) of the mode-2 state itself.
    pub fn bell_heterodyne(&self, alpha: Complex64) -> Result<Bloch4> {
        let n = self.config().cutoff;
        let coh = coherent_state(alpha, n);
        let basis = self.code.basis();
        let c: Vec<Complex64> = (0..2)
            .map(|j| (0..n).map(|k| coh[k].conj() * basis[(k, j)]).sum())
            .collect();
        let block = Matrix2::new(
            c[0] * c[0].conj(),
            c[0] * c[1].conj(),
            c[1] * c[0].conj(),
            c[1] * c[1].conj(),
        );
        let mut b = real_components(&block)?;
        b.r[1] = -b.r[1];
        b.normalized()
    }
}

fn check_trace(rho: &CMatrix, cutoff: usize) -> Result<()> {
    let deficit = 1.0 - rho.trace().re;
    if deficit > TRACE_DEFICIT_TOL {
        return Err(Error::CutoffInsufficient { cutoff, deficit });
    }
    Ok(())
}

fn real_part(mu: usize, z: Complex64) -> Result<f64> {
    if z.im.abs() >= IMAGINARY_TOL {
        return Err(Error::ImaginaryResidue {
            mu,
            residue: z.im.abs(),
            tol: IMAGINARY_TOL,
        });
    }
    Ok(z.re)
}

fn real_components(block: &Matrix2<Complex64>) -> Result<Bloch4> {
    let z = block_components(block);
    let mut c = [0.0; 4];
    for mu in 0..4 {
        c[mu] = real_part(mu, z[mu])?;
    }
    Ok(Bloch4::from_components(c))
}

/// Unnormalised oracle Bloch components at outcome `t`.
pub fn oracle_bloch(state: &GaussianState, t: Outcome, config: &OracleConfig) -> Result<Bloch4> {
    Oracle::new(config)?.bloch(state, t)
}

pub fn ec_circuit_oracle(
    state: &GaussianState,
    t: Outcome,
    config: &OracleConfig,
    order: CorrectionOrder,
) -> Result<Bloch4> {
    Oracle::new(config)?.ec_circuit(state, t, order)
}

pub fn bell_heterodyne(alpha: Complex64, config: &OracleConfig) -> Result<Bloch4> {
    Oracle::new(config)?.bell_heterodyne(alpha)
}

/// Analytic counterpart of [`Oracle::bell_heterodyne`]: the vacuum corrected
/// at the outcome of `e^{-beta} alpha`, the envelope having been moved onto the coherent state.
pub fn heterodyne_comparator(alpha: Complex64, beta: f64) -> Result<Bloch4> {
    bloch_normalized(&GaussianState::vacuum(), heterodyne_to_outcome(alpha * (-beta).exp()))
}
