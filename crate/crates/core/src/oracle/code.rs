//! Finite-energy GKP codewords and approximate logical Paulis.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use super::fock::{hermite_functions, CMatrix, FockOperator};
use super::OracleConfig;
use crate::error::{Error, Result};
use crate::gkp::SQRT_PI;

/// Pauli matrices `I, X, Y, Z`.
pub fn pauli_matrix(mu: usize) -> Result<Matrix2<Complex64>> {
    let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    Ok(match mu {
        0 => Matrix2::new(o, z, z, o),
        1 => Matrix2::new(z, o, o, z),
        2 => Matrix2::new(z, -i, i, z),
        3 => Matrix2::new(o, z, z, -o),
        _ => return Err(Error::InvalidPauli(mu)),
    })
}

/// `K_beta sum_k |x = (2k + j) sqrt(pi)>` in the number basis, normalised
/// after truncation. Spikes run over `k in [-w, w]` for `j = 0` and
/// `[-w - 1, w]` for `j = 1`, so both combs are symmetric about the origin.
pub fn approx_codeword(j: u8, config: &OracleConfig) -> Result<DVector<f64>> {
    if j > 1 {
        return Err(Error::Oracle(format!("codeword index must be 0 or 1, got {j}")));
    }
    let n = config.cutoff;
    let w = config.comb_halfwidth as i64;
    let first = if j == 0 { -w } else { -w - 1 };
    let mut v = DVector::<f64>::zeros(n);
    for k in first..=w {
        let x = (2 * k + j as i64) as f64 * SQRT_PI;
        for (m, psi) in hermite_functions(n, x).into_iter().enumerate() {
            v[m] += psi;
        }
    }
    for (m, x) in v.iter_mut().enumerate() {
        *x *= (-config.beta * m as f64).exp();
    }
    let norm = v.norm();
    if !(norm >= 1e-12) {
        return Err(Error::Oracle(format!("codeword {j} has norm {norm:e} at cutoff {n}")));
    }
    Ok(v / norm)
}

/// Orthonormalised codeword pair spanning the approximate code space.
#[derive(Debug, Clone)]
pub struct CodeSpace {
    config: OracleConfig,
    /// `cutoff x 2`, columns `|0_L>, |1_L>`.
    basis: DMatrix<f64>,
    raw_overlap: f64,
}

impl CodeSpace {
    /// Symmetric (Lowdin) orthonormalisation `E G^{-1/2}` of the two
    /// normalised codewords.
    pub fn new(config: &OracleConfig) -> Result<Self> {
        let c0 = approx_codeword(0, config)?;
        let c1 = approx_codeword(1, config)?;
        let overlap = c0.dot(&c1);
        let raw = DMatrix::from_columns(&[c0, c1]);
        let gram = raw.transpose() * &raw;
        let eig = gram.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| !(l > 1e-12)) {
            return Err(Error::Oracle(format!("codeword Gram matrix is singular: {:?}", eig.eigenvalues.as_slice())));
        }
        let inv_sqrt = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
            * eig.eigenvectors.transpose();
        Ok(Self {
            config: *config,
            basis: raw * inv_sqrt,
            raw_overlap: overlap,
        })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    /// Orthonormalised codeword `j`.
    pub fn codeword(&self, j: usize) -> DVector<f64> {
        self.basis.column(j).into_owned()
    }

    /// `cutoff x 2` codeword matrix.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `<0_L|1_L>` before orthonormalisation.
    pub fn raw_overlap(&self) -> f64 {
        self.raw_overlap
    }

    pub fn complex_basis(&self) -> CMatrix {
        self.basis.map(|x| Complex64::new(x, 0.0))
    }

    /// `sum_{jk} sigma^mu_{jk} |j_L><k_L|`
    pub fn logical_pauli(&self, mu: usize) -> Result<FockOperator> {
        let s = pauli_matrix(mu)?;
        let e = self.complex_basis();
        let s = DMatrix::from_fn(2, 2, |i, j| s[(i, j)]);
        FockOperator::new(&e * s * e.adjoint())
    }

    /// `M = E^dagger rho E`, the code-space block of `rho`.
    pub fn block(&self, rho: &CMatrix) -> Matrix2<Complex64> {
        let e = self.complex_basis();
        let m = e.adjoint() * rho * &e;
        Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
    }
}

/// `Tr(sigma_mu M)` for all four Paulis.
pub fn block_components(m: &Matrix2<Complex64>) -> [Complex64; 4] {
    [
        m[(0, 0)] + m[(1, 1)],
        m[(0, 1)] + m[(1, 0)],
        Complex64::new(0.0, 1.0) * (m[(0, 1)] - m[(1, 0)]),
        m[(0, 0)] - m[(1, 1)],
    ]
}

/// Operator version of [`CodeSpace::logical_pauli`].
pub fn logical_pauli(mu: usize, config: &OracleConfig) -> Result<FockOperator> {
    CodeSpace::new(config)?.logical_pauli(mu)
}
