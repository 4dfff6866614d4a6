//! Truncated number-basis primitives.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;

pub type CMatrix = DMatrix<Complex64>;

/// Harmonic-oscillator eigenfunctions `psi_0(x) .. psi_{n-1}(x)`, the
/// position representation of the number states.
pub fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    out[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n > 1 {
        out[1] = 2f64.sqrt() * x * out[0];
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
    out
}

/// `ln k!` for `k = 0 ..= n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// Matrix elements `<m|D(alpha)|n>` for `m, n < cutoff`, from the scaled
/// associated-Laguerre recurrence.
pub fn displacement(alpha: Complex64, cutoff: usize) -> CMatrix {
    let mut d = CMatrix::zeros(cutoff, cutoff);
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return CMatrix::identity(cutoff, cutoff);
    }
    let ln_x = x.ln();
    let theta = alpha.arg();
    let lnf = ln_factorials(cutoff);
    for k in 0..cutoff {
        let kf = k as f64;
        let mut h = vec![0.0; cutoff - k];
        h[0] = (-0.5 * x + 0.5 * kf * ln_x - 0.5 * lnf[k]).exp();
        if h.len() > 1 {
            h[1] = h[0] * (1.0 + kf - x) / (kf + 1.0).sqrt();
        }
        for n in 1..h.len().saturating_sub(1) {
            let nf = n as f64;
            h[n + 1] = ((2.0 * nf + 1.0 + kf - x) * h[n] - (nf * (nf + kf)).sqrt() * h[n - 1])
                / ((nf + 1.0) * (nf + kf + 1.0)).sqrt();
        }
        let below = Complex64::from_polar(1.0, kf * theta);
        let above = Complex64::from_polar(1.0, kf * (PI - theta));
        for (n, &hn) in h.iter().enumerate() {
            d[(n + k, n)] = below * hn;
            if k > 0 {
                d[(n, n + k)] = above * hn;
            }
        }
    }
    d
}

/// Number-basis amplitudes of the coherent state `|alpha>`.
pub fn coherent_state(alpha: Complex64, cutoff: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(cutoff);
    if cutoff == 0 {
        return v;
    }
    v[0] = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 1..cutoff {
        v[n] = v[n - 1] * alpha / (n as f64).sqrt();
    }
    v
}

/// Geometric occupation distribution of a thermal state.
pub fn thermal_diagonal(nbar: f64, cutoff: usize) -> Vec<f64> {
    let ratio = nbar / (nbar + 1.0);
    let mut p = Vec::with_capacity(cutoff);
    let mut current = 1.0 / (nbar + 1.0);
    for _ in 0..cutoff {
        p.push(current);
        current *= ratio;
    }
    p
}

/// Diagonal of `K_beta rho_th K_beta` normalised within the cutoff.
pub fn envelope_diagonal(nbar: f64, beta: f64, cutoff: usize) -> Vec<f64> {
    let mut p = thermal_diagonal(nbar, cutoff);
    for (n, x) in p.iter_mut().enumerate() {
        *x *= (-2.0 * beta * n as f64).exp();
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

/// Dense operator in the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: CMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityCheck {
    pub hermiticity: f64,
    pub trace: Complex64,
    pub min_eigenvalue: f64,
}

impl FockOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Oracle(format!("operator is {}x{}, not square", matrix.nrows(), matrix.ncols())));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn cutoff(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest entry of `|A - A^dagger|`.
    pub fn hermiticity_error(&self) -> f64 {
        let diff = &self.matrix - self.matrix.adjoint();
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        ev
    }

    pub fn density_check(&self) -> DensityCheck {
        DensityCheck {
            hermiticity: self.hermiticity_error(),
            trace: self.trace(),
            min_eigenvalue: self.eigenvalues().first().copied().unwrap_or(0.0),
        }
    }

    /// Hermitian to 1e-12, unit trace to 1e-12, eigenvalues above -1e-10.
    pub fn check_density(&self) -> Result<DensityCheck> {
        let c = self.density_check();
        if c.hermiticity > 1e-12 || (c.trace - 1.0).norm() > 1e-12 || c.min_eigenvalue < -1e-10 {
            return Err(Error::Oracle(format!(
                "not a density matrix: hermiticity {:e}, trace {}, min eigenvalue {:e}",
                c.hermiticity, c.trace, c.min_eigenvalue
            )));
        }
        Ok(c)
    }
}

/// Largest permitted trace deficit of a truncated density matrix.
pub const TRACE_DEFICIT_TOL: f64 = 1e-6;

/// Number-basis density matrix of a Gaussian state, renormalised after
/// truncation. Isotropic covariances use the displaced thermal closed form;
/// others are projected from the position representation by quadrature.
pub fn fock_density(state: &GaussianState, cutoff: usize) -> Result<FockOperator> {
    let cov = state.cov();
    let (a, b, c) = (cov[(0, 0)], cov[(0, 1)], cov[(1, 1)]);
    let m = state.mean();
    let mut rho = if b == 0.0 && (a - c).abs() <= 1e-15 * a {
        let nbar = (a - 0.5).max(0.0);
        let p = thermal_diagonal(nbar, cutoff);
        let alpha = Complex64::new(m[0], m[1]) / 2f64.sqrt();
        let d = displacement(alpha, cutoff);
        let mut dp = d.clone();
        for (k, pk) in p.iter().enumerate() {
            dp.column_mut(k).scale_mut(*pk);
        }
        dp * d.adjoint()
    } else {
        position_projection(state, cutoff)
    };
    let trace = rho.trace().re;
    if 1.0 - trace > TRACE_DEFICIT_TOL {
        return Err(Error::CutoffInsufficient {
            cutoff,
            deficit: 1.0 - trace,
        });
    }
    rho /= Complex64::new(trace, 0.0);
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    FockOperator::new(rho)
}

/// `<m|rho|n> = int int psi_m(x) rho(x, y) psi_n(y)` on a uniform grid, with
/// `rho(x, y) = N(u; q0, a) exp(i v mu(u) - v^2 (c - b^2/a) / 2)`,
/// `u = (x + y)/2`, `v = x - y`, `mu(u) = p0 + (b/a)(u - q0)`.
fn position_projection(state: &GaussianState, cutoff: usize) -> CMatrix {
    let cov = state.cov();
    let (a, b, c) = (cov[(0, 0)], cov[(0, 1)], cov[(1, 1)]);
    let (q0, p0) = (state.mean()[0], state.mean()[1]);
    let cond_var = c - b * b / a;

    // psi_n for n < cutoff lives inside |x| < sqrt(2 cutoff + 1); the products
    // oscillate with wavenumber below 2 sqrt(2 cutoff + 1) + the state's own
    let reach = (2.0 * cutoff as f64 + 1.0).sqrt();
    let half_width = (reach + 8.0).max(q0.abs() + 10.0 * a.sqrt());
    let k_max = 2.0 * reach + p0.abs() + 10.0 * c.sqrt() + 10.0;
    let h = (PI / k_max).min(0.05);
    let points = (2.0 * half_width / h).ceil() as usize + 1;
    let xs: Vec<f64> = (0..points).map(|i| -half_width + i as f64 * h).collect();

    let mut psi = DMatrix::<f64>::zeros(cutoff, points);
    for (j, &x) in xs.iter().enumerate() {
        for (n, v) in hermite_functions(cutoff, x).into_iter().enumerate() {
            psi[(n, j)] = v;
        }
    }
    let norm = 1.0 / (2.0 * PI * a).sqrt();
    let mut kernel_re = DMatrix::<f64>::zeros(points, points);
    let mut kernel_im = DMatrix::<f64>::zeros(points, points);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in xs.iter().enumerate() {
            let u = 0.5 * (x + y);
            let v = x - y;
            let mag = norm * (-(u - q0).powi(2) / (2.0 * a) - 0.5 * v * v * cond_var).exp();
            if mag < 1e-300 {
                continue;
            }
            let phase = v * (p0 + b / a * (u - q0));
            kernel_re[(i, j)] = mag * phase.cos() * h * h;
            kernel_im[(i, j)] = mag * phase.sin() * h * h;
        }
    }
    let re = &psi * kernel_re * psi.transpose();
    let im = &psi * kernel_im * psi.transpose();
    CMatrix::from_fn(cutoff, cutoff, |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_functions_are_orthonormal() {
        let n = 12;
        let h = 0.01;
        let mut gram = vec![vec![0.0; n]; n];
        let mut x = -12.0;
        while x <= 12.0 {
            let psi = hermite_functions(n, x);
            for i in 0..n {
                for j in 0..n {
                    gram[i][j] += h * psi[i] * psi[j];
                }
            }
            x += h;
        }
        for (i, row) in gram.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((g - expected).abs() < 1e-10, "{i} {j} {g}");
            }
        }
    }

    #[test]
    fn displacement_of_vacuum_is_coherent_state() {
        let alpha = Complex64::new(0.7, -1.1);
        let d = displacement(alpha, 40);
        let coh = coherent_state(alpha, 40);
        for n in 0..40 {
            assert!((d[(n, 0)] - coh[n]).norm() < 1e-14);
        }
    }

    #[test]
    fn displacement_is_unitary_on_low_block() {
        let d = displacement(Complex64::new(-0.4, 0.9), 120);
        let u = d.adjoint() * &d;
        for i in 0..40 {
            for j in 0..40 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((u[(i, j)] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn displacement_composition_law() {
        // D(a) D(b) = exp((a b* - a* b)/2) D(a + b)
        let a = Complex64::new(0.5, 0.3);
        let b = Complex64::new(-0.2, 0.8);
        let n = 120;
        let lhs = displacement(a, n) * displacement(b, n);
        let phase = ((a * b.conj() - a.conj() * b) * 0.5).exp();
        let rhs = displacement(a + b, n) * phase;
        for i in 0..30 {
            for j in 0..30 {
                assert!((lhs[(i, j)] - rhs[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn displacement_adjoint_is_inverse_displacement() {
        let a = Complex64::new(1.2, -0.6);
        let d = displacement(a, 50);
        let dm = displacement(-a, 50);
        assert!((d.adjoint() - dm).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn thermal_diagonal_and_envelope() {
        let p = thermal_diagonal(1.0, 200);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(p[0], 0.5);
        let q = envelope_diagonal(1.0, 0.1, 200);
        let ratio = (-0.2f64).exp() * 0.5;
        for n in 0..20 {
            assert!((q[n + 1] / q[n] - ratio).abs() < 1e-14);
        }
    }

    #[test]
    fn vacuum_density_is_pure_projector() {
        let rho = fock_density(&GaussianState::vacuum(), 10).unwrap();
        rho.check_density().unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn anisotropic_density_by_quadrature_matches_closed_form_moments() {
        let state = GaussianState::new([0.4, -0.3], [[0.8, 0.2], [0.2, 0.6]]).unwrap();
        let n = 60;
        let rho = fock_density(&state, n).unwrap();
        rho.check_density().unwrap();
        // <a> = (q0 + i p0)/sqrt 2, <a^dag a> = (a + c - 1)/2 + |<a>|^2
        let mut mean_a = Complex64::new(0.0, 0.0);
        let mut number = 0.0;
        for k in 1..n {
            mean_a += rho.matrix()[(k, k - 1)] * (k as f64).sqrt();
            number += k as f64 * rho.matrix()[(k, k)].re;
        }
        let expected = Complex64::new(0.4, -0.3) / 2f64.sqrt();
        assert!((mean_a - expected).norm() < 1e-9, "{mean_a}");
        assert!((number - (0.2 + expected.norm_sqr())).abs() < 1e-9, "{number}");
    }

    #[test]
    fn isotropic_quadrature_agrees_with_closed_form() {
        let state = GaussianState::new([0.3, 0.5], [[0.9, 0.0], [0.0, 0.9]]).unwrap();
        let closed = fock_density(&state, 50).unwrap();
        let quad = FockOperator::new(position_projection(&state, 50)).unwrap();
        let diff = closed.matrix() - quad.matrix();
        assert!(diff.iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn reports_insufficient_cutoff() {
        let hot = GaussianState::thermal(5.0).unwrap();
        assert!(matches!(fock_density(&hot, 20), Err(Error::CutoffInsufficient { .. })));
    }
}
