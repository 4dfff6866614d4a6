//! Bloch vector of the GKP-error-corrected state for a Gaussian input.
//!
//! With outcome `t`, the unnormalised logical Bloch components are
//!
//! ```text
//! rbar_mu(t) = 1/4 * sum_{n in Z^2} (-1)^{n . lbar_mu} G_{x0,Sigma}((n + l_mu/2) sqrt(pi) + t)
//! ```
//!
//! (the Pauli Wigner combs collapse the phase-space overlap to a lattice sum),
//! and equivalently, in closed form,
//!
//! ```text
//! rbar_mu(t) = 1/(4 pi) [G_{0,(4 pi Sigma)^-1}(v)]^-1 Theta(v + lbar_mu/2, tau),
//! tau = (i/2) Sigma^-1,   v = tau [l_mu/2 - (t - x0)/sqrt(pi)].
//! ```
//!
//! The `1/4` normalisation makes `rbar_0 = p(t)` a probability density over
//! one `2 sqrt(pi) x 2 sqrt(pi)` cell of outcomes.

use nalgebra::Vector2;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::theta::{riemann_theta_scaled, SiegelMatrix, ThetaArgument, DEFAULT_TOL, MAX_RADIUS};
use crate::truncation::{certified_radius, sorted_offsets, sym_eigenvalues, CompensatedSum};

pub const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Side length `2 sqrt(pi)` of the periodic cell of outcomes.
pub const CELL_SIDE: f64 = 2.0 * SQRT_PI;

/// Densities at or below this are treated as zero-probability outcomes.
pub const VANISHING_PDF: f64 = 1e-280;

/// Error-correction measurement outcome `t = (t_q, t_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub tq: f64,
    pub tp: f64,
}

impl Outcome {
    /// An outcome as measured, not reduced into the cell.
    pub fn new(tq: f64, tp: f64) -> Self {
        Self { tq, tp }
    }

    /// Reduce into `[0, 2 sqrt(pi))^2`.
    pub fn canonical(self) -> Self {
        Self {
            tq: reduce(self.tq),
            tp: reduce(self.tp),
        }
    }

    pub fn is_canonical(&self) -> bool {
        (0.0..CELL_SIDE).contains(&self.tq) && (0.0..CELL_SIDE).contains(&self.tp)
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.tq, self.tp]
    }

    fn check(&self) -> Result<()> {
        if self.tq.is_finite() && self.tp.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteOutcome)
        }
    }
}

fn reduce(x: f64) -> f64 {
    let r = x.rem_euclid(CELL_SIDE);
    if r >= CELL_SIDE {
        0.0
    } else {
        r
    }
}

/// Outcome equivalent to heterodyne detection with result `alpha` on half of
/// an encoded Bell pair: `t = -sqrt(2) (Re alpha, Im alpha)`, reduced into the cell.
pub fn heterodyne_to_outcome(alpha: Complex64) -> Outcome {
    let s2 = std::f64::consts::SQRT_2;
    Outcome::new(-s2 * alpha.re, -s2 * alpha.im).canonical()
}

/// Encoded Pauli `sigma_L^mu` described by its comb offset `l_mu` and the
/// sign vector `lbar_mu` (the entries of `l_mu` swapped).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GkpPauli {
    mu: usize,
    ell: [i64; 2],
    ell_bar: [i64; 2],
}

/// `I, X, Y, Z` in that order.
pub const PAULIS: [GkpPauli; 4] = [
    GkpPauli { mu: 0, ell: [0, 0], ell_bar: [0, 0] },
    GkpPauli { mu: 1, ell: [1, 0], ell_bar: [0, 1] },
    GkpPauli { mu: 2, ell: [1, 1], ell_bar: [1, 1] },
    GkpPauli { mu: 3, ell: [0, 1], ell_bar: [1, 0] },
];

impl GkpPauli {
    pub fn new(mu: usize) -> Result<Self> {
        PAULIS.get(mu).copied().ok_or(Error::InvalidPauli(mu))
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn ell(&self) -> [i64; 2] {
        self.ell
    }

    pub fn ell_bar(&self) -> [i64; 2] {
        self.ell_bar
    }

    /// `(-1)^{n . lbar}`
    fn sign(&self, n: [i64; 2]) -> f64 {
        if (n[0] * self.ell_bar[0] + n[1] * self.ell_bar[1]).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// One delta spike of the Wigner function of `sigma_L^mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombTerm {
    pub location: [f64; 2],
    pub weight: f64,
}

/// Spike `n` of the Pauli comb: located at `(n + l_mu/2) sqrt(pi)` with weight `(-1)^{n . lbar_mu} / 2`.
pub fn pauli_comb_term(pauli: GkpPauli, n: [i64; 2]) -> CombTerm {
    CombTerm {
        location: [
            (n[0] as f64 + 0.5 * pauli.ell[0] as f64) * SQRT_PI,
            (n[1] as f64 + 0.5 * pauli.ell[1] as f64) * SQRT_PI,
        ],
        weight: 0.5 * pauli.sign(n),
    }
}

/// Logical Bloch 4-vector `(r0, rx, ry, rz)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bloch4 {
    pub r0: f64,
    pub r: [f64; 3],
}

impl Bloch4 {
    pub fn from_components(c: [f64; 4]) -> Self {
        Self { r0: c[0], r: [c[1], c[2], c[3]] }
    }

    pub fn components(&self) -> [f64; 4] {
        [self.r0, self.r[0], self.r[1], self.r[2]]
    }

    /// Length of the 3-vector part.
    pub fn norm3(&self) -> f64 {
        self.r.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Divide through by `r0`.
    pub fn normalized(&self) -> Result<Self> {
        if !(self.r0 > VANISHING_PDF) {
            return Err(Error::VanishingProbability(self.r0));
        }
        Ok(Self {
            r0: 1.0,
            r: [self.r[0] / self.r0, self.r[1] / self.r0, self.r[2] / self.r0],
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BlochOptions {
    /// Absolute tolerance on each unnormalised component, relative to `min(1, p(t))`.
    pub tol: f64,
    /// When set, every component is recomputed by the lattice-sum route and
    /// compared against this absolute tolerance.
    pub cross_check: Option<f64>,
}

impl Default for BlochOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            cross_check: None,
        }
    }
}

/// Precomputed per-state data for repeated Bloch evaluations.
#[derive(Debug, Clone)]
pub struct BlochEngine {
    state: GaussianState,
    mean: [f64; 2],
    /// `[a, b, c]` for `Sigma = [[a, b], [b, c]]`
    sigma: [f64; 3],
    sigma_inv: [f64; 3],
    det: f64,
    lambda_max: f64,
    tau: SiegelMatrix,
}

impl BlochEngine {
    pub fn new(state: &GaussianState) -> Result<Self> {
        let cov = state.cov();
        let (a, b, c) = (cov[(0, 0)], cov[(0, 1)], cov[(1, 1)]);
        let det = a * c - b * b;
        let sigma_inv = [c / det, -b / det, a / det];
        let (_, lambda_max) = sym_eigenvalues(a, b, c);
        let half = |x: f64| Complex64::new(0.0, 0.5 * x);
        let tau = SiegelMatrix::new(half(sigma_inv[0]), half(sigma_inv[1]), half(sigma_inv[2]))?;
        let m = state.mean();
        Ok(Self {
            state: *state,
            mean: [m[0], m[1]],
            sigma: [a, b, c],
            sigma_inv,
            det,
            lambda_max,
            tau,
        })
    }

    pub fn state(&self) -> &GaussianState {
        &self.state
    }

    /// `tau = (i/2) Sigma^{-1}`
    pub fn tau(&self) -> &SiegelMatrix {
        &self.tau
    }

    /// `rbar_mu(t)` by direct summation over the Pauli comb.
    pub fn lattice_sum(&self, t: Outcome, mu: usize, tol: f64) -> Result<f64> {
        check_tol(tol)?;
        t.check()?;
        let pauli = GkpPauli::new(mu)?;
        let ell = [pauli.ell[0] as f64, pauli.ell[1] as f64];
        let shift = [t.tq - self.mean[0], t.tp - self.mean[1]];
        // spikes sit at sqrt(pi) (n - c)
        let c = [-(0.5 * ell[0] + shift[0] / SQRT_PI), -(0.5 * ell[1] + shift[1] / SQRT_PI)];
        let log_norm = -(2.0 * PI * self.det.sqrt()).ln();
        let a = PI / (2.0 * self.lambda_max);
        let radius = certified_radius(a, 0.25f64.ln() + log_norm, tol.ln(), MAX_RADIUS).map_err(|needed| {
            crate::theta::ThetaError::RadiusCap { needed, cap: MAX_RADIUS }
        })?;
        let [si00, si01, si11] = self.sigma_inv;
        let (ci, cj) = (c[0].round() as i64, c[1].round() as i64);
        let mut acc = CompensatedSum::default();
        for &(di, dj) in sorted_offsets(radius).iter() {
            let n = [ci + di, cj + dj];
            let comb = pauli_comb_term(pauli, n);
            let y0 = comb.location[0] + shift[0];
            let y1 = comb.location[1] + shift[1];
            let quad = si00 * y0 * y0 + 2.0 * si01 * y0 * y1 + si11 * y1 * y1;
            acc.add(comb.weight * (log_norm - 0.5 * quad).exp());
        }
        // spike weights carry 1/2, the overlap another 1/2
        Ok(0.5 * acc.value())
    }

    /// `rbar_mu(t)` from the theta-function closed form, before the realness check.
    pub fn theta_component_complex(&self, t: Outcome, mu: usize, tol: f64) -> Result<Complex64> {
        check_tol(tol)?;
        t.check()?;
        let pauli = GkpPauli::new(mu)?;
        let w = Vector2::new(
            0.5 * pauli.ell[0] as f64 - (t.tq - self.mean[0]) / SQRT_PI,
            0.5 * pauli.ell[1] as f64 - (t.tp - self.mean[1]) / SQRT_PI,
        );
        let tau = self.tau.matrix();
        let v = tau * w.map(|x| Complex64::new(x, 0.0));
        let z = ThetaArgument::new(v[0] + 0.5 * pauli.ell_bar[0] as f64, v[1] + 0.5 * pauli.ell_bar[1] as f64)?;

        // ln G_{0,C}(v) with C = (4 pi Sigma)^{-1}: C^{-1} = 4 pi Sigma, det C = 1 / (16 pi^2 det Sigma)
        let [a, b, c] = self.sigma;
        let v_sigma_v = a * v[0] * v[0] + 2.0 * b * v[0] * v[1] + c * v[1] * v[1];
        let ln_gauss = -(2.0 * PI).ln() + 0.5 * (16.0 * PI * PI * self.det).ln() - 2.0 * PI * v_sigma_v;
        let log_prefactor = -(4.0 * PI).ln() - ln_gauss;

        let sum = riemann_theta_scaled(&z, &self.tau, tol.ln() - log_prefactor.re)?;
        Ok((log_prefactor + sum.log_scale).exp() * sum.scaled)
    }

    /// `rbar_mu(t)` from the theta-function closed form. Fails if the
    /// imaginary part is not below `tol`.
    pub fn theta_component(&self, t: Outcome, mu: usize, tol: f64) -> Result<f64> {
        let value = self.theta_component_complex(t, mu, tol)?;
        if !(value.im.abs() < tol) {
            return Err(Error::ImaginaryResidue {
                mu,
                residue: value.im.abs(),
                tol,
            });
        }
        Ok(value.re)
    }

    /// All four unnormalised components by the theta route.
    pub fn unnormalized(&self, t: Outcome, tol: f64) -> Result<Bloch4> {
        let mut c = [0.0; 4];
        for (mu, slot) in c.iter_mut().enumerate() {
            *slot = self.theta_component(t, mu, tol)?;
        }
        Ok(Bloch4::from_components(c))
    }

    /// All four unnormalised components by the lattice-sum route.
    pub fn unnormalized_lattice(&self, t: Outcome, tol: f64) -> Result<Bloch4> {
        let mut c = [0.0; 4];
        for (mu, slot) in c.iter_mut().enumerate() {
            *slot = self.lattice_sum(t, mu, tol)?;
        }
        Ok(Bloch4::from_components(c))
    }

    pub fn normalized(&self, t: Outcome) -> Result<Bloch4> {
        self.normalized_with(t, &BlochOptions::default())
    }

    /// Normalised Bloch vector.
    pub fn normalized_with(&self, t: Outcome, opts: &BlochOptions) -> Result<Bloch4> {
        self.components(t, opts)?.normalized()
    }

    /// Unnormalised components, evaluated with a tolerance scaled by
    /// `min(1, p(t))` so that their ratios keep full precision for
    /// improbable outcomes.
    pub fn components(&self, t: Outcome, opts: &BlochOptions) -> Result<Bloch4> {
        let first = self.theta_component(t, 0, opts.tol)?;
        if !(first > VANISHING_PDF) {
            return Err(Error::VanishingProbability(first));
        }
        let tol = opts.tol * first.min(1.0);
        let mut c = [first, 0.0, 0.0, 0.0];
        if first < 1.0 {
            c[0] = self.theta_component(t, 0, tol)?;
        }
        for (mu, slot) in c.iter_mut().enumerate().skip(1) {
            *slot = self.theta_component(t, mu, tol)?;
        }
        if let Some(check) = opts.cross_check {
            for (mu, &theta) in c.iter().enumerate() {
                let lattice = self.lattice_sum(t, mu, tol)?;
                if !((theta - lattice).abs() <= check) {
                    return Err(Error::RouteMismatch { mu, theta, lattice });
                }
            }
        }
        Ok(Bloch4::from_components(c))
    }

    /// Outcome density `p(t) = rbar_0(t)`, clamped at zero.
    pub fn pdf(&self, t: Outcome) -> Result<f64> {
        let value = self.theta_component(t, 0, DEFAULT_TOL)?;
        if value < -1e-9 {
            return Err(Error::NegativeDensity(value));
        }
        Ok(value.max(0.0))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

/// `rbar_mu(t)` by the lattice-sum route.
pub fn bloch_lattice_sum(state: &GaussianState, t: Outcome, mu: usize, tol: f64) -> Result<f64> {
    BlochEngine::new(state)?.lattice_sum(t, mu, tol)
}

/// `rbar_mu(t)` by the theta-function route.
pub fn bloch_theta(state: &GaussianState, t: Outcome, mu: usize, tol: f64) -> Result<f64> {
    BlochEngine::new(state)?.theta_component(t, mu, tol)
}

/// Normalised Bloch vector of the corrected state.
pub fn bloch_normalized(state: &GaussianState, t: Outcome) -> Result<Bloch4> {
    BlochEngine::new(state)?.normalized(t)
}

pub fn pdf(state: &GaussianState, t: Outcome) -> Result<f64> {
    BlochEngine::new(state)?.pdf(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn pauli_table() {
        for p in PAULIS {
            assert_eq!(p.ell_bar, [p.ell[1], p.ell[0]]);
        }
        assert_eq!(GkpPauli::new(2).unwrap().ell(), [1, 1]);
        assert!(matches!(GkpPauli::new(4), Err(Error::InvalidPauli(4))));
    }

    #[test]
    fn comb_terms() {
        let t = pauli_comb_term(PAULIS[0], [0, 0]);
        assert_eq!(t.location, [0.0, 0.0]);
        assert_eq!(t.weight, 0.5);

        let t = pauli_comb_term(PAULIS[2], [1, 0]);
        assert!((t.location[0] - 1.5 * SQRT_PI).abs() < 1e-15);
        assert!((t.location[1] - 0.5 * SQRT_PI).abs() < 1e-15);
        assert_eq!(t.weight, -0.5);

        let t = pauli_comb_term(PAULIS[3], [0, 1]);
        assert_eq!(t.location[0], 0.0);
        assert!((t.location[1] - 1.5 * SQRT_PI).abs() < 1e-15);
        assert_eq!(t.weight, 0.5);
    }

    #[test]
    fn vacuum_origin_symmetries() {
        let e = BlochEngine::new(&GaussianState::vacuum()).unwrap();
        let t0 = Outcome::new(0.0, 0.0);
        assert!(e.lattice_sum(t0, 2, TOL).unwrap().abs() < TOL);
        let x = e.lattice_sum(t0, 1, TOL).unwrap();
        let z = e.lattice_sum(t0, 3, TOL).unwrap();
        assert!((x - z).abs() < TOL);
        let b = e.normalized(t0).unwrap();
        assert!(b.r[1].abs() < 1e-12);
        assert!((b.r[0] - b.r[2]).abs() < 1e-12);
        assert!(b.r[0] > 0.0);
    }

    #[test]
    fn vacuum_origin_density_against_jacobi_constants() {
        // p(0) = theta_3(e^{-pi})^2 / (4 pi) with theta_3(e^{-pi}) = pi^{1/4} / Gamma(3/4)
        let theta3 = 1.086_434_811_213_308_1f64;
        let p = pdf(&GaussianState::vacuum(), Outcome::new(0.0, 0.0)).unwrap();
        assert!((p - theta3 * theta3 / (4.0 * PI)).abs() < 1e-13);
        assert!((0.066..=0.094).contains(&p));
    }

    #[test]
    fn theta_route_matches_lattice_route() {
        let state = GaussianState::new([0.2, -0.7], [[0.9, 0.3], [0.3, 0.6]]).unwrap();
        let e = BlochEngine::new(&state).unwrap();
        for &(tq, tp) in &[(0.0, 0.0), (1.1, 2.9), (3.4, 0.3), (-2.0, 5.0)] {
            for mu in 0..4 {
                let t = Outcome::new(tq, tp);
                let a = e.theta_component(t, mu, TOL).unwrap();
                let b = e.lattice_sum(t, mu, TOL).unwrap();
                assert!((a - b).abs() < 1e-10, "mu {mu} t {t:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn outcome_canonicalisation() {
        let t = Outcome::new(-0.1, 2.0 * CELL_SIDE + 0.25).canonical();
        assert!((t.tq - (CELL_SIDE - 0.1)).abs() < 1e-14);
        assert!((t.tp - 0.25).abs() < 1e-12);
        assert!(t.is_canonical());
        assert!(Outcome::new(-1e-18, 0.0).canonical().is_canonical());
    }

    #[test]
    fn heterodyne_mapping() {
        assert_eq!(heterodyne_to_outcome(Complex64::new(0.0, 0.0)), Outcome::new(0.0, 0.0));
        let t = heterodyne_to_outcome(Complex64::new(1.0, 0.0));
        assert!((t.tq - (CELL_SIDE - std::f64::consts::SQRT_2)).abs() < 1e-14);
        assert_eq!(t.tp, 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let e = BlochEngine::new(&GaussianState::vacuum()).unwrap();
        let t = Outcome::new(0.0, 0.0);
        assert!(matches!(e.theta_component(t, 7, TOL), Err(Error::InvalidPauli(7))));
        assert!(matches!(e.lattice_sum(t, 0, 0.0), Err(Error::InvalidTolerance(_))));
        assert!(matches!(e.pdf(Outcome::new(f64::NAN, 0.0)), Err(Error::NonFiniteOutcome)));
    }

    #[test]
    fn cross_check_flag_runs_both_routes() {
        let e = BlochEngine::new(&GaussianState::thermal(0.3).unwrap()).unwrap();
        let opts = BlochOptions {
            cross_check: Some(1e-10),
            ..Default::default()
        };
        let b = e.normalized_with(Outcome::new(0.4, 1.3), &opts).unwrap();
        assert_eq!(b.r0, 1.0);
        assert!(b.norm3() < 1.0);
    }

    #[test]
    fn high_temperature_density_is_flat() {
        let e = BlochEngine::new(&GaussianState::thermal(10.0).unwrap()).unwrap();
        for &(tq, tp) in &[(0.0, 0.0), (0.9, 2.1), (1.7, 1.7)] {
            let p = e.pdf(Outcome::new(tq, tp)).unwrap();
            assert!((p - 1.0 / (4.0 * PI)).abs() < 1e-12, "{p}");
        }
    }
}
