//! Seeded verification runs: theta route against lattice route, and the
//! analytic Bloch vector against the number-basis oracle.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::gaussian::GaussianState;
use crate::gkp::{bloch_normalized, BlochEngine, Outcome, CELL_SIDE};
use crate::oracle::{envelope_comparator, heterodyne_comparator, Oracle, OracleConfig};

pub const DUAL_ROUTE_TOL: f64 = 1e-10;
pub const ORACLE_TOL: f64 = 1e-3;

/// Random physical Gaussian state: occupation in `[0, nbar_max]`, squeezing
/// `r in [-0.6, 0.6]`, a random rotation and a mean in `[-1, 1]^2`.
pub fn random_state<R: Rng>(rng: &mut R, nbar_max: f64) -> GaussianState {
    let nbar = rng.random_range(0.0..=nbar_max);
    let r: f64 = rng.random_range(-0.6..=0.6);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let (s, c) = phi.sin_cos();
    let (u, v) = ((2.0 * r).exp(), (-2.0 * r).exp());
    let scale = nbar + 0.5;
    let a = scale * (c * c * u + s * s * v);
    let b = scale * c * s * (u - v);
    let d = scale * (s * s * u + c * c * v);
    let mean = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
    GaussianState::new(mean, [[a, b], [b, d]]).expect("rotated squeezed thermal state is physical")
}

/// Isotropic state with random occupation and mean.
pub fn random_isotropic_state<R: Rng>(rng: &mut R, nbar_max: f64) -> GaussianState {
    let nbar = rng.random_range(0.0..=nbar_max);
    let mean = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
    GaussianState::thermal(nbar)
        .and_then(|s| s.with_mean(mean))
        .expect("displaced thermal state is physical")
}

pub fn random_outcome<R: Rng>(rng: &mut R) -> Outcome {
    Outcome::new(rng.random_range(0.0..CELL_SIDE), rng.random_range(0.0..CELL_SIDE))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualRouteCase {
    pub state: GaussianState,
    pub t: [f64; 2],
    pub mu: usize,
    pub theta: f64,
    pub lattice: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualRouteReport {
    pub seed: u64,
    pub tol: f64,
    pub n_cases: usize,
    pub max_abs_err: f64,
    pub pass: bool,
    pub cases: Vec<DualRouteCase>,
}

/// `n_pairs` random `(state, t)` pairs, each checked for all four components.
pub fn dual_route_report(seed: u64, n_pairs: usize, tol: f64) -> Result<DualRouteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(4 * n_pairs);
    for _ in 0..n_pairs {
        let state = random_state(&mut rng, 2.0);
        let t = random_outcome(&mut rng);
        let engine = BlochEngine::new(&state)?;
        for mu in 0..4 {
            let theta = engine.theta_component(t, mu, 1e-12)?;
            let lattice = engine.lattice_sum(t, mu, 1e-12)?;
            cases.push(DualRouteCase {
                state,
                t: t.as_array(),
                mu,
                theta,
                lattice,
                abs_err: (theta - lattice).abs(),
            });
        }
    }
    let max_abs_err = cases.iter().map(|c| c.abs_err).fold(0.0, f64::max);
    Ok(DualRouteReport {
        seed,
        tol,
        n_cases: cases.len(),
        max_abs_err,
        pass: max_abs_err < tol,
        cases,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCase {
    pub beta: f64,
    pub cutoff: usize,
    pub state: GaussianState,
    pub t: [f64; 2],
    /// Oracle Bloch vector, normalised.
    pub bloch: [f64; 4],
    /// Analytic prediction for the enveloped input.
    pub analytic_bloch: [f64; 4],
    pub abs_err: f64,
    /// Analytic result for the ideal code and the bare input.
    pub ideal_bloch: [f64; 4],
    pub raw_abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub seed: u64,
    pub beta: f64,
    pub cutoff: usize,
    pub comb_halfwidth: usize,
    pub tol: f64,
    pub n_cases: usize,
    pub max_abs_err: f64,
    pub max_raw_abs_err: f64,
    pub pass: bool,
    pub cases: Vec<OracleCase>,
}

fn max_diff(a: [f64; 4], b: [f64; 4]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Random oracle cases; every fourth input is anisotropic, the rest are
/// displaced thermal states.
pub fn oracle_report(seed: u64, n_cases: usize, config: &OracleConfig, tol: f64) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<(GaussianState, Outcome)> = (0..n_cases)
        .map(|i| {
            let state = if i % 4 == 3 {
                random_state(&mut rng, 0.5)
            } else {
                random_isotropic_state(&mut rng, 1.0)
            };
            (state, random_outcome(&mut rng))
        })
        .collect();
    let oracle = if n_cases > 0 { Some(Oracle::new(config)?) } else { None };
    let mut cases = Vec::with_capacity(n_cases);
    for (state, t) in inputs {
        let oracle = oracle.as_ref().expect("oracle built for nonempty runs");
        let bloch = oracle.bloch(&state, t)?.normalized()?.components();
        let analytic_bloch = envelope_comparator(&state, t, config.beta)?.components();
        let ideal_bloch = bloch_normalized(&state, t)?.components();
        cases.push(OracleCase {
            beta: config.beta,
            cutoff: config.cutoff,
            state,
            t: t.as_array(),
            bloch,
            analytic_bloch,
            abs_err: max_diff(bloch, analytic_bloch),
            ideal_bloch,
            raw_abs_err: max_diff(bloch, ideal_bloch),
        });
    }
    let max_abs_err = cases.iter().map(|c| c.abs_err).fold(0.0, f64::max);
    let max_raw_abs_err = cases.iter().map(|c| c.raw_abs_err).fold(0.0, f64::max);
    Ok(OracleReport {
        seed,
        beta: config.beta,
        cutoff: config.cutoff,
        comb_halfwidth: config.comb_halfwidth,
        tol,
        n_cases,
        max_abs_err,
        max_raw_abs_err,
        pass: max_abs_err < tol,
        cases,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub beta: f64,
    pub max_abs_err: f64,
    pub max_raw_abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub seed: u64,
    pub cutoff: usize,
    pub n_cases: usize,
    pub rows: Vec<ConvergenceRow>,
    /// Distance to the ideal code shrinks at every halving of `beta`.
    pub raw_monotone: bool,
    /// Distance to the enveloped prediction never grows by more than `noise_floor`.
    pub monotone_within_floor: bool,
    pub noise_floor: f64,
}

/// Oracle discrepancy against `beta`, on the same random cases at every `beta`.
pub fn convergence_study(seed: u64, n_cases: usize, betas: &[f64], cutoff: usize, noise_floor: f64) -> Result<ConvergenceReport> {
    let mut rows = Vec::with_capacity(betas.len());
    for &beta in betas {
        let config = OracleConfig::new(beta, cutoff, OracleConfig::default().comb_halfwidth)?;
        let report = oracle_report(seed, n_cases, &config, ORACLE_TOL)?;
        rows.push(ConvergenceRow {
            beta,
            max_abs_err: report.max_abs_err,
            max_raw_abs_err: report.max_raw_abs_err,
        });
    }
    let raw_monotone = rows.windows(2).all(|w| w[1].max_raw_abs_err < w[0].max_raw_abs_err);
    let monotone_within_floor = rows.windows(2).all(|w| w[1].max_abs_err <= w[0].max_abs_err + noise_floor);
    Ok(ConvergenceReport {
        seed,
        cutoff,
        n_cases,
        rows,
        raw_monotone,
        monotone_within_floor,
        noise_floor,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeterodyneCase {
    pub alpha: [f64; 2],
    pub bloch: [f64; 4],
    pub analytic_bloch: [f64; 4],
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeterodyneReport {
    pub seed: u64,
    pub beta: f64,
    pub cutoff: usize,
    pub tol: f64,
    pub max_abs_err: f64,
    pub pass: bool,
    pub cases: Vec<HeterodyneCase>,
}

/// Bell-pair coherent-state projection against the analytic vacuum result
/// at the matching outcome, for random `alpha` in the disc `|alpha| <= 2`.
pub fn heterodyne_report(seed: u64, n_cases: usize, config: &OracleConfig, tol: f64) -> Result<HeterodyneReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let oracle = if n_cases > 0 { Some(Oracle::new(config)?) } else { None };
    let mut cases = Vec::with_capacity(n_cases);
    for _ in 0..n_cases {
        let radius = 2.0 * rng.random::<f64>().sqrt();
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let alpha = Complex64::from_polar(radius, phase);
        let oracle = oracle.as_ref().expect("oracle built for nonempty runs");
        let bloch = oracle.bell_heterodyne(alpha)?.components();
        let analytic_bloch = heterodyne_comparator(alpha, config.beta)?.components();
        cases.push(HeterodyneCase {
            alpha: [alpha.re, alpha.im],
            bloch,
            analytic_bloch,
            abs_err: max_diff(bloch, analytic_bloch),
        });
    }
    let max_abs_err = cases.iter().map(|c| c.abs_err).fold(0.0, f64::max);
    Ok(HeterodyneReport {
        seed,
        beta: config.beta,
        cutoff: config.cutoff,
        tol,
        max_abs_err,
        pass: max_abs_err < tol,
        cases,
    })
}
