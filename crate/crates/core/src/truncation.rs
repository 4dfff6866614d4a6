//! Certified truncation of Gaussian lattice sums and compensated accumulation.
//!
//! Both the theta function and the direct lattice sum reduce to sums of the
//! form `K * sum_m exp(-(m - c)^T A (m - c)) * phase(m)` over `m in Z^2`. The
//! helpers here pick an axis-aligned integer box around `round(c)` whose
//! discarded tail is provably below a requested tolerance, and hand out the
//! box offsets ordered by increasing `|m|^2`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Natural log of an upper bound on the tail
/// `sum_{m outside box} exp(-a |m - c|^2)` times `exp(log_scale)`,
/// for the box of half-width `radius` centred on `round(c)`.
///
/// Points outside the box sit at distance at least `d = radius + 1/2` from
/// `c` along some axis. One axis contributes at most
/// `2 e^{-a d^2} / (1 - e^{-2 a d})`, the other axis at most
/// `2 + sqrt(pi / a)`, and the union over the two axes doubles that.
pub(crate) fn log_tail_bound(a: f64, radius: i64, log_scale: f64) -> f64 {
    let d = radius as f64 + 0.5;
    let full_axis = 2.0 + (PI / a).sqrt();
    let one_axis_tail = (2.0f64).ln() - a * d * d - (-(-2.0 * a * d).exp_m1()).ln();
    log_scale + (2.0 * full_axis).ln() + one_axis_tail
}

/// Smallest box half-width whose tail bound is below `exp(log_tol)`.
///
/// Returns `Err(estimate)` when the required radius exceeds `cap`.
pub(crate) fn certified_radius(a: f64, log_scale: f64, log_tol: f64, cap: i64) -> Result<i64, f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(f64::INFINITY);
    }
    let full_axis = 2.0 + (PI / a).sqrt();
    let excess = log_scale + (4.0 * full_axis).ln() - log_tol + 1.0;
    let guess = (excess.max(0.0) / a).sqrt() - 0.5;
    if !guess.is_finite() || guess > cap as f64 {
        return Err(guess);
    }
    let mut radius = (guess.floor() as i64).max(1);
    while log_tail_bound(a, radius, log_scale) >= log_tol {
        radius += 1;
        if radius > cap {
            return Err(radius as f64);
        }
    }
    // The closed-form guess overshoots slightly; walk back while still certified.
    while radius > 1 && log_tail_bound(a, radius - 1, log_scale) < log_tol {
        radius -= 1;
    }
    Ok(radius)
}

type Offsets = Arc<Vec<(i64, i64)>>;

/// Offsets within a box of half-width `radius`, ordered by increasing `|m|^2`
/// (ties broken lexicographically).
pub(crate) fn sorted_offsets(radius: i64) -> Offsets {
    const CACHED_UP_TO: i64 = 64;
    static CACHE: OnceLock<RwLock<HashMap<i64, Offsets>>> = OnceLock::new();

    if radius > CACHED_UP_TO {
        return Arc::new(build_offsets(radius));
    }
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(hit) = cache.read().expect("offset cache poisoned").get(&radius) {
        return Arc::clone(hit);
    }
    let built = Arc::new(build_offsets(radius));
    cache
        .write()
        .expect("offset cache poisoned")
        .entry(radius)
        .or_insert(built)
        .clone()
}

fn build_offsets(radius: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(((2 * radius + 1) * (2 * radius + 1)) as usize);
    for i in -radius..=radius {
        for j in -radius..=radius {
            out.push((i, j));
        }
    }
    out.sort_by_key(|&(i, j)| (i * i + j * j, i, j));
    out
}

/// Smallest and largest eigenvalue of the symmetric matrix `[[a, b], [b, c]]`.
pub(crate) fn sym_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let half_gap = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mean - half_gap, mean + half_gap)
}
