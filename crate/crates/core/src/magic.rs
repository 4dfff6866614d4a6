//! Magic-state content of the corrected state: fidelity maps over the
//! outcome cell, success probabilities and threshold occupations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, LatticeKind};
use crate::gkp::{Bloch4, BlochEngine, BlochOptions, Outcome, CELL_SIDE};
use crate::quadrature::{GaussLegendre, Rect};
use crate::truncation::CompensatedSum;

pub const H_DISTILL_THRESHOLD: f64 = 0.853;
pub const T_OCTAHEDRON_BOUND: f64 = 0.789;
pub const T_TIGHT_THRESHOLD: f64 = 0.8273;

/// Fidelity of any Pauli eigenstate with its nearest H-type state, `(1 + 1/sqrt 2) / 2`.
pub const H_PAULI_FIDELITY: f64 = 0.853_553_390_593_273_8;

/// Bloch vectors longer than this are rejected.
const BLOCH_NORM_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MagicFamily {
    H,
    T,
}

impl MagicFamily {
    /// H: `(+-1, +-1, 0)/sqrt 2` over the three coordinate planes, planes
    /// `xy, xz, yz` in that order and signs `++, +-, -+, --` within each.
    /// T: `(+-1, +-1, +-1)/sqrt 3` with sign bits counting down from `+++`.
    pub fn vectors(&self) -> &'static [[f64; 3]] {
        static H: OnceLock<Vec<[f64; 3]>> = OnceLock::new();
        static T: OnceLock<Vec<[f64; 3]>> = OnceLock::new();
        match self {
            MagicFamily::H => H.get_or_init(|| {
                let mut out = Vec::with_capacity(12);
                for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                    for si in [1.0, -1.0] {
                        for sj in [1.0, -1.0] {
                            let mut v = [0.0; 3];
                            v[i] = si * FRAC_1_SQRT_2;
                            v[j] = sj * FRAC_1_SQRT_2;
                            out.push(v);
                        }
                    }
                }
                out
            }),
            MagicFamily::T => T.get_or_init(|| {
                let c = 1.0 / 3f64.sqrt();
                let mut out = Vec::with_capacity(8);
                for bits in 0..8u32 {
                    let sign = |k: u32| if bits >> (2 - k) & 1 == 0 { c } else { -c };
                    out.push([sign(0), sign(1), sign(2)]);
                }
                out
            }),
        }
    }

    /// Named fidelity levels.
    pub fn thresholds(&self) -> &'static [(&'static str, f64)] {
        match self {
            MagicFamily::H => &[("distill", H_DISTILL_THRESHOLD)],
            MagicFamily::T => &[("octahedron_bound", T_OCTAHEDRON_BOUND), ("tight_distill", T_TIGHT_THRESHOLD)],
        }
    }

    /// Fidelity above which states of this family can be distilled.
    pub fn distill_threshold(&self) -> f64 {
        match self {
            MagicFamily::H => H_DISTILL_THRESHOLD,
            MagicFamily::T => T_TIGHT_THRESHOLD,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MagicFamily::H => "H",
            MagicFamily::T => "T",
        }
    }
}

impl fmt::Display for MagicFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MagicFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "H" | "h" => Ok(MagicFamily::H),
            "T" | "t" => Ok(MagicFamily::T),
            other => Err(format!("unknown magic family {other:?} (expected H or T)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nearest {
    pub fidelity: f64,
    pub index: usize,
}

/// `max_m (1 + m . r) / 2` over the family, capped at 1 against rounding;
/// ties go to the lowest index.
pub fn fidelity_to_nearest(r: [f64; 3], family: MagicFamily) -> Result<Nearest> {
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm <= 1.0 + BLOCH_NORM_SLACK) {
        return Err(Error::NotABlochVector(norm));
    }
    let mut best = Nearest {
        fidelity: f64::NEG_INFINITY,
        index: 0,
    };
    for (index, m) in family.vectors().iter().enumerate() {
        let fidelity = 0.5 * (1.0 + m[0] * r[0] + m[1] * r[1] + m[2] * r[2]);
        if fidelity > best.fidelity {
            best = Nearest { fidelity, index };
        }
    }
    best.fidelity = best.fidelity.min(1.0);
    Ok(best)
}

/// Corrected-state data at one outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityPoint {
    pub t: Outcome,
    pub pdf: f64,
    /// `None` where the outcome has vanishing probability.
    pub bloch: Option<Bloch4>,
    pub fidelity: Option<f64>,
    pub nearest: Option<usize>,
}

/// Fidelity of the corrected state as a function of the outcome, for one
/// input state, lattice and family.
#[derive(Debug, Clone)]
pub struct FidelityEvaluator {
    engine: BlochEngine,
    family: MagicFamily,
    lattice: LatticeKind,
    opts: BlochOptions,
}

impl FidelityEvaluator {
    /// Hexagonal-lattice inputs are mapped to the equivalent square-lattice input.
    pub fn new(state: &GaussianState, family: MagicFamily, lattice: LatticeKind) -> Result<Self> {
        let input = lattice.to_square_input(state)?;
        Ok(Self {
            engine: BlochEngine::new(&input)?,
            family,
            lattice,
            opts: BlochOptions::default(),
        })
    }

    pub fn with_options(mut self, opts: BlochOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn family(&self) -> MagicFamily {
        self.family
    }

    pub fn lattice(&self) -> LatticeKind {
        self.lattice
    }

    pub fn engine(&self) -> &BlochEngine {
        &self.engine
    }

    pub fn evaluate(&self, t: Outcome) -> Result<FidelityPoint> {
        let raw = match self.engine.components(t, &self.opts) {
            Ok(raw) => raw,
            Err(Error::VanishingProbability(p)) => {
                return Ok(FidelityPoint {
                    t,
                    pdf: p.max(0.0),
                    bloch: None,
                    fidelity: None,
                    nearest: None,
                })
            }
            Err(e) => return Err(e),
        };
        let bloch = raw.normalized()?;
        let nearest = fidelity_to_nearest(bloch.r, self.family)?;
        Ok(FidelityPoint {
            t,
            pdf: raw.r0,
            bloch: Some(bloch),
            fidelity: Some(nearest.fidelity),
            nearest: Some(nearest.index),
        })
    }

    /// Fidelity with undefined outcomes mapped to `-inf`.
    pub fn fidelity(&self, t: Outcome) -> Result<f64> {
        Ok(self.evaluate(t)?.fidelity.unwrap_or(f64::NEG_INFINITY))
    }
}

/// Cell-centred grid points, `t_q` index outermost.
pub fn grid_outcomes(resolution: usize) -> Vec<Outcome> {
    let h = CELL_SIDE / resolution as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            out.push(Outcome::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct FidelityMap {
    pub family: MagicFamily,
    pub lattice: LatticeKind,
    pub resolution: usize,
    /// Row-major, `t_q` index outermost.
    pub points: Vec<FidelityPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapSummary {
    pub family: MagicFamily,
    pub lattice: LatticeKind,
    pub resolution: usize,
    pub threshold: f64,
    pub min_f: f64,
    pub max_f: f64,
    pub min_pdf: f64,
    pub max_pdf: f64,
    /// Fraction of grid points with `F > threshold`.
    pub fraction_above: f64,
    /// Fraction of grid points with `F <= threshold`.
    pub non_distillable_fraction: f64,
    pub undefined_points: usize,
}

pub fn fidelity_map(
    state: &GaussianState,
    family: MagicFamily,
    lattice: LatticeKind,
    resolution: usize,
) -> Result<FidelityMap> {
    let evaluator = FidelityEvaluator::new(state, family, lattice)?;
    evaluator.map(resolution)
}

impl FidelityEvaluator {
    pub fn map(&self, resolution: usize) -> Result<FidelityMap> {
        if resolution == 0 {
            return Err(Error::OutOfRange {
                name: "resolution",
                value: 0.0,
                range: ">= 1",
            });
        }
        let points = grid_outcomes(resolution)
            .into_par_iter()
            .map(|t| self.evaluate(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(FidelityMap {
            family: self.family,
            lattice: self.lattice,
            resolution,
            points,
        })
    }
}

impl FidelityMap {
    pub fn at(&self, iq: usize, ip: usize) -> &FidelityPoint {
        &self.points[iq * self.resolution + ip]
    }

    pub fn summary(&self) -> MapSummary {
        self.summary_at(self.family.distill_threshold())
    }

    pub fn summary_at(&self, threshold: f64) -> MapSummary {
        let mut min_f = f64::INFINITY;
        let mut max_f = f64::NEG_INFINITY;
        let mut min_pdf = f64::INFINITY;
        let mut max_pdf = f64::NEG_INFINITY;
        let mut above = 0usize;
        let mut below = 0usize;
        let mut undefined = 0usize;
        for p in &self.points {
            min_pdf = min_pdf.min(p.pdf);
            max_pdf = max_pdf.max(p.pdf);
            match p.fidelity {
                Some(f) => {
                    min_f = min_f.min(f);
                    max_f = max_f.max(f);
                    if f > threshold {
                        above += 1;
                    } else {
                        below += 1;
                    }
                }
                None => undefined += 1,
            }
        }
        let n = self.points.len() as f64;
        MapSummary {
            family: self.family,
            lattice: self.lattice,
            resolution: self.resolution,
            threshold,
            min_f,
            max_f,
            min_pdf,
            max_pdf,
            fraction_above: above as f64 / n,
            non_distillable_fraction: below as f64 / n,
            undefined_points: undefined,
        }
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
fn golden_min<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Coordinate-wise golden-section descent from `start` within `+-radius`.
fn refine_min<F>(f: &F, start: Outcome, start_value: f64, radius: f64) -> Result<(Outcome, f64)>
where
    F: Fn(Outcome) -> Result<f64>,
{
    let mut t = start;
    let mut value = start_value;
    for _ in 0..6 {
        let before = value;
        let (q, fq) = golden_min(|q| f(Outcome::new(q, t.tp)), t.tq - radius, t.tq + radius, 1e-9)?;
        if fq < value {
            t.tq = q;
            value = fq;
        }
        let (p, fp) = golden_min(|p| f(Outcome::new(t.tq, p)), t.tp - radius, t.tp + radius, 1e-9)?;
        if fp < value {
            t.tp = p;
            value = fp;
        }
        if before - value < 1e-13 {
            break;
        }
    }
    Ok((t, value))
}

/// Nelder-Mead simplex descent in the outcome plane. Unlike coordinate
/// searches it follows the kinked valleys of the max over family vectors.
fn simplex_min<F>(f: &F, start: Outcome, step: f64, tol: f64) -> Result<(Outcome, f64)>
where
    F: Fn(Outcome) -> Result<f64>,
{
    let eval = |x: [f64; 2]| f(Outcome::new(x[0], x[1]));
    let mut pts = [
        [start.tq, start.tp],
        [start.tq + step, start.tp],
        [start.tq, start.tp + step],
    ];
    let mut vals = [eval(pts[0])?, eval(pts[1])?, eval(pts[2])?];
    let lerp = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
    for _ in 0..2000 {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap_or(std::cmp::Ordering::Equal));
        pts = order.map(|i| pts[i]);
        vals = order.map(|i| vals[i]);
        let size = (pts[1][0] - pts[0][0]).hypot(pts[1][1] - pts[0][1]).max((pts[2][0] - pts[0][0]).hypot(pts[2][1] - pts[0][1]));
        if size < tol {
            break;
        }
        let centroid = lerp(pts[0], pts[1], 0.5);
        let reflected = lerp(pts[2], centroid, 2.0);
        let fr = eval(reflected)?;
        if fr < vals[0] {
            let expanded = lerp(pts[2], centroid, 3.0);
            let fe = eval(expanded)?;
            (pts[2], vals[2]) = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < vals[1] {
            (pts[2], vals[2]) = (reflected, fr);
        } else {
            let contracted = if fr < vals[2] {
                lerp(pts[2], centroid, 1.5)
            } else {
                lerp(pts[2], centroid, 0.5)
            };
            let fc = eval(contracted)?;
            if fc < vals[2].min(fr) {
                (pts[2], vals[2]) = (contracted, fc);
            } else {
                for k in 1..3 {
                    pts[k] = lerp(pts[0], pts[k], 0.5);
                    vals[k] = eval(pts[k])?;
                }
            }
        }
    }
    let best = (0..3).fold(0, |b, k| if vals[k] < vals[b] { k } else { b });
    Ok((Outcome::new(pts[best][0], pts[best][1]), vals[best]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxFidelity {
    pub t: Outcome,
    pub fidelity: f64,
    pub nearest: usize,
}

impl FidelityEvaluator {
    /// Largest fidelity over the cell: best of a `seed_grid^2` map, then
    /// golden-section refinement from the four best seeds.
    pub fn max_fidelity(&self, seed_grid: usize) -> Result<MaxFidelity> {
        let map = self.map(seed_grid)?;
        let mut seeds: Vec<&FidelityPoint> = map.points.iter().filter(|p| p.fidelity.is_some()).collect();
        if seeds.is_empty() {
            return Err(Error::VanishingProbability(0.0));
        }
        seeds.sort_by(|a, b| b.fidelity.partial_cmp(&a.fidelity).expect("finite fidelity"));
        let radius = CELL_SIDE / seed_grid as f64;
        let neg = |t: Outcome| self.fidelity(t).map(|f| -f);
        let mut best: Option<(Outcome, f64)> = None;
        for seed in seeds.iter().take(4) {
            let (t, v) = refine_min(&neg, seed.t, -seed.fidelity.unwrap(), radius)?;
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((t, v));
            }
        }
        let (t, _) = best.expect("at least one seed");
        let point = self.evaluate(t)?;
        Ok(MaxFidelity {
            t: t.canonical(),
            fidelity: point.fidelity.unwrap_or(f64::NEG_INFINITY),
            nearest: point.nearest.unwrap_or(0),
        })
    }
}

/// Isolated minimum of the fidelity, with the Pauli axis its Bloch vector is closest to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityMinimum {
    pub t: Outcome,
    pub fidelity: f64,
    pub bloch: [f64; 3],
    /// 0, 1, 2 for the x, y, z axis.
    pub pauli_axis: usize,
    /// `max_k |r_k| / |r|`: 1 on a Pauli axis.
    pub alignment: f64,
}

impl FidelityEvaluator {
    /// Local minima of the fidelity: grid points no larger than their eight
    /// (periodic) neighbours, refined by simplex descent and deduplicated.
    pub fn fidelity_minima(&self, map: &FidelityMap) -> Result<Vec<FidelityMinimum>> {
        let n = map.resolution;
        let h = CELL_SIDE / n as f64;
        let value = |iq: usize, ip: usize| map.at(iq, ip).fidelity.unwrap_or(f64::INFINITY);
        let mut seeds = Vec::new();
        for iq in 0..n {
            for ip in 0..n {
                let v = value(iq, ip);
                if !v.is_finite() {
                    continue;
                }
                let mut is_min = true;
                for dq in [n - 1, 0, 1] {
                    for dp in [n - 1, 0, 1] {
                        if (dq, dp) != (0, 0) && value((iq + dq) % n, (ip + dp) % n) < v {
                            is_min = false;
                        }
                    }
                }
                if is_min {
                    seeds.push(map.at(iq, ip));
                }
            }
        }
        let f = |t: Outcome| self.fidelity(t);
        let refined = seeds
            .par_iter()
            .map(|p| simplex_min(&f, p.t, 0.5 * h, 1e-10))
            .collect::<Result<Vec<_>>>()?;

        let mut out: Vec<FidelityMinimum> = Vec::new();
        for (t, _) in refined {
            let t = t.canonical();
            let duplicate = out.iter().any(|m| periodic_distance(m.t, t) < h);
            if duplicate {
                continue;
            }
            let point = self.evaluate(t)?;
            let (Some(bloch), Some(fidelity)) = (point.bloch, point.fidelity) else {
                continue;
            };
            let r = bloch.r;
            let norm = bloch.norm3();
            let (pauli_axis, largest) = r
                .iter()
                .map(|x| x.abs())
                .enumerate()
                .fold((0, 0.0), |acc, (k, x)| if x > acc.1 { (k, x) } else { acc });
            out.push(FidelityMinimum {
                t,
                fidelity,
                bloch: r,
                pauli_axis,
                alignment: if norm > 0.0 { largest / norm } else { 0.0 },
            });
        }
        out.sort_by(|a, b| (a.t.tq, a.t.tp).partial_cmp(&(b.t.tq, b.t.tp)).expect("finite outcomes"));
        Ok(out)
    }
}

fn periodic_distance(a: Outcome, b: Outcome) -> f64 {
    let wrap = |d: f64| {
        let d = d.rem_euclid(CELL_SIDE);
        d.min(CELL_SIDE - d)
    };
    wrap(a.tq - b.tq).hypot(wrap(a.tp - b.tp))
}

#[derive(Debug, Clone, Copy)]
pub struct SuccessOptions {
    /// Base grid is `base x base` cells with a 4x4 Gauss-Legendre rule each.
    pub base: usize,
    /// Refinement stops once cells straddling the `F = f` contour carry less probability than this.
    pub boundary_tol: f64,
    pub max_level: u32,
    /// Component tolerance for each Bloch evaluation.
    pub bloch_tol: f64,
}

impl Default for SuccessOptions {
    fn default() -> Self {
        Self {
            base: 32,
            boundary_tol: 1e-4,
            max_level: 14,
            bloch_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    fidelity: Option<f64>,
    /// quadrature weight times pdf
    mass: f64,
}

#[derive(Debug, Clone)]
struct SampledCell {
    rect: Rect,
    samples: Vec<Sample>,
}

impl SampledCell {
    fn mass(&self) -> f64 {
        self.samples.iter().map(|s| s.mass).sum()
    }

    /// `(mass with F >= f, total mass, straddles the contour)`
    fn classify(&self, f: f64) -> (f64, f64, bool) {
        let mut pass = 0.0;
        let mut total = 0.0;
        let (mut any_pass, mut any_fail) = (false, false);
        for s in &self.samples {
            total += s.mass;
            match s.fidelity {
                Some(x) if x >= f => {
                    pass += s.mass;
                    any_pass = true;
                }
                Some(_) => any_fail = true,
                None => {}
            }
        }
        (pass, total, any_pass && any_fail)
    }
}

/// Probability of a corrected state with fidelity at least `f`, for one input.
/// Base-grid samples are shared between thresholds.
#[derive(Debug, Clone)]
pub struct SuccessIntegrator {
    evaluator: FidelityEvaluator,
    opts: SuccessOptions,
    base: Vec<SampledCell>,
    fine_rule: GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessEstimate {
    pub probability: f64,
    /// Probability mass of the unresolved boundary cells.
    pub undecided_mass: f64,
    pub levels: u32,
    pub evaluations: usize,
}

impl SuccessIntegrator {
    pub fn new(state: &GaussianState, family: MagicFamily, lattice: LatticeKind, opts: SuccessOptions) -> Result<Self> {
        if !(opts.boundary_tol > 0.0) {
            return Err(Error::InvalidTolerance(opts.boundary_tol));
        }
        if opts.base == 0 {
            return Err(Error::OutOfRange {
                name: "base",
                value: 0.0,
                range: ">= 1",
            });
        }
        let evaluator = FidelityEvaluator::new(state, family, lattice)?.with_options(BlochOptions {
            tol: opts.bloch_tol,
            cross_check: None,
        });
        let rule = GaussLegendre::new(4);
        let base = Rect::unit_cell()
            .grid(opts.base)
            .into_par_iter()
            .map(|rect| sample(&evaluator, &rule, rect))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            evaluator,
            opts,
            base,
            fine_rule: GaussLegendre::new(2),
        })
    }

    /// Total probability on the base grid; 1 up to quadrature error.
    pub fn total_mass(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for cell in &self.base {
            acc.add(cell.mass());
        }
        acc.value()
    }

    pub fn probability(&self, f: f64) -> Result<SuccessEstimate> {
        check_fidelity(f)?;
        let mut decided = CompensatedSum::default();
        let mut mixed: Vec<SampledCell> = Vec::new();
        for cell in &self.base {
            let (pass, _, straddles) = cell.classify(f);
            if straddles {
                mixed.push(cell.clone());
            } else {
                decided.add(pass);
            }
        }
        let mut evaluations = self.base.iter().map(|c| c.samples.len()).sum::<usize>();
        let mut level = 0;
        loop {
            let undecided: f64 = mixed.iter().map(SampledCell::mass).sum();
            if undecided < self.opts.boundary_tol {
                for cell in &mixed {
                    decided.add(cell.classify(f).0);
                }
                return Ok(SuccessEstimate {
                    probability: decided.value().clamp(0.0, 1.0),
                    undecided_mass: undecided,
                    levels: level,
                    evaluations,
                });
            }
            if level >= self.opts.max_level {
                return Err(Error::QuadratureNonConvergence(format!(
                    "{} boundary cells still carry probability {undecided:e} at level {level}",
                    mixed.len()
                )));
            }
            let children = mixed
                .par_iter()
                .flat_map_iter(|cell| cell.rect.quadrants())
                .map(|rect| sample(&self.evaluator, &self.fine_rule, rect))
                .collect::<Result<Vec<_>>>()?;
            evaluations += children.len() * self.fine_rule.order() * self.fine_rule.order();
            mixed.clear();
            for cell in children {
                let (pass, _, straddles) = cell.classify(f);
                if straddles {
                    mixed.push(cell);
                } else {
                    decided.add(pass);
                }
            }
            level += 1;
        }
    }
}

fn sample(evaluator: &FidelityEvaluator, rule: &GaussLegendre, rect: Rect) -> Result<SampledCell> {
    let samples = rule
        .on_rect(rect)
        .into_iter()
        .map(|(x, y, w)| {
            let point = evaluator.evaluate(Outcome::new(x, y))?;
            Ok(Sample {
                fidelity: point.fidelity,
                mass: w * point.pdf,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledCell { rect, samples })
}

fn check_fidelity(f: f64) -> Result<()> {
    if (0.5..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "f",
            value: f,
            range: "[0.5, 1]",
        })
    }
}

/// `P(F >= f)` against fidelity for a thermal input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessCurve {
    pub nbar: f64,
    pub family: MagicFamily,
    pub lattice: LatticeKind,
    pub quadrature_tol: f64,
    pub fidelity_grid: Vec<f64>,
    pub probability: Vec<f64>,
}

pub fn success_curve(
    nbar: f64,
    family: MagicFamily,
    lattice: LatticeKind,
    fidelity_grid: &[f64],
    opts: SuccessOptions,
) -> Result<SuccessCurve> {
    for &f in fidelity_grid {
        check_fidelity(f)?;
    }
    if fidelity_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::OutOfRange {
            name: "fidelity_grid",
            value: f64::NAN,
            range: "strictly ascending",
        });
    }
    let state = GaussianState::thermal(nbar)?;
    let integrator = SuccessIntegrator::new(&state, family, lattice, opts)?;
    let probability = fidelity_grid
        .iter()
        .map(|&f| integrator.probability(f).map(|e| e.probability))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuccessCurve {
        nbar,
        family,
        lattice,
        quadrature_tol: opts.boundary_tol,
        fidelity_grid: fidelity_grid.to_vec(),
        probability,
    })
}

/// `P(F >= f)` for a thermal input of occupation `nbar`.
pub fn success_probability(nbar: f64, family: MagicFamily, lattice: LatticeKind, f: f64) -> Result<f64> {
    Ok(success_curve(nbar, family, lattice, &[f], SuccessOptions::default())?.probability[0])
}

#[derive(Debug, Clone, Copy)]
pub struct ThresholdOptions {
    pub seed_grid: usize,
    pub nbar_max: f64,
    pub nbar_tol: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            seed_grid: 64,
            nbar_max: 5.0,
            nbar_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub family: MagicFamily,
    pub lattice: LatticeKind,
    pub f: f64,
    pub nbar_star: f64,
    pub bracket: [f64; 2],
}

/// Thermal occupation at which the best achievable fidelity drops to `f`,
/// by bisection of `max_t F(t) - f` on `[0, nbar_max]`.
pub fn threshold_nbar(family: MagicFamily, lattice: LatticeKind, f: f64) -> Result<Threshold> {
    threshold_nbar_with(family, lattice, f, ThresholdOptions::default())
}

pub fn threshold_nbar_with(family: MagicFamily, lattice: LatticeKind, f: f64, opts: ThresholdOptions) -> Result<Threshold> {
    if !(f > 0.5 && f < 1.0) {
        return Err(Error::OutOfRange {
            name: "f",
            value: f,
            range: "(0.5, 1)",
        });
    }
    let g = |nbar: f64| -> Result<f64> {
        let state = GaussianState::thermal(nbar)?;
        Ok(FidelityEvaluator::new(&state, family, lattice)?.max_fidelity(opts.seed_grid)?.fidelity - f)
    };
    let (mut lo, mut hi) = (0.0, opts.nbar_max);
    let g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if !(g_lo.signum() * g_hi.signum() < 0.0) {
        return Err(Error::NoSignChange { lo, hi, g_lo, g_hi });
    }
    while hi - lo > opts.nbar_tol {
        let mid = 0.5 * (lo + hi);
        if g(mid)?.signum() == g_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold {
        family,
        lattice,
        f,
        nbar_star: 0.5 * (lo + hi),
        bracket: [lo, hi],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gkp::SQRT_PI;

    #[test]
    fn family_sizes_and_norms() {
        assert_eq!(MagicFamily::H.vectors().len(), 12);
        assert_eq!(MagicFamily::T.vectors().len(), 8);
        for fam in [MagicFamily::H, MagicFamily::T] {
            for v in fam.vectors() {
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-15);
            }
        }
        assert_eq!(MagicFamily::H.vectors()[4], [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]);
    }

    #[test]
    fn nearest_fidelity_examples() {
        let s = FRAC_1_SQRT_2;
        let n = fidelity_to_nearest([s, 0.0, s], MagicFamily::H).unwrap();
        assert!((n.fidelity - 1.0).abs() < 1e-15);
        assert_eq!(n.index, 4);

        let n = fidelity_to_nearest([0.0, 0.0, 1.0], MagicFamily::H).unwrap();
        assert!((n.fidelity - H_PAULI_FIDELITY).abs() < 1e-15);
        // ties resolve to the lowest index: (1,0,1)/sqrt2 comes before (0,1,1)/sqrt2
        assert_eq!(n.index, 4);

        for fam in [MagicFamily::H, MagicFamily::T] {
            let n = fidelity_to_nearest([0.0; 3], fam).unwrap();
            assert_eq!(n.fidelity, 0.5);
            assert_eq!(n.index, 0);
        }
        assert!(matches!(
            fidelity_to_nearest([1.0, 0.1, 0.0], MagicFamily::T),
            Err(Error::NotABlochVector(_))
        ));
    }

    #[test]
    fn family_parsing() {
        assert_eq!("h".parse::<MagicFamily>().unwrap(), MagicFamily::H);
        assert_eq!("T".parse::<MagicFamily>().unwrap(), MagicFamily::T);
        assert!("X".parse::<MagicFamily>().is_err());
        assert_eq!(serde_json::to_string(&MagicFamily::T).unwrap(), "\"T\"");
    }

    #[test]
    fn vacuum_origin_is_nearest_to_xz_plane_state() {
        let e = FidelityEvaluator::new(&GaussianState::vacuum(), MagicFamily::H, LatticeKind::Square).unwrap();
        let p = e.evaluate(Outcome::new(0.0, 0.0)).unwrap();
        assert_eq!(p.nearest, Some(4));
        assert!(p.fidelity.unwrap() > H_DISTILL_THRESHOLD);
    }

    #[test]
    fn vacuum_map_clifford_symmetry() {
        let e = FidelityEvaluator::new(&GaussianState::vacuum(), MagicFamily::H, LatticeKind::Square).unwrap();
        for &(q, p) in &[(0.3, 1.1), (2.2, 0.7), (1.9, 3.0)] {
            let f = e.fidelity(Outcome::new(q, p)).unwrap();
            for t in [Outcome::new(q + SQRT_PI, p), Outcome::new(q, p + SQRT_PI), Outcome::new(p, q)] {
                assert!((e.fidelity(t).unwrap() - f).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn t_fidelity_square_below_hex_at_origin() {
        let t0 = Outcome::new(0.0, 0.0);
        let sq = FidelityEvaluator::new(&GaussianState::vacuum(), MagicFamily::T, LatticeKind::Square).unwrap();
        let hex = FidelityEvaluator::new(&GaussianState::vacuum(), MagicFamily::T, LatticeKind::Hexagonal).unwrap();
        let f_sq = sq.fidelity(t0).unwrap();
        let f_hex = hex.fidelity(t0).unwrap();
        assert!(f_sq < f_hex - 0.05, "{f_sq} vs {f_hex}");
    }

    #[test]
    fn single_point_map_is_cell_centre() {
        let map = fidelity_map(&GaussianState::vacuum(), MagicFamily::H, LatticeKind::Square, 1).unwrap();
        assert_eq!(map.points.len(), 1);
        assert!((map.points[0].t.tq - SQRT_PI).abs() < 1e-15);
        assert!((map.points[0].t.tp - SQRT_PI).abs() < 1e-15);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_min(|x| Ok((x - 0.3) * (x - 0.3) + 2.0), -1.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn success_at_half_is_total_mass() {
        let opts = SuccessOptions {
            base: 8,
            ..Default::default()
        };
        let integ = SuccessIntegrator::new(&GaussianState::vacuum(), MagicFamily::H, LatticeKind::Square, opts).unwrap();
        let e = integ.probability(0.5).unwrap();
        assert!((e.probability - 1.0).abs() < 1e-4);
        assert!(matches!(integ.probability(0.4), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn threshold_rejects_unreachable_fidelity() {
        let opts = ThresholdOptions {
            seed_grid: 8,
            ..Default::default()
        };
        assert!(matches!(
            threshold_nbar_with(MagicFamily::H, LatticeKind::Square, 0.5, opts),
            Err(Error::OutOfRange { .. })
        ));
        // vacuum reaches F = 1 at t = 0, and nothing in [0, 0.01] falls below 0.853
        let short = ThresholdOptions { nbar_max: 0.01, ..opts };
        assert!(matches!(
            threshold_nbar_with(MagicFamily::H, LatticeKind::Square, H_DISTILL_THRESHOLD, short),
            Err(Error::NoSignChange { .. })
        ));
    }
}
