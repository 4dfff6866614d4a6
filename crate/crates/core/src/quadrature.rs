//! Gauss-Legendre rules and adaptive dyadic integration over rectangles.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gkp::CELL_SIDE;
use crate::truncation::CompensatedSum;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes from Newton iteration on `P_n`, starting at the Chebyshev guesses.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be at least 1");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(x, w)` pairs mapped onto `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    /// Tensor-product rule on a rectangle: `(x, y, w)` triples.
    pub fn on_rect(&self, rect: Rect) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.order() * self.order());
        for (x, wx) in self.on(rect.x0, rect.x1) {
            for (y, wy) in self.on(rect.y0, rect.y1) {
                out.push((x, y, wx * wy));
            }
        }
        out
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    /// The canonical outcome cell `[0, 2 sqrt(pi))^2`.
    pub fn unit_cell() -> Self {
        Self::new(0.0, CELL_SIDE, 0.0, CELL_SIDE)
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// The four dyadic children.
    pub fn quadrants(&self) -> [Rect; 4] {
        let xm = 0.5 * (self.x0 + self.x1);
        let ym = 0.5 * (self.y0 + self.y1);
        [
            Rect::new(self.x0, xm, self.y0, ym),
            Rect::new(xm, self.x1, self.y0, ym),
            Rect::new(self.x0, xm, ym, self.y1),
            Rect::new(xm, self.x1, ym, self.y1),
        ]
    }

    /// Split into an `n x n` grid, row-major in `y`.
    pub fn grid(&self, n: usize) -> Vec<Rect> {
        let dx = (self.x1 - self.x0) / n as f64;
        let dy = (self.y1 - self.y0) / n as f64;
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                out.push(Rect::new(
                    self.x0 + i as f64 * dx,
                    self.x0 + (i + 1) as f64 * dx,
                    self.y0 + j as f64 * dy,
                    self.y0 + (j + 1) as f64 * dy,
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of `|fine - coarse|` over accepted cells.
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub order: usize,
    /// Absolute tolerance on the change under one refinement, shared over cells by area.
    pub tol: f64,
    pub base: usize,
    pub max_level: u32,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            order: 8,
            tol: 1e-7,
            base: 4,
            max_level: 12,
        }
    }
}

/// Integrate `f` over `rect` by adaptive dyadic subdivision, accepting a
/// cell once splitting it changes its integral by less than its area share of `tol`.
pub fn integrate_adaptive<F>(f: F, rect: Rect, opts: &AdaptiveOptions) -> Result<Integral>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidTolerance(opts.tol));
    }
    let rule = GaussLegendre::new(opts.order);
    let total_area = rect.area();
    let cells = rect.grid(opts.base.max(1));
    let parts: Vec<Result<Integral>> = cells
        .par_iter()
        .map(|cell| {
            let coarse = apply(&rule, &f, *cell)?;
            refine(&rule, &f, *cell, coarse, 0, total_area, opts)
        })
        .collect();
    let mut value = CompensatedSum::default();
    let mut error_estimate = 0.0;
    let mut evaluations = 0;
    for part in parts {
        let part = part?;
        value.add(part.value);
        error_estimate += part.error_estimate;
        evaluations += part.evaluations + rule.order() * rule.order();
    }
    Ok(Integral {
        value: value.value(),
        error_estimate,
        evaluations,
    })
}

fn apply<F>(rule: &GaussLegendre, f: &F, rect: Rect) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let mut acc = CompensatedSum::default();
    for (x, y, w) in rule.on_rect(rect) {
        acc.add(w * f(x, y)?);
    }
    Ok(acc.value())
}

fn refine<F>(
    rule: &GaussLegendre,
    f: &F,
    rect: Rect,
    coarse: f64,
    level: u32,
    total_area: f64,
    opts: &AdaptiveOptions,
) -> Result<Integral>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let children = rect.quadrants();
    let mut child_values = [0.0; 4];
    for (slot, child) in child_values.iter_mut().zip(children) {
        *slot = apply(rule, f, child)?;
    }
    let fine: f64 = child_values.iter().sum();
    let mut evaluations = 4 * rule.order() * rule.order();
    let change = (fine - coarse).abs();
    if change <= opts.tol * rect.area() / total_area {
        return Ok(Integral {
            value: fine,
            error_estimate: change,
            evaluations,
        });
    }
    if level >= opts.max_level {
        return Err(Error::QuadratureNonConvergence(format!(
            "cell [{}, {}] x [{}, {}] still changes by {change:e} at level {level}",
            rect.x0, rect.x1, rect.y0, rect.y1
        )));
    }
    let mut value = CompensatedSum::default();
    let mut error_estimate = 0.0;
    for (child, child_coarse) in children.into_iter().zip(child_values) {
        let part = refine(rule, f, child, child_coarse, level + 1, total_area, opts)?;
        value.add(part.value);
        error_estimate += part.error_estimate;
        evaluations += part.evaluations;
    }
    Ok(Integral {
        value: value.value(),
        error_estimate,
        evaluations,
    })
}
