//! Composite Gauss–Legendre quadrature over a disc in polar coordinates.

use core::f64::consts::PI;

use alloc::vec::Vec;

use crate::{Error, Result};

/// Points per panel.
pub(crate) const ORDER: usize = 10;
pub(crate) const REL_TOL: f64 = 1e-6;
pub(crate) const ABS_TOL: f64 = 1e-14;
pub(crate) const MAX_LEVEL: u32 = 9;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of `P_n` by Newton iteration from the Tricomi initial guesses.
    pub(crate) fn new(n: usize) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
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
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped onto `n_panels` equal panels of `[a, b]`.
    fn composite(&self, a: f64, b: f64, n_panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / n_panels as f64;
        let mut xs = Vec::with_capacity(n_panels * self.nodes.len());
        let mut ws = Vec::with_capacity(xs.capacity());
        for k in 0..n_panels {
            let mid = a + (k as f64 + 0.5) * h;
            for (&x, &w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * h * x);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }

    #[cfg(test)]
    fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (xs, ws) = self.composite(a, b, 1);
        xs.iter().zip(&ws).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫₀^r ρ dρ ∫₀^{2π} dθ f(ρ, cos θ, sin θ)` with `2^level` radial and
/// `2^(level+1)` angular panels.
fn polar_level<F>(rule: &GaussLegendre, r: f64, level: u32, f: &F) -> f64
where
    F: Fn(f64, f64, f64) -> f64,
{
    let (rhos, wr) = rule.composite(0.0, r, 1 << level);
    let (thetas, wt) = rule.composite(0.0, 2.0 * PI, 1 << (level + 1));
    let trig: Vec<(f64, f64)> = thetas
        .iter()
        .map(|&t| (libm::cos(t), libm::sin(t)))
        .collect();
    let mut total = 0.0;
    for (&rho, &w_rho) in rhos.iter().zip(&wr) {
        let ring: f64 = trig
            .iter()
            .zip(&wt)
            .map(|(&(c, s), &w)| w * f(rho, c, s))
            .sum();
        total += w_rho * rho * ring;
    }
    total
}

/// Refines from `start_level` until two successive levels agree.
pub(crate) fn adaptive_polar<F>(
    rule: &GaussLegendre,
    r: f64,
    start_level: u32,
    scale: f64,
    f: F,
) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let mut level = start_level.min(MAX_LEVEL - 1);
    let mut prev = scale * polar_level(rule, r, level, &f);
    loop {
        level += 1;
        let next = scale * polar_level(rule, r, level, &f);
        let change = (next - prev).abs();
        if !next.is_finite() {
            return Err(Error::NonFinite {
                term: "aperture integral",
            });
        }
        if change <= REL_TOL * next.abs() + ABS_TOL {
            return Ok(next);
        }
        if level >= MAX_LEVEL {
            return Err(Error::QuadratureNotConverged {
                estimate: next,
                error: change,
            });
        }
        prev = next;
    }
}
