//! Shannon entropies in bits.
//!
//! Both functions use the convention `0 log 0 = 0`. Arguments that drift up to
//! [`PROB_SLACK`] outside `[0, 1]` through upstream arithmetic are clamped;
//! anything further out is a domain error.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Floating-point slack accepted around `[0, 1]`.
pub const PROB_SLACK: f64 = 1e-12;

/// Tolerance on `Σ pᵢ = 1` for a distribution.
pub const NORM_TOL: f64 = 1e-9;

pub(crate) fn clamp_probability(name: &'static str, p: f64) -> Result<f64> {
    if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&p) {
        return Err(Error::domain(name, p, "must lie in [0, 1]"));
    }
    Ok(p.clamp(0.0, 1.0))
}

#[inline]
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * libm::log2(p)
    } else {
        0.0
    }
}

/// `h(p) = −p log₂ p − (1−p) log₂(1−p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    let p = clamp_probability("binary entropy argument", p)?;
    // Evaluate from the smaller side so that h(p) == h(1 - p) bit for bit.
    let p = if p > 0.5 { 1.0 - p } else { p };
    let h = -plogp(p) - plogp(1.0 - p);
    Ok(h.clamp(0.0, 1.0))
}

/// A list of probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates entries and normalization; entries within [`PROB_SLACK`] of
    /// the unit interval are clamped.
    pub fn new(entries: impl Into<Vec<f64>>) -> Result<Self> {
        let mut entries = entries.into();
        for p in entries.iter_mut() {
            *p = clamp_probability("probability entry", *p)?;
        }
        let sum: f64 = entries.iter().sum();
        if entries.is_empty() || (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(ProbabilityVector(entries))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `H(p) = −Σ pᵢ log₂ pᵢ`.
pub fn shannon_entropy(dist: &ProbabilityVector) -> f64 {
    let h: f64 = -dist.0.iter().map(|&p| plogp(p)).sum::<f64>();
    let max = libm::log2(dist.len() as f64);
    h.clamp(0.0, max)
}

/// Convenience wrapper validating a raw slice first.
pub fn shannon_entropy_of(entries: &[f64]) -> Result<f64> {
    ProbabilityVector::new(entries.to_vec()).map(|d| shannon_entropy(&d))
}

pub(crate) fn check_finite(term: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite { term })
    }
}
