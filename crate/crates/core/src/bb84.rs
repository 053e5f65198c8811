//! HD-BB84 with two mutually unbiased bases in dimension `d`.
//!
//! The rate is the entropic-uncertainty bound with the Fano estimate of the
//! Bob-side uncertainty: `r ≥ log₂ d − 2(h(q) + q log₂(d−1))`. The overlap
//! constant of the two bases is fixed at `1/d`.

use crate::entropy::binary_entropy;
use crate::ext_b92::{validate_efficiency, validate_noise};
use crate::{Error, Result};

/// Rate below which a protocol counts as producing no key.
pub const ZERO_RATE: f64 = 1e-9;

/// Absolute tolerance of the noise-tolerance bisection.
pub const TOLERANCE_ABS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bb84Params {
    d: u32,
    q: f64,
    xi: f64,
}

impl Bb84Params {
    pub fn new(d: u32, q: f64, xi: f64) -> Result<Self> {
        validate_noise(d, q)?;
        validate_efficiency(xi)?;
        Ok(Bb84Params { d, q, xi })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }
}

fn fano_term(d: u32, q: f64) -> Result<f64> {
    let leak = if d == 2 {
        0.0
    } else {
        q * libm::log2(d as f64 - 1.0)
    };
    Ok(binary_entropy(q)? + leak)
}

/// Bound before flooring at zero.
pub fn raw_key_rate(d: u32, q: f64) -> Result<f64> {
    validate_noise(d, q)?;
    Ok(libm::log2(d as f64) - 2.0 * fano_term(d, q)?)
}

/// `ξ · max(0, log₂ d − 2(h(q) + q log₂(d−1)))`, bits per sifted pulse.
pub fn bb84_key_rate(params: &Bb84Params) -> Result<f64> {
    Ok(params.xi * raw_key_rate(params.d, params.q)?.max(0.0))
}

/// Bit error probability when each `d`-ary symbol is mapped to bits with a
/// balanced labelling: a wrong symbol is uniform over the `d − 1` others and
/// flips a given bit with probability `(d/2)/(d−1)`, so `ε = q·d/(2(d−1))`.
pub fn bb84_qber(params: &Bb84Params) -> f64 {
    let d = params.d as f64;
    (params.q * d / (2.0 * (d - 1.0))).clamp(0.0, 0.5)
}

/// Smallest `q` in `[0, q_max]` with `rate(q) ≤ ZERO_RATE`, by bisection.
///
/// `rate` must be non-increasing on the interval and positive at zero.
pub fn noise_tolerance<F>(mut rate: F, q_max: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let rate_lo = rate(0.0)?;
    if !(rate_lo > ZERO_RATE) {
        return Err(Error::NoPositiveRate {
            rate_at_zero: rate_lo,
        });
    }
    let rate_hi = rate(q_max)?;
    if !(rate_hi <= ZERO_RATE) {
        return Err(Error::NotBracketed {
            lo: 0.0,
            hi: q_max,
            rate_lo,
            rate_hi,
        });
    }
    let (mut lo, mut hi) = (0.0, q_max);
    while hi - lo > TOLERANCE_ABS {
        let mid = 0.5 * (lo + hi);
        if rate(mid)? <= ZERO_RATE {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
