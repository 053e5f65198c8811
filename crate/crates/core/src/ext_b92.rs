//! HD-Ext-B92 under a depolarizing channel.
//!
//! Alice encodes bit 0 as `|m⟩` and bit 1 as `|ψ⟩ = (|m⟩ + |n⟩)/√2`. Bob
//! records 1 for any computational outcome other than `m` and 0 for a
//! `I − |ψ⟩⟨ψ|` outcome. All quantities below are expressed through the
//! observable statistics `p_υc`, `p_υψ` so that no free attack parameters
//! remain.
//!
//! The key rate is the Devetak–Winter bound `S(a|E) − H(a|b)`, where `S(a|E)` is
//! lower-bounded blockwise over Eve's conditional states: each block `x`
//! contributes `((K⁰ₓ + K¹ₓ)/M) · [h(K⁰ₓ/(K⁰ₓ+K¹ₓ)) − h(δₓ)]`.

use core::f64::consts::FRAC_1_SQRT_2;

use alloc::format;

use crate::entropy::{binary_entropy, check_finite, shannon_entropy_of, PROB_SLACK};
use crate::{Error, Result};

/// Observed detection statistics for dimension `d` and noise `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableStats {
    pub d: u32,
    pub q: f64,
    /// `p_mm = p_nn = p_ψψ`: the sent state is detected unchanged.
    pub p_mm: f64,
    pub p_nn: f64,
    pub p_psipsi: f64,
    /// `p_mc = p_nc = p_ψc` for a computational outcome `c` other than the sent state.
    pub p_cross: f64,
    /// `p_mψ = p_nψ = p_ψm = p_ψn`.
    pub p_conf: f64,
}

/// Largest physical depolarizing parameter, `(d−1)/d`.
pub fn max_noise(d: u32) -> f64 {
    (d as f64 - 1.0) / d as f64
}

pub(crate) fn validate_dimension(d: u32) -> Result<()> {
    if d < 2 {
        return Err(Error::domain(
            "dimension d",
            d as f64,
            "must be an integer >= 2",
        ));
    }
    Ok(())
}

pub(crate) fn validate_noise(d: u32, q: f64) -> Result<()> {
    validate_dimension(d)?;
    let q_max = max_noise(d);
    if !(q >= 0.0 && q <= q_max + PROB_SLACK) {
        return Err(Error::domain(
            "noise q",
            q,
            format!("must lie in [0, (d-1)/d] = [0, {q_max}] for d = {d}"),
        ));
    }
    Ok(())
}

pub(crate) fn validate_efficiency(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::domain(
            "negotiation efficiency xi",
            xi,
            "must lie in (0, 1]",
        ));
    }
    Ok(())
}

pub fn depolarizing_stats(d: u32, q: f64) -> Result<ObservableStats> {
    validate_noise(d, q)?;
    let q = q.min(max_noise(d));
    let df = d as f64;
    let p_same = 1.0 - q;
    let p_cross = q / (df - 1.0);
    let p_conf = 0.5 * (1.0 - q * df / (df - 1.0)) + q / (df - 1.0);
    Ok(ObservableStats {
        d,
        q,
        p_mm: p_same,
        p_nn: p_same,
        p_psipsi: p_same,
        p_cross,
        p_conf,
    })
}

impl ObservableStats {
    fn p_mc(&self) -> f64 {
        self.p_cross
    }
    fn p_nc(&self) -> f64 {
        self.p_cross
    }
    fn p_psic(&self) -> f64 {
        self.p_cross
    }
    /// `p_mn`: sent `m`, observed computational outcome `n`.
    fn p_mn(&self) -> f64 {
        self.p_cross
    }
    /// `p_nm`: sent `n`, observed computational outcome `m`.
    fn p_nm(&self) -> f64 {
        self.p_cross
    }
    fn p_mpsi(&self) -> f64 {
        self.p_conf
    }
    fn p_psim(&self) -> f64 {
        self.p_conf
    }
    fn p_psin(&self) -> f64 {
        self.p_conf
    }

    /// Normalization of the conditional Alice–Eve state,
    /// `½[(1−p_mψ) + (1−p_mm) + (1−p_ψψ) + (1−p_ψm)]`.
    pub fn normalization(&self) -> f64 {
        0.5 * ((1.0 - self.p_mpsi())
            + (1.0 - self.p_mm)
            + (1.0 - self.p_psipsi)
            + (1.0 - self.p_psim()))
    }
}

/// Joint distribution of Alice's and Bob's raw bits over conclusive rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    pub m: f64,
}

impl JointDistribution {
    pub fn as_array(&self) -> [f64; 4] {
        [self.p00, self.p01, self.p10, self.p11]
    }
}

pub fn joint_distribution(stats: &ObservableStats) -> Result<JointDistribution> {
    let m = stats.normalization();
    if !(m > 0.0) {
        return Err(Error::Consistency(
            "joint distribution normalization M <= 0",
        ));
    }
    let scale = 1.0 / (2.0 * m);
    Ok(JointDistribution {
        p00: scale * (1.0 - stats.p_mpsi()),
        p01: scale * (1.0 - stats.p_mm),
        p10: scale * (1.0 - stats.p_psipsi),
        p11: scale * (1.0 - stats.p_psim()),
        m,
    })
}

/// `H(a|b) = H(p00, p01, p10, p11) − h(p00 + p10)`.
pub fn conditional_entropy_ab(joint: &JointDistribution) -> Result<f64> {
    let h_joint = shannon_entropy_of(&joint.as_array())?;
    let h_b = binary_entropy(joint.p00 + joint.p10)?;
    Ok((h_joint - h_b).max(0.0))
}

/// One block of Eve's conditional state: weights `K⁰`, `K¹` and the real part
/// of their overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockTerms {
    pub k0: f64,
    pub k1: f64,
    pub re: f64,
}

impl BlockTerms {
    /// `h(K⁰/(K⁰+K¹)) − h(δ)`, or 0 when either weight vanishes.
    pub fn entropy(&self) -> Result<f64> {
        if self.k0 <= 0.0 || self.k1 <= 0.0 {
            return Ok(0.0);
        }
        let total = self.k0 + self.k1;
        let diff = self.k0 - self.k1;
        let radicand = (diff * diff + 4.0 * self.re * self.re).max(0.0);
        let delta = 0.5 + libm::sqrt(radicand) / (2.0 * total);
        let delta = check_finite("block delta", delta)?;
        Ok(binary_entropy(self.k0 / total)? - binary_entropy(delta)?)
    }

    pub fn weight(&self) -> f64 {
        self.k0 + self.k1
    }
}

/// The three block classes entering the `S(a|E)` bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveBoundTerms {
    /// Any outcome `c ∉ {m, n}`; appears `multiplicity` times.
    pub c: BlockTerms,
    pub m: BlockTerms,
    pub n: BlockTerms,
    pub multiplicity: u32,
    pub normalization: f64,
}

pub fn eve_bound_terms(stats: &ObservableStats) -> EveBoundTerms {
    let re_c = FRAC_1_SQRT_2 * (stats.p_mc() / 2.0 + stats.p_psic() - stats.p_nc() / 2.0);
    let re_m = FRAC_1_SQRT_2 / 4.0 * (stats.p_mm / 2.0 + stats.p_psim() - stats.p_nm() / 2.0);
    let re_n = 3.0 * FRAC_1_SQRT_2 / 4.0 * (stats.p_mn() / 2.0 + stats.p_psin() - stats.p_nn / 2.0);
    EveBoundTerms {
        c: BlockTerms {
            k0: stats.p_mc(),
            k1: stats.p_psic(),
            re: re_c,
        },
        m: BlockTerms {
            k0: 0.25 * stats.p_mm,
            k1: 0.25 * stats.p_psim(),
            re: re_m,
        },
        n: BlockTerms {
            k0: 0.75 * stats.p_mn(),
            k1: 0.75 * stats.p_psin(),
            re: re_n,
        },
        multiplicity: stats.d - 2,
        normalization: stats.normalization(),
    }
}

/// Lower bound on `S(a|E)` in bits.
pub fn von_neumann_lower_bound(terms: &EveBoundTerms) -> Result<f64> {
    let m = terms.normalization;
    if !(m > 0.0) {
        return Err(Error::Consistency("Eve bound normalization M <= 0"));
    }
    let mut s = 0.0;
    if terms.multiplicity > 0 {
        s += terms.multiplicity as f64 * terms.c.weight() / m * terms.c.entropy()?;
    }
    s += terms.m.weight() / m * terms.m.entropy()?;
    s += terms.n.weight() / m * terms.n.entropy()?;
    Ok(s.max(0.0))
}

/// Key rate before the `max(0, ·)` floor and efficiency scaling.
pub fn raw_key_rate(d: u32, q: f64) -> Result<f64> {
    let stats = depolarizing_stats(d, q)?;
    let s_ae = von_neumann_lower_bound(&eve_bound_terms(&stats))?;
    let h_ab = conditional_entropy_ab(&joint_distribution(&stats)?)?;
    Ok(s_ae - h_ab)
}

/// `ξ · max(0, S(a|E) − H(a|b))`, in bits per conclusive pulse.
pub fn ext_b92_key_rate(d: u32, q: f64, xi: f64) -> Result<f64> {
    validate_efficiency(xi)?;
    Ok(xi * raw_key_rate(d, q)?.max(0.0))
}

/// Probability that Alice's and Bob's conclusive raw bits differ, `p01 + p10`.
pub fn ext_b92_qber(d: u32, q: f64) -> Result<f64> {
    let joint = joint_distribution(&depolarizing_stats(d, q)?)?;
    Ok(joint.p01 + joint.p10)
}
