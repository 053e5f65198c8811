//! Transmittance of an elliptic beam through a circular aperture, its Monte
//! Carlo distribution over the channel, and the resulting key rates.
//!
//! Sample `i` of a run with seed `s` draws from ChaCha8 seeded with `s` on
//! stream `i`, so any sample can be regenerated alone and samples can be
//! evaluated in any order. Samples are grouped in chunks of [`CHUNK`];
//! chunk accumulators merge in chunk order, which keeps floating-point sums
//! identical however the chunks were scheduled.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::atmosphere::{
    beam_moments, extinction_factor, sample_beam_vector, theta_law, BeamVector, ChannelScene,
    ThetaLawParams,
};
use crate::entropy::NORM_TOL;
use crate::quadrature::{adaptive_polar, GaussLegendre, ORDER};
use crate::{Error, Protocol, Result};

/// Samples per accumulation chunk.
pub const CHUNK: u64 = 1024;

pub const DEFAULT_BINS: usize = 100;

fn validate_chi(chi_ext: f64) -> Result<()> {
    if !(chi_ext > 0.0 && chi_ext <= 1.0) {
        return Err(Error::domain(
            "extinction factor chi_ext",
            chi_ext,
            "must lie in (0, 1]",
        ));
    }
    Ok(())
}

/// First refinement level whose panels are no wider than twice the smaller
/// beam width, so a narrow beam cannot slip between nodes.
fn start_level(r_ap: f64, w_min: f64) -> u32 {
    let panel = 2.0 * w_min;
    let mut level = 0;
    while level < 16
        && (r_ap / (1u64 << level) as f64 > panel
            || core::f64::consts::PI * r_ap / (1u64 << level) as f64 > panel)
    {
        level += 1;
    }
    level
}

fn transmittance_with(
    rule: &GaussLegendre,
    beam: &BeamVector,
    r_ap: f64,
    chi_ext: f64,
) -> Result<f64> {
    let (w1, w2) = (beam.w1, beam.w2);
    for (name, w) in [("beam width W1", w1), ("beam width W2", w2)] {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::domain(name, w, "must be finite and > 0"));
        }
    }
    if !(r_ap > 0.0) || !r_ap.is_finite() {
        return Err(Error::domain(
            "aperture radius r_ap",
            r_ap,
            "must be finite and > 0",
        ));
    }
    validate_chi(chi_ext)?;
    let rho0 = beam.centroid_distance();
    if !rho0.is_finite() {
        return Err(Error::NonFinite {
            term: "beam centroid",
        });
    }
    let (sin_psi, cos_psi) = libm::sincos(beam.phi_rel);
    let (iw1, iw2) = (1.0 / (w1 * w1), 1.0 / (w2 * w2));
    let a1 = cos_psi * cos_psi * iw1 + sin_psi * sin_psi * iw2;
    let a2 = sin_psi * sin_psi * iw1 + cos_psi * cos_psi * iw2;
    let a3 = (iw1 - iw2) * 2.0 * sin_psi * cos_psi;

    let scale = 2.0 * chi_ext / (core::f64::consts::PI * w1 * w2);
    let level = start_level(r_ap, w1.min(w2));
    let eta = adaptive_polar(rule, r_ap, level, scale, |rho, c, s| {
        let x = rho * c - rho0;
        let y = rho * s;
        libm::exp(-2.0 * (a1 * x * x + a2 * y * y + a3 * x * y))
    })?;
    Ok(eta.clamp(0.0, chi_ext))
}

/// Fraction of an elliptic Gaussian beam collected by a centred circular
/// aperture of radius `r_ap`, scaled by `chi_ext`.
pub fn aperture_transmittance(beam: &BeamVector, r_ap: f64, chi_ext: f64) -> Result<f64> {
    transmittance_with(&GaussLegendre::new(ORDER), beam, r_ap, chi_ext)
}

/// RNG for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Everything needed to draw and evaluate samples for one scene.
#[derive(Debug, Clone)]
pub struct LinkSampler {
    law: ThetaLawParams,
    var_centroid: f64,
    r_ap: f64,
    chi_ext: f64,
    rule: GaussLegendre,
}

impl LinkSampler {
    pub fn new(scene: &ChannelScene) -> Result<Self> {
        let moments = beam_moments(scene)?;
        Ok(LinkSampler {
            law: theta_law(&moments)?,
            var_centroid: moments.var_centroid,
            r_ap: scene.r_ap,
            chi_ext: extinction_factor(scene.zenith, scene.beta)?,
            rule: GaussLegendre::new(ORDER),
        })
    }

    pub fn chi_ext(&self) -> f64 {
        self.chi_ext
    }

    pub fn theta_law(&self) -> &ThetaLawParams {
        &self.law
    }

    pub fn var_centroid(&self) -> f64 {
        self.var_centroid
    }

    pub fn beam(&self, seed: u64, index: u64) -> BeamVector {
        sample_beam_vector(&self.law, self.var_centroid, &mut sample_rng(seed, index))
    }

    /// `η` of sample `index`; failures carry the index.
    pub fn transmittance(&self, seed: u64, index: u64) -> Result<f64> {
        let beam = self.beam(seed, index);
        transmittance_with(&self.rule, &beam, self.r_ap, self.chi_ext).map_err(|e| Error::Sample {
            index,
            source: alloc::boxed::Box::new(e),
        })
    }

    /// Histogram of samples `range`.
    pub fn pdt_chunk(&self, seed: u64, n_bins: usize, range: Range<u64>) -> Result<PdtAccumulator> {
        let mut acc = PdtAccumulator::new(n_bins)?;
        for i in range {
            acc.push(self.transmittance(seed, i)?);
        }
        Ok(acc)
    }

    /// Rounded-rate counts of samples `range`.
    pub fn pdr_chunk(
        &self,
        seed: u64,
        rate: f64,
        decimals: u32,
        range: Range<u64>,
    ) -> Result<RateAccumulator> {
        let mut acc = RateAccumulator::new(decimals);
        for i in range {
            acc.push(self.transmittance(seed, i)? * rate);
        }
        Ok(acc)
    }
}

/// Chunk boundaries for `n_samples`.
pub fn chunks(n_samples: u64) -> impl Iterator<Item = Range<u64>> + Clone {
    (0..n_samples.div_ceil(CHUNK)).map(move |k| k * CHUNK..((k + 1) * CHUNK).min(n_samples))
}

/// Equal-width histogram of `η` over `[0, 1]` with per-bin sums.
#[derive(Debug, Clone, PartialEq)]
pub struct PdtAccumulator {
    counts: Vec<u64>,
    sums: Vec<f64>,
}

impl PdtAccumulator {
    pub fn new(n_bins: usize) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::domain("n_bins", 0.0, "must be >= 1"));
        }
        Ok(PdtAccumulator {
            counts: alloc::vec![0; n_bins],
            sums: alloc::vec![0.0; n_bins],
        })
    }

    pub fn bin_index(&self, eta: f64) -> usize {
        let n = self.counts.len();
        ((eta * n as f64) as usize).min(n - 1)
    }

    pub fn push(&mut self, eta: f64) {
        let i = self.bin_index(eta);
        self.counts[i] += 1;
        self.sums[i] += eta;
    }

    /// Adds `other`'s samples; callers merge in a fixed order.
    pub fn merge(&mut self, other: &PdtAccumulator) {
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        for (s, o) in self.sums.iter_mut().zip(&other.sums) {
            *s += o;
        }
    }

    pub fn n_samples(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn finish(self, seed: u64, chi_ext: f64) -> Result<TransmittanceDistribution> {
        let n = self.n_samples();
        if n == 0 {
            return Err(Error::domain("n_samples", 0.0, "must be >= 1"));
        }
        let n_bins = self.counts.len();
        let width = 1.0 / n_bins as f64;
        let bin_centers: Vec<f64> = (0..n_bins).map(|i| (i as f64 + 0.5) * width).collect();
        let bin_means = self
            .counts
            .iter()
            .zip(&self.sums)
            .zip(&bin_centers)
            .map(|((&c, &s), &mid)| if c > 0 { s / c as f64 } else { mid })
            .collect();
        let probabilities = self.counts.iter().map(|&c| c as f64 / n as f64).collect();
        let mean_eta = self.sums.iter().sum::<f64>() / n as f64;
        Ok(TransmittanceDistribution {
            bin_centers,
            bin_means,
            probabilities,
            n_samples: n,
            n_bins,
            seed,
            chi_ext,
            mean_eta,
        })
    }
}

/// Probability distribution of the transmittance.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmittanceDistribution {
    pub bin_centers: Vec<f64>,
    /// Average `η` of the samples in each bin; the centre for empty bins.
    pub bin_means: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub n_samples: u64,
    pub n_bins: usize,
    pub seed: u64,
    pub chi_ext: f64,
    pub mean_eta: f64,
}

impl TransmittanceDistribution {
    /// All mass at `eta`.
    pub fn point_mass(eta: f64, n_bins: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::domain("eta", eta, "must lie in [0, 1]"));
        }
        let mut acc = PdtAccumulator::new(n_bins)?;
        acc.push(eta);
        acc.finish(0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.probabilities.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        let lens = [
            self.bin_centers.len(),
            self.bin_means.len(),
            self.probabilities.len(),
        ];
        if lens.iter().any(|&l| l != self.n_bins) {
            return Err(Error::Consistency(
                "PDT vectors differ in length from n_bins",
            ));
        }
        if self
            .bin_centers
            .iter()
            .chain(&self.bin_means)
            .any(|x| !(0.0..=1.0).contains(x))
        {
            return Err(Error::Consistency("PDT bin value outside [0, 1]"));
        }
        Ok(())
    }

    /// `Σ η_i P(η_i)`.
    pub fn expected_eta(&self) -> f64 {
        self.bin_means
            .iter()
            .zip(&self.probabilities)
            .map(|(e, p)| e * p)
            .sum()
    }

    pub fn occupied_bins(&self) -> usize {
        self.probabilities.iter().filter(|&&p| p > 0.0).count()
    }
}

/// Runs chunks sequentially; parallel callers must reproduce this merge order.
pub fn estimate_pdt(
    scene: &ChannelScene,
    n_samples: u64,
    n_bins: usize,
    seed: u64,
) -> Result<TransmittanceDistribution> {
    if n_samples == 0 {
        return Err(Error::domain("n_samples", 0.0, "must be >= 1"));
    }
    let sampler = LinkSampler::new(scene)?;
    let mut acc = PdtAccumulator::new(n_bins)?;
    for range in chunks(n_samples) {
        acc.merge(&sampler.pdt_chunk(seed, n_bins, range)?);
    }
    acc.finish(seed, sampler.chi_ext())
}

/// `Σ η_i R_protocol P(η_i)` with `η_i` the bin means.
pub fn average_key_rate(
    pdt: &TransmittanceDistribution,
    protocol: Protocol,
    d: u32,
    q: f64,
    xi: f64,
) -> Result<f64> {
    pdt.validate()?;
    Ok(pdt.expected_eta() * protocol.key_rate(d, q, xi)?)
}

/// Counts of rates rounded to a fixed number of decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct RateAccumulator {
    decimals: u32,
    counts: BTreeMap<i64, u64>,
}

impl RateAccumulator {
    pub fn new(decimals: u32) -> Self {
        RateAccumulator {
            decimals,
            counts: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, rate: f64) {
        let key = libm::round(rate * libm::pow(10.0, self.decimals as f64)) as i64;
        *self.counts.entry(key).or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: &RateAccumulator) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
    }

    pub fn finish(self) -> Result<RateDistribution> {
        let n: u64 = self.counts.values().sum();
        if n == 0 {
            return Err(Error::domain("n_samples", 0.0, "must be >= 1"));
        }
        let scale = libm::pow(10.0, self.decimals as f64);
        Ok(RateDistribution {
            rate_values: self.counts.keys().map(|&k| k as f64 / scale).collect(),
            probabilities: self.counts.values().map(|&c| c as f64 / n as f64).collect(),
            rounding_decimals: self.decimals,
        })
    }
}

/// Distribution of the per-sample key rate, ascending in rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateDistribution {
    pub rate_values: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub rounding_decimals: u32,
}

impl RateDistribution {
    pub fn max_rate(&self) -> f64 {
        self.rate_values.last().copied().unwrap_or(0.0)
    }

    pub fn peak_probability(&self) -> f64 {
        self.probabilities.iter().copied().fold(0.0, f64::max)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn key_rate_distribution(
    scene: &ChannelScene,
    protocol: Protocol,
    d: u32,
    q: f64,
    xi: f64,
    n_samples: u64,
    rounding_decimals: u32,
    seed: u64,
) -> Result<RateDistribution> {
    if n_samples == 0 {
        return Err(Error::domain("n_samples", 0.0, "must be >= 1"));
    }
    let rate = protocol.key_rate(d, q, xi)?;
    let sampler = LinkSampler::new(scene)?;
    let mut acc = RateAccumulator::new(rounding_decimals);
    for range in chunks(n_samples) {
        acc.merge(&sampler.pdr_chunk(seed, rate, rounding_decimals, range)?);
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atmosphere::{Direction, PointingModel, Weather};
    use core::f64::consts::FRAC_PI_2;
    use proptest::prelude::*;

    fn beam(rho0: f64, w1: f64, w2: f64, phi_rel: f64) -> BeamVector {
        BeamVector {
            x0: rho0,
            y0: 0.0,
            w1,
            w2,
            phi_rel,
        }
    }

    #[test]
    fn centred_circular_example() {
        let eta = aperture_transmittance(&beam(0.0, 1.0, 1.0, 0.0), 1.0, 1.0).unwrap();
        assert!((eta - 0.864_664_716_763_387_3).abs() < 1e-12);
    }

    #[test]
    fn full_capture_and_miss() {
        let eta = aperture_transmittance(&beam(0.0, 0.3, 0.2, 0.4), 3.0, 0.7).unwrap();
        assert!((eta - 0.7).abs() < 1e-9);
        let eta = aperture_transmittance(&beam(10.0, 0.5, 0.5, 0.0), 0.5, 1.0).unwrap();
        assert!(eta < 1e-10);
    }

    #[test]
    fn narrow_off_axis_beam_is_resolved() {
        let b = BeamVector {
            x0: 0.3,
            y0: -0.2,
            w1: 0.01,
            w2: 0.02,
            phi_rel: 0.3,
        };
        let eta = aperture_transmittance(&b, 1.0, 1.0).unwrap();
        assert!((eta - 1.0).abs() < 1e-9, "{eta}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(aperture_transmittance(&beam(0.0, 0.0, 1.0, 0.0), 1.0, 1.0).is_err());
        assert!(aperture_transmittance(&beam(0.0, 1.0, 1.0, 0.0), -1.0, 1.0).is_err());
        assert!(aperture_transmittance(&beam(0.0, 1.0, 1.0, 0.0), 1.0, 0.0).is_err());
        assert!(aperture_transmittance(&beam(0.0, 1.0, 1.0, 0.0), 1.0, 1.5).is_err());
    }

    #[test]
    fn monotone_in_centroid_distance() {
        for (w, r) in [(0.3, 0.5), (1.0, 0.5), (2.0, 0.15)] {
            let mut prev = f64::INFINITY;
            for i in 0..60 {
                let eta =
                    aperture_transmittance(&beam(i as f64 * 0.05, w, w, 0.0), r, 1.0).unwrap();
                assert!(eta <= prev + 1e-12);
                prev = eta;
            }
        }
    }

    #[test]
    fn deterministic_beam_gives_single_bin() {
        let mut scene = ChannelScene::reference(Direction::DownLink, Weather::Day1)
            .with_pointing(PointingModel::Off);
        scene.cn2 = 0.0;
        scene.n0 = 0.0;
        let pdt = estimate_pdt(&scene, 300, 100, 5).unwrap();
        assert_eq!(pdt.occupied_bins(), 1);
        assert_eq!(pdt.probabilities.iter().copied().fold(0.0, f64::max), 1.0);
        let pdr = key_rate_distribution(&scene, Protocol::Bb84, 2, 0.0, 1.0, 300, 5, 5).unwrap();
        assert_eq!(pdr.probabilities, [1.0]);
    }

    #[test]
    fn point_mass_rates() {
        let one = TransmittanceDistribution::point_mass(1.0, 100).unwrap();
        assert_eq!(
            average_key_rate(&one, Protocol::Bb84, 2, 0.0, 1.0).unwrap(),
            1.0
        );
        let half = TransmittanceDistribution::point_mass(0.5, 100).unwrap();
        assert_eq!(
            average_key_rate(&half, Protocol::Bb84, 2, 0.0, 1.0).unwrap(),
            0.5
        );
    }

    #[test]
    fn binning_edges() {
        let mut acc = PdtAccumulator::new(4).unwrap();
        for eta in [0.0, 0.2499, 0.25, 0.99, 1.0] {
            acc.push(eta);
        }
        assert_eq!(acc.counts, [2, 1, 0, 2]);
        assert!(PdtAccumulator::new(0).is_err());
    }

    #[test]
    fn pdt_is_normalized_and_chunk_stable() {
        let scene = ChannelScene::reference(Direction::UpLink, Weather::Day2).with_zenith_deg(20.0);
        let pdt = estimate_pdt(&scene, 2500, 50, 9).unwrap();
        pdt.validate().unwrap();
        assert_eq!(pdt.n_samples, 2500);
        assert!((pdt.expected_eta() - pdt.mean_eta).abs() < 1e-12);

        let sampler = LinkSampler::new(&scene).unwrap();
        let mut reversed = PdtAccumulator::new(50).unwrap();
        for r in chunks(2500).collect::<Vec<_>>().into_iter().rev() {
            reversed.merge(&sampler.pdt_chunk(9, 50, r).unwrap());
        }
        let reversed = reversed.finish(9, sampler.chi_ext()).unwrap();
        assert_eq!(reversed.probabilities, pdt.probabilities);
        assert!((reversed.mean_eta - pdt.mean_eta).abs() < 1e-12);
    }

    #[test]
    fn samples_are_individually_reproducible() {
        let scene = ChannelScene::reference(Direction::DownLink, Weather::Night2);
        let sampler = LinkSampler::new(&scene).unwrap();
        let a = sampler.transmittance(77, 1234).unwrap();
        let b = LinkSampler::new(&scene)
            .unwrap()
            .transmittance(77, 1234)
            .unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_ne!(sampler.beam(77, 1), sampler.beam(77, 2));
    }

    #[test]
    fn average_rate_linear_in_xi_and_bounded() {
        let scene = ChannelScene::reference(Direction::DownLink, Weather::Day1);
        let pdt = estimate_pdt(&scene, 500, 100, 1).unwrap();
        for p in Protocol::ALL {
            let full = average_key_rate(&pdt, p, 8, 0.01, 1.0).unwrap();
            let half = average_key_rate(&pdt, p, 8, 0.01, 0.5).unwrap();
            assert!((half - 0.5 * full).abs() < 1e-15);
            assert!(full <= pdt.chi_ext * p.key_rate(8, 0.01, 1.0).unwrap());
        }
    }

    #[test]
    fn rate_accumulator_rounds() {
        let mut acc = RateAccumulator::new(2);
        for r in [0.123, 0.1249, 0.126, 0.5] {
            acc.push(r);
        }
        let mut other = RateAccumulator::new(2);
        other.push(0.5);
        acc.merge(&other);
        let dist = acc.finish().unwrap();
        assert_eq!(dist.rate_values, [0.12, 0.13, 0.5]);
        assert_eq!(dist.probabilities, [0.4, 0.2, 0.4]);
        assert_eq!(dist.max_rate(), 0.5);
        assert_eq!(dist.peak_probability(), 0.4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ellipse_swap_symmetry(
            rho0 in 0.0f64..1.5,
            w1 in 0.1f64..2.0,
            w2 in 0.1f64..2.0,
            psi in 0.0f64..FRAC_PI_2,
            r in 0.1f64..1.0,
        ) {
            let a = aperture_transmittance(&beam(rho0, w1, w2, psi), r, 1.0).unwrap();
            let b = aperture_transmittance(&beam(rho0, w2, w1, FRAC_PI_2 - psi), r, 1.0).unwrap();
            prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
        }

        #[test]
        fn bounded_by_extinction(
            x0 in -1.0f64..1.0,
            y0 in -1.0f64..1.0,
            w1 in 0.05f64..3.0,
            w2 in 0.05f64..3.0,
            psi in 0.0f64..FRAC_PI_2,
            chi in 0.01f64..1.0,
        ) {
            let b = BeamVector { x0, y0, w1, w2, phi_rel: psi };
            let eta = aperture_transmittance(&b, 0.5, chi).unwrap();
            prop_assert!((0.0..=chi).contains(&eta));
        }
    }
}
