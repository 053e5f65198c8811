//! Satellite link geometry, weather presets and the statistics of the received
//! elliptic beam.
//!
//! The atmosphere is a uniform slab of thickness `h̄` below vacuum up to the
//! satellite altitude `L̄`. Along a slant path at zenith angle `φ` the total
//! link length is `L = L̄ sec φ` and the in-atmosphere length `h = h̄ sec φ`.
//! Turbulence (`C_n²`) and scattering (`n₀`) act only inside the slab, which
//! sits at the start of the path for an up-link and at its end for a
//! down-link.

use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;
use core::str::FromStr;

use alloc::format;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::entropy::check_finite;
use crate::{Error, Result};

/// Largest zenith angle for which the slab model is used (80°).
pub const MAX_ZENITH: f64 = 80.0 * PI / 180.0;
const ZENITH_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Ground to satellite.
    UpLink,
    /// Satellite to ground.
    DownLink,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::UpLink => "up-link",
            Direction::DownLink => "down-link",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "up-link" | "uplink" | "up" => Ok(Direction::UpLink),
            "down-link" | "downlink" | "down" => Ok(Direction::DownLink),
            _ => Err(Error::UnknownName {
                kind: "direction",
                name: s.into(),
                valid: "up-link, down-link",
            }),
        }
    }
}

/// How the down-link centroid variance is derived from the pointing error `α`.
///
/// The up-link ignores this: there the wander comes from turbulence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PointingModel {
    /// No centroid wander.
    Off,
    /// `⟨x₀²⟩ = (αL)²`.
    #[default]
    AlphaLSquared,
    /// `⟨x₀²⟩ = α²L`.
    AlphaSqL,
    /// `⟨x₀²⟩ = αL`, the bare number read as m².
    LiteralAlphaL,
}

impl PointingModel {
    pub const ALL: [PointingModel; 4] = [
        PointingModel::Off,
        PointingModel::AlphaLSquared,
        PointingModel::AlphaSqL,
        PointingModel::LiteralAlphaL,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PointingModel::Off => "off",
            PointingModel::AlphaLSquared => "alpha_L_squared",
            PointingModel::AlphaSqL => "alpha_sq_L",
            PointingModel::LiteralAlphaL => "literal_alpha_L",
        }
    }

    fn centroid_variance(self, alpha: f64, length: f64) -> f64 {
        match self {
            PointingModel::Off => 0.0,
            PointingModel::AlphaLSquared => alpha * length * alpha * length,
            PointingModel::AlphaSqL => alpha * alpha * length,
            PointingModel::LiteralAlphaL => alpha * length,
        }
    }
}

impl FromStr for PointingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PointingModel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "pointing model",
                name: s.into(),
                valid: "off, alpha_L_squared, alpha_sq_L, literal_alpha_L",
            })
    }
}

/// Weather conditions with their turbulence strength and particle density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weather {
    /// Not windy.
    Day1,
    /// Moderately windy.
    Day2,
    /// Windy.
    Day3,
    /// Clear.
    Night1,
    /// Slightly foggy.
    Night2,
    /// Moderately foggy.
    Night3,
}

impl Weather {
    pub const ALL: [Weather; 6] = [
        Weather::Day1,
        Weather::Day2,
        Weather::Day3,
        Weather::Night1,
        Weather::Night2,
        Weather::Night3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Weather::Day1 => "day1",
            Weather::Day2 => "day2",
            Weather::Day3 => "day3",
            Weather::Night1 => "night1",
            Weather::Night2 => "night2",
            Weather::Night3 => "night3",
        }
    }

    /// Refractive-index structure constant, m^(−2/3).
    pub fn cn2(self) -> f64 {
        match self {
            Weather::Night1 => 1.12e-16,
            Weather::Day1 => 1.64e-16,
            Weather::Night2 => 5.50e-16,
            Weather::Day2 => 8.00e-16,
            Weather::Night3 => 1.10e-15,
            Weather::Day3 => 1.60e-15,
        }
    }

    /// Scattering particle density, m⁻³.
    pub fn n0(self) -> f64 {
        match self {
            Weather::Night1 => 0.61,
            Weather::Day1 => 0.01,
            Weather::Night2 => 3.00,
            Weather::Day2 => 0.05,
            Weather::Night3 => 6.10,
            Weather::Day3 => 0.10,
        }
    }
}

impl fmt::Display for Weather {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Weather {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Weather::ALL
            .into_iter()
            .find(|w| w.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "weather preset",
                name: s.into(),
                valid: "day1, day2, day3, night1, night2, night3",
            })
    }
}

/// `(C_n², n₀)` for a named preset.
pub fn weather_preset(name: &str) -> Result<(f64, f64)> {
    let w: Weather = name.parse()?;
    Ok((w.cn2(), w.n0()))
}

/// Full description of one link configuration. Lengths in metres, angles in
/// radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelScene {
    pub direction: Direction,
    /// Satellite altitude `L̄`.
    pub l_bar: f64,
    /// Atmosphere thickness `h̄`.
    pub h_bar: f64,
    pub zenith: f64,
    pub wavelength: f64,
    /// Transmitter beam-spot radius `W₀`.
    pub w0: f64,
    /// Receiver aperture radius.
    pub r_ap: f64,
    /// Angular pointing error.
    pub alpha: f64,
    /// Extinction parameter.
    pub beta: f64,
    pub cn2: f64,
    pub n0: f64,
    pub pointing_model: PointingModel,
}

impl ChannelScene {
    pub const DEFAULT_L_BAR: f64 = 500e3;
    pub const DEFAULT_H_BAR: f64 = 20e3;
    pub const DEFAULT_WAVELENGTH: f64 = 785e-9;
    pub const DEFAULT_ALPHA: f64 = 2e-6;
    pub const DEFAULT_BETA: f64 = 0.7;

    /// The reference optics for a direction (satellite telescope 15 cm, ground
    /// telescope 50 cm) with the given weather, at zenith.
    pub fn reference(direction: Direction, weather: Weather) -> Self {
        let (w0, r_ap) = match direction {
            Direction::DownLink => (0.15, 0.5),
            Direction::UpLink => (0.5, 0.15),
        };
        ChannelScene {
            direction,
            l_bar: Self::DEFAULT_L_BAR,
            h_bar: Self::DEFAULT_H_BAR,
            zenith: 0.0,
            wavelength: Self::DEFAULT_WAVELENGTH,
            w0,
            r_ap,
            alpha: Self::DEFAULT_ALPHA,
            beta: Self::DEFAULT_BETA,
            cn2: weather.cn2(),
            n0: weather.n0(),
            pointing_model: PointingModel::default(),
        }
    }

    pub fn with_zenith(mut self, zenith: f64) -> Self {
        self.zenith = zenith;
        self
    }

    pub fn with_zenith_deg(self, deg: f64) -> Self {
        self.with_zenith(deg.to_radians())
    }

    pub fn with_pointing(mut self, model: PointingModel) -> Self {
        self.pointing_model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_bar > 0.0) {
            return Err(Error::domain(
                "atmosphere thickness h_bar",
                self.h_bar,
                "must be > 0",
            ));
        }
        if !(self.l_bar > self.h_bar) {
            return Err(Error::domain(
                "satellite altitude L_bar",
                self.l_bar,
                format!("must exceed h_bar = {}", self.h_bar),
            ));
        }
        validate_zenith(self.zenith)?;
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("W0", self.w0),
            ("r_ap", self.r_ap),
            ("alpha", self.alpha),
            ("beta", self.beta),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(name, v, "must be finite and > 0"));
            }
        }
        for (name, v) in [("Cn2", self.cn2), ("n0", self.n0)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(name, v, "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    /// `(L, h)` for this scene.
    pub fn geometry(&self) -> Result<(f64, f64)> {
        link_geometry(self.l_bar, self.h_bar, self.zenith)
    }
}

fn validate_zenith(zenith: f64) -> Result<()> {
    if !(0.0..=MAX_ZENITH + ZENITH_SLACK).contains(&zenith) {
        return Err(Error::domain(
            "zenith angle (rad)",
            zenith,
            "must lie in [0°, 80°], the validity range of the slab model",
        ));
    }
    Ok(())
}

/// Slant lengths `(L, h) = (L̄ sec φ, h̄ sec φ)`.
pub fn link_geometry(l_bar: f64, h_bar: f64, zenith: f64) -> Result<(f64, f64)> {
    validate_zenith(zenith)?;
    let sec = 1.0 / libm::cos(zenith);
    Ok((l_bar * sec, h_bar * sec))
}

/// Wavenumber, Fresnel number and Rytov variance of a scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedOptics {
    pub wavenumber: f64,
    pub fresnel: f64,
    pub rytov_variance: f64,
}

pub fn derived_optics(scene: &ChannelScene) -> Result<DerivedOptics> {
    scene.validate()?;
    let (length, _) = scene.geometry()?;
    let k = 2.0 * PI / scene.wavelength;
    let fresnel = k * scene.w0 * scene.w0 / (2.0 * length);
    let rytov_variance = 1.23 * scene.cn2 * libm::pow(k, 7.0 / 6.0) * libm::pow(length, 11.0 / 6.0);
    Ok(DerivedOptics {
        wavenumber: check_finite("wavenumber", k)?,
        fresnel: check_finite("Fresnel number", fresnel)?,
        rytov_variance: check_finite("Rytov variance", rytov_variance)?,
    })
}

/// Transmissivity lost to absorption and back-scattering, `exp(−β sec φ)`.
pub fn extinction_factor(zenith: f64, beta: f64) -> Result<f64> {
    validate_zenith(zenith)?;
    if !(beta >= 0.0) {
        return Err(Error::domain(
            "extinction parameter beta",
            beta,
            "must be >= 0",
        ));
    }
    Ok(libm::exp(-beta / libm::cos(zenith)))
}

/// First and second moments of the received beam parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamMoments {
    /// `⟨x₀²⟩ = ⟨y₀²⟩`, m².
    pub var_centroid: f64,
    /// `⟨W₁²⟩ = ⟨W₂²⟩`, m².
    pub mean_w2: f64,
    /// `⟨ΔWᵢ² ΔWⱼ²⟩`, m⁴.
    pub cov_w2: [[f64; 2]; 2],
    pub w0: f64,
}

pub fn beam_moments(scene: &ChannelScene) -> Result<BeamMoments> {
    let optics = derived_optics(scene)?;
    let (length, h) = scene.geometry()?;
    let ratio = h / length;
    let w0_sq = scene.w0 * scene.w0;
    let omega = optics.fresnel;
    let sigma2 = optics.rytov_variance;
    let diffraction = w0_sq / (omega * omega);
    let cov_scale = w0_sq * w0_sq / libm::pow(omega, 19.0 / 6.0);

    let (var_centroid, mean_w2, s) = match scene.direction {
        Direction::UpLink => {
            let scatter = 1.0 + PI / 8.0 * length * scene.n0 * w0_sq * ratio;
            let var_centroid = 0.419 * sigma2 * w0_sq * libm::pow(omega, -7.0 / 6.0) * ratio;
            let mean_w2 =
                diffraction * (scatter + 2.6 * sigma2 * libm::pow(omega, 5.0 / 6.0) * ratio);
            let s = cov_scale * scatter * sigma2 * ratio;
            (var_centroid, mean_w2, s)
        }
        Direction::DownLink => {
            let scatter = 1.0 + PI / 24.0 * length * scene.n0 * w0_sq * ratio * ratio * ratio;
            let turb = libm::pow(ratio, 8.0 / 3.0);
            let var_centroid = scene.pointing_model.centroid_variance(scene.alpha, length);
            let mean_w2 =
                diffraction * (scatter + 1.6 * sigma2 * libm::pow(omega, 5.0 / 6.0) * turb);
            let s = 3.0 / 8.0 * cov_scale * scatter * sigma2 * turb;
            (var_centroid, mean_w2, s)
        }
    };
    let s = check_finite("W^2 covariance", s)?;
    Ok(BeamMoments {
        var_centroid: check_finite("centroid variance", var_centroid)?,
        mean_w2: check_finite("mean W^2", mean_w2)?,
        cov_w2: [[1.2 * s, -0.8 * s], [-0.8 * s, 1.2 * s]],
        w0: scene.w0,
    })
}

/// Normal law of `Θᵢ = ln(Wᵢ²/W₀²)`, matched so that `W₀² e^Θ` has the given
/// mean and covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaLawParams {
    pub mu: [f64; 2],
    pub sigma: [[f64; 2]; 2],
    pub w0: f64,
}

pub fn theta_law(moments: &BeamMoments) -> Result<ThetaLawParams> {
    let w0_sq = moments.w0 * moments.w0;
    let m = moments.mean_w2 / w0_sq;
    if !(m > 0.0) {
        return Err(Error::domain("mean W^2 / W0^2", m, "must be > 0"));
    }
    let mut sigma = [[0.0; 2]; 2];
    for (i, row) in sigma.iter_mut().enumerate() {
        for (j, s) in row.iter_mut().enumerate() {
            let c = moments.cov_w2[i][j] / (w0_sq * w0_sq);
            let arg = 1.0 + c / (m * m);
            if !(arg > 0.0) {
                return Err(Error::domain(
                    "1 + Cov(W^2)/<W^2>^2",
                    arg,
                    "must be > 0 for a lognormal width law; parameters are outside the model's range",
                ));
            }
            *s = libm::log(arg);
        }
    }
    let ln_m = libm::log(m);
    Ok(ThetaLawParams {
        mu: [ln_m - sigma[0][0] / 2.0, ln_m - sigma[1][1] / 2.0],
        sigma,
        w0: moments.w0,
    })
}

impl ThetaLawParams {
    /// Lower Cholesky factor of `sigma`; degenerate directions get zero.
    fn cholesky(&self) -> [f64; 3] {
        let l11 = libm::sqrt(self.sigma[0][0].max(0.0));
        let l21 = if l11 > 0.0 {
            self.sigma[1][0] / l11
        } else {
            0.0
        };
        let l22 = libm::sqrt((self.sigma[1][1] - l21 * l21).max(0.0));
        [l11, l21, l22]
    }

    /// Correlation coefficient of `Θ₁` and `Θ₂`, 0 when degenerate.
    pub fn correlation(&self) -> f64 {
        let denom = libm::sqrt(self.sigma[0][0] * self.sigma[1][1]);
        if denom > 0.0 {
            self.sigma[0][1] / denom
        } else {
            0.0
        }
    }
}

/// One realisation of the received beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamVector {
    pub x0: f64,
    pub y0: f64,
    pub w1: f64,
    pub w2: f64,
    /// Ellipse orientation relative to the centroid direction, `φ − θ₀`.
    pub phi_rel: f64,
}

impl BeamVector {
    pub fn centroid_distance(&self) -> f64 {
        libm::hypot(self.x0, self.y0)
    }
}

/// Draws a beam: Gaussian centroid, bivariate normal `Θ`, uniform orientation
/// on `[0, π/2]`. Five variates are consumed in a fixed order.
pub fn sample_beam_vector<R: Rng + ?Sized>(
    law: &ThetaLawParams,
    var_centroid: f64,
    rng: &mut R,
) -> BeamVector {
    let [l11, l21, l22] = law.cholesky();
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    let theta1 = law.mu[0] + l11 * z1;
    let theta2 = law.mu[1] + l21 * z1 + l22 * z2;
    let sd = libm::sqrt(var_centroid.max(0.0));
    let zx: f64 = StandardNormal.sample(rng);
    let zy: f64 = StandardNormal.sample(rng);
    let phi_rel = rng.random::<f64>() * FRAC_PI_2;
    BeamVector {
        x0: sd * zx,
        y0: sd * zy,
        w1: law.w0 * libm::exp(theta1 / 2.0),
        w2: law.w0 * libm::exp(theta2 / 2.0),
        phi_rel,
    }
}
