//! Simulation configuration: a flat JSON object with snake_case keys.
//!
//! ```json
//! {"protocol": "bb84", "sweep": "noise", "d_list": [2], "q_list": [0.0, 0.05]}
//! ```
//!
//! Scene keys (`l_bar`, `h_bar`, `wavelength`, `w0`, `r_ap`, `alpha`, `beta`,
//! `cn2`, `n0`, `pointing_model`) override the reference optics for
//! `direction` and the `weather` preset. Lengths are metres, angles degrees.

use std::path::PathBuf;
use std::str::FromStr;

use satqkd_core::atmosphere::{ChannelScene, Direction, PointingModel, Weather, MAX_ZENITH};
use satqkd_core::ext_b92::max_noise;
use satqkd_core::Protocol;
use serde::Deserialize;

use crate::error::{Context, Result, SimError};

pub const DEFAULT_SAMPLES: u64 = 10_000;
pub const DEFAULT_PDR_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_LENGTH_POINTS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Noise,
    Zenith,
    Length,
    Pdt,
    Pdr,
    Tolerance,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Noise => "noise",
            SweepKind::Zenith => "zenith",
            SweepKind::Length => "length",
            SweepKind::Pdt => "pdt",
            SweepKind::Pdr => "pdr",
            SweepKind::Tolerance => "tolerance",
        }
    }

    /// Sweeps that draw Monte Carlo samples and therefore need a seed.
    pub fn is_stochastic(self) -> bool {
        !matches!(self, SweepKind::Noise | SweepKind::Tolerance)
    }
}

impl FromStr for SweepKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "noise" => SweepKind::Noise,
            "zenith" => SweepKind::Zenith,
            "length" => SweepKind::Length,
            "pdt" => SweepKind::Pdt,
            "pdr" => SweepKind::Pdr,
            "tolerance" => SweepKind::Tolerance,
            _ => {
                return Err(SimError::config(format!(
                    "sweep = \"{s}\" is not one of noise, zenith, length, pdt, pdr, tolerance"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// The document as written, before defaults and validation.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub protocol: Option<String>,
    pub sweep: Option<String>,
    pub d_list: Option<Vec<u32>>,
    pub q_list: Option<Vec<f64>>,
    pub xi: Option<f64>,
    pub direction: Option<String>,
    pub weather: Option<String>,
    pub zenith_deg: Option<f64>,
    pub l_bar: Option<f64>,
    pub h_bar: Option<f64>,
    pub wavelength: Option<f64>,
    pub w0: Option<f64>,
    pub r_ap: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub cn2: Option<f64>,
    pub n0: Option<f64>,
    pub pointing_model: Option<String>,
    pub zenith_grid: Option<Vec<f64>>,
    pub length_grid: Option<Vec<f64>>,
    pub n_samples: Option<u64>,
    pub n_bins: Option<usize>,
    pub rounding_decimals: Option<u32>,
    pub seed: Option<u64>,
    pub bb84_qber: Option<bool>,
    pub output_path: Option<PathBuf>,
    pub format: Option<String>,
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub protocols: Vec<Protocol>,
    pub sweep: SweepKind,
    pub d_list: Vec<u32>,
    pub q_list: Vec<f64>,
    pub xi: f64,
    pub scene: ChannelScene,
    /// Preset name, or `custom` when `cn2` or `n0` is overridden.
    pub weather_label: String,
    /// Degrees.
    pub zenith_grid: Vec<f64>,
    /// Metres.
    pub length_grid: Vec<f64>,
    pub n_samples: u64,
    pub n_bins: usize,
    pub rounding_decimals: Option<u32>,
    pub seed: Option<u64>,
    pub bb84_qber: bool,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl SimulationConfig {
    /// Seed of a stochastic sweep; validation guarantees it is present.
    pub fn seed_or_err(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            SimError::config(format!(
                "seed is required for the {} sweep",
                self.sweep.name()
            ))
        })
    }

    pub fn decimals(&self, protocol: Protocol) -> u32 {
        self.rounding_decimals
            .unwrap_or_else(|| protocol.pdr_decimals())
    }
}

/// `0, 0.005, …, 0.35`.
pub fn default_q_grid() -> Vec<f64> {
    (0..=70).map(|i| i as f64 * 0.005).collect()
}

/// `0°, 2°, …, 80°`.
pub fn default_zenith_grid() -> Vec<f64> {
    (0..=40).map(|i| i as f64 * 2.0).collect()
}

/// Evenly spaced from `L̄` to `L̄ sec 80°`, the longest slant the model covers.
pub fn default_length_grid(l_bar: f64) -> Vec<f64> {
    let top = l_bar / MAX_ZENITH.cos();
    let n = DEFAULT_LENGTH_POINTS;
    (0..n)
        .map(|i| l_bar + (top - l_bar) * i as f64 / (n - 1) as f64)
        .collect()
}

fn parse_name<T: FromStr<Err = satqkd_core::Error>>(field: &str, value: &str) -> Result<T> {
    value.parse().context(|| format!("field `{field}`"))
}

fn non_empty<T>(field: &str, list: &[T]) -> Result<()> {
    if list.is_empty() {
        return Err(SimError::config(format!("{field} = [] must not be empty")));
    }
    Ok(())
}

/// Parses and validates a JSON document.
pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| SimError::config(e.to_string()))?;
    raw.validate()
}

impl RawConfig {
    pub fn validate(self) -> Result<SimulationConfig> {
        let protocol = self
            .protocol
            .ok_or_else(|| SimError::config("protocol is required (ext_b92, bb84 or both)"))?;
        let protocols = match protocol.as_str() {
            "both" => Protocol::ALL.to_vec(),
            p => vec![parse_name::<Protocol>("protocol", p)?],
        };
        let sweep: SweepKind = self
            .sweep
            .ok_or_else(|| {
                SimError::config("sweep is required (noise, zenith, length, pdt, pdr, tolerance)")
            })?
            .parse()?;

        let d_list = match self.d_list {
            Some(list) => list,
            None if sweep == SweepKind::Pdt => Vec::new(),
            None => {
                return Err(SimError::config(format!(
                    "d_list is required for the {} sweep",
                    sweep.name()
                )))
            }
        };
        if sweep != SweepKind::Pdt {
            non_empty("d_list", &d_list)?;
        }
        for &d in &d_list {
            if d < 2 {
                return Err(SimError::config(format!(
                    "d_list entry d = {d} must be an integer >= 2"
                )));
            }
        }

        let q_list = match self.q_list {
            Some(list) => list,
            None if sweep == SweepKind::Noise => default_q_grid(),
            None => vec![0.0],
        };
        non_empty("q_list", &q_list)?;
        for &q in &q_list {
            for &d in &d_list {
                let bound = max_noise(d);
                if !(0.0..=bound).contains(&q) {
                    return Err(SimError::config(format!(
                        "q_list entry q = {q} is outside [0, (d-1)/d] = [0, {bound}] for d = {d}"
                    )));
                }
            }
        }

        let xi = self.xi.unwrap_or(1.0);
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(SimError::config(format!("xi = {xi} must lie in (0, 1]")));
        }

        let direction: Direction = parse_name(
            "direction",
            self.direction.as_deref().unwrap_or("down-link"),
        )?;
        let weather: Weather = parse_name("weather", self.weather.as_deref().unwrap_or("day1"))?;
        let mut scene = ChannelScene::reference(direction, weather);
        let zenith_deg = self.zenith_deg.unwrap_or(0.0);
        check_zenith("zenith_deg", zenith_deg)?;
        scene.zenith = zenith_deg.to_radians();
        for (slot, value) in [
            (&mut scene.l_bar, self.l_bar),
            (&mut scene.h_bar, self.h_bar),
            (&mut scene.wavelength, self.wavelength),
            (&mut scene.w0, self.w0),
            (&mut scene.r_ap, self.r_ap),
            (&mut scene.alpha, self.alpha),
            (&mut scene.beta, self.beta),
            (&mut scene.cn2, self.cn2),
            (&mut scene.n0, self.n0),
        ] {
            if let Some(v) = value {
                *slot = v;
            }
        }
        if let Some(p) = &self.pointing_model {
            scene.pointing_model = parse_name::<PointingModel>("pointing_model", p)?;
        }
        scene.validate().context(|| "scene".into())?;
        let weather_label = if self.cn2.is_some() || self.n0.is_some() {
            "custom".to_string()
        } else {
            weather.name().to_string()
        };

        let zenith_grid = match self.zenith_grid {
            Some(g) => g,
            None if sweep == SweepKind::Zenith => default_zenith_grid(),
            None => vec![zenith_deg],
        };
        non_empty("zenith_grid", &zenith_grid)?;
        for &z in &zenith_grid {
            check_zenith("zenith_grid entry", z)?;
        }

        let length_grid = self
            .length_grid
            .unwrap_or_else(|| default_length_grid(scene.l_bar));
        non_empty("length_grid", &length_grid)?;
        let longest = scene.l_bar / MAX_ZENITH.cos();
        for &l in &length_grid {
            if !(l >= scene.l_bar * (1.0 - 1e-12) && l <= longest * (1.0 + 1e-12)) {
                return Err(SimError::config(format!(
                    "length_grid entry {l} m must lie in [l_bar, l_bar sec 80°] = [{}, {longest}] m",
                    scene.l_bar
                )));
            }
        }

        let n_samples = self.n_samples.unwrap_or(if sweep == SweepKind::Pdr {
            DEFAULT_PDR_SAMPLES
        } else {
            DEFAULT_SAMPLES
        });
        if n_samples == 0 {
            return Err(SimError::config("n_samples = 0 must be >= 1"));
        }
        let n_bins = self.n_bins.unwrap_or(satqkd_core::transmit::DEFAULT_BINS);
        if n_bins == 0 {
            return Err(SimError::config("n_bins = 0 must be >= 1"));
        }
        if let Some(r) = self.rounding_decimals {
            if r > 15 {
                return Err(SimError::config(format!(
                    "rounding_decimals = {r} must be <= 15"
                )));
            }
        }
        if sweep.is_stochastic() && self.seed.is_none() {
            return Err(SimError::config(format!(
                "seed is required for the {} sweep (no implicit default)",
                sweep.name()
            )));
        }

        let format = match self.format.as_deref() {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => {
                return Err(SimError::config(format!(
                    "format = \"{other}\" must be csv or json"
                )))
            }
            None => match self.output_path.as_ref().and_then(|p| p.extension()) {
                Some(ext) if ext == "json" => Format::Json,
                _ => Format::Csv,
            },
        };

        Ok(SimulationConfig {
            protocols,
            sweep,
            d_list,
            q_list,
            xi,
            scene,
            weather_label,
            zenith_grid,
            length_grid,
            n_samples,
            n_bins,
            rounding_decimals: self.rounding_decimals,
            seed: self.seed,
            bb84_qber: self.bb84_qber.unwrap_or(true),
            output_path: self.output_path,
            format,
        })
    }
}

fn check_zenith(field: &str, deg: f64) -> Result<()> {
    if !(0.0..=80.0).contains(&deg) {
        return Err(SimError::config(format!(
            "{field} = {deg} must lie in [0, 80] degrees"
        )));
    }
    Ok(())
}
