//! Grid evaluation. Each grid point is evaluated in order; Monte Carlo
//! samples within a point are spread over threads chunk by chunk and merged
//! in chunk order, so output does not depend on the thread count.

use rayon::prelude::*;
use satqkd_core::atmosphere::ChannelScene;
use satqkd_core::transmit::{
    average_key_rate, chunks, LinkSampler, PdtAccumulator, RateAccumulator, RateDistribution,
    TransmittanceDistribution,
};
use satqkd_core::Protocol;
use serde::{Deserialize, Serialize};

use crate::config::{SimulationConfig, SweepKind};
use crate::error::{Context, Result};

/// One output row. Fields that do not apply to a sweep are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub protocol: String,
    pub d: u32,
    pub q: Option<f64>,
    pub xi: f64,
    pub direction: Option<String>,
    pub weather: Option<String>,
    pub zenith_deg: Option<f64>,
    #[serde(rename = "L_m")]
    pub l_m: Option<f64>,
    pub mean_eta: Option<f64>,
    pub avg_rate: Option<f64>,
    pub qber: Option<f64>,
    pub tolerance: Option<f64>,
    pub n_samples: Option<u64>,
    pub seed: Option<u64>,
}

/// Scene location of a distribution table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenePoint {
    pub direction: String,
    pub weather: String,
    pub zenith_deg: f64,
    #[serde(rename = "L_m")]
    pub l_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdtTable {
    #[serde(flatten)]
    pub point: ScenePoint,
    pub n_samples: u64,
    pub seed: u64,
    pub chi_ext: f64,
    pub mean_eta: f64,
    pub bin_centers: Vec<f64>,
    pub bin_means: Vec<f64>,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdrTable {
    pub protocol: String,
    pub d: u32,
    pub q: f64,
    pub xi: f64,
    #[serde(flatten)]
    pub point: ScenePoint,
    pub n_samples: u64,
    pub seed: u64,
    pub rounding_decimals: u32,
    pub rate_values: Vec<f64>,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutput {
    Records(Vec<SweepRecord>),
    Pdt(Vec<PdtTable>),
    Pdr(Vec<PdrTable>),
}

impl SweepOutput {
    pub fn len(&self) -> usize {
        match self {
            SweepOutput::Records(r) => r.len(),
            SweepOutput::Pdt(t) => t.len(),
            SweepOutput::Pdr(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn records(&self) -> Option<&[SweepRecord]> {
        match self {
            SweepOutput::Records(r) => Some(r),
            _ => None,
        }
    }
}

/// Monte Carlo PDT for one scene, parallel over chunks.
pub fn parallel_pdt(
    scene: &ChannelScene,
    n_samples: u64,
    n_bins: usize,
    seed: u64,
) -> satqkd_core::Result<TransmittanceDistribution> {
    let sampler = LinkSampler::new(scene)?;
    let parts = chunks(n_samples)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|r| sampler.pdt_chunk(seed, n_bins, r))
        .collect::<satqkd_core::Result<Vec<_>>>()?;
    let mut acc = PdtAccumulator::new(n_bins)?;
    for part in &parts {
        acc.merge(part);
    }
    acc.finish(seed, sampler.chi_ext())
}

/// Monte Carlo PDR for one scene, parallel over chunks.
#[allow(clippy::too_many_arguments)]
pub fn parallel_pdr(
    scene: &ChannelScene,
    protocol: Protocol,
    d: u32,
    q: f64,
    xi: f64,
    n_samples: u64,
    decimals: u32,
    seed: u64,
) -> satqkd_core::Result<RateDistribution> {
    let rate = protocol.key_rate(d, q, xi)?;
    let sampler = LinkSampler::new(scene)?;
    let parts = chunks(n_samples)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|r| sampler.pdr_chunk(seed, rate, decimals, r))
        .collect::<satqkd_core::Result<Vec<_>>>()?;
    let mut acc = RateAccumulator::new(decimals);
    for part in &parts {
        acc.merge(part);
    }
    acc.finish()
}

struct Runner<'a> {
    cfg: &'a SimulationConfig,
}

impl Runner<'_> {
    fn qber(&self, p: Protocol, d: u32, q: f64) -> Result<Option<f64>> {
        if p == Protocol::Bb84 && !self.cfg.bb84_qber {
            return Ok(None);
        }
        p.qber(d, q)
            .context(|| format!("qber for {p} d = {d}, q = {q}"))
            .map(Some)
    }

    fn ideal_record(&self, p: Protocol, d: u32) -> SweepRecord {
        SweepRecord {
            protocol: p.name().into(),
            d,
            q: None,
            xi: self.cfg.xi,
            direction: None,
            weather: None,
            zenith_deg: None,
            l_m: None,
            mean_eta: None,
            avg_rate: None,
            qber: None,
            tolerance: None,
            n_samples: None,
            seed: None,
        }
    }

    fn point(&self, zenith_deg: f64) -> Result<(ChannelScene, ScenePoint)> {
        let scene = self.cfg.scene.with_zenith_deg(zenith_deg);
        let (l, _) = scene
            .geometry()
            .context(|| format!("zenith {zenith_deg}°"))?;
        Ok((
            scene,
            ScenePoint {
                direction: scene.direction.name().into(),
                weather: self.cfg.weather_label.clone(),
                zenith_deg,
                l_m: l,
            },
        ))
    }

    fn noise(&self) -> Result<Vec<SweepRecord>> {
        let mut out = Vec::new();
        for &p in &self.cfg.protocols {
            for &d in &self.cfg.d_list {
                for &q in &self.cfg.q_list {
                    let rate = p
                        .key_rate(d, q, self.cfg.xi)
                        .context(|| format!("{p} d = {d}, q = {q}"))?;
                    out.push(SweepRecord {
                        q: Some(q),
                        avg_rate: Some(rate),
                        qber: self.qber(p, d, q)?,
                        ..self.ideal_record(p, d)
                    });
                }
            }
        }
        Ok(out)
    }

    fn tolerance(&self) -> Result<Vec<SweepRecord>> {
        let mut out = Vec::new();
        for &p in &self.cfg.protocols {
            for &d in &self.cfg.d_list {
                let tol = p
                    .noise_tolerance(d)
                    .context(|| format!("{p} tolerance at d = {d}"))?;
                out.push(SweepRecord {
                    tolerance: Some(tol),
                    qber: self.qber(p, d, tol)?,
                    ..self.ideal_record(p, d)
                });
            }
        }
        Ok(out)
    }

    /// Average rates over a list of zenith angles (degrees).
    fn channel(&self, zeniths: &[f64]) -> Result<Vec<SweepRecord>> {
        let seed = self.cfg.seed_or_err()?;
        let mut out = Vec::new();
        for &z in zeniths {
            let (scene, point) = self.point(z)?;
            let pdt = parallel_pdt(&scene, self.cfg.n_samples, self.cfg.n_bins, seed)
                .context(|| format!("PDT at zenith {z}°"))?;
            for &p in &self.cfg.protocols {
                for &d in &self.cfg.d_list {
                    for &q in &self.cfg.q_list {
                        let rate = average_key_rate(&pdt, p, d, q, self.cfg.xi)
                            .context(|| format!("{p} d = {d}, q = {q} at zenith {z}°"))?;
                        out.push(SweepRecord {
                            protocol: p.name().into(),
                            d,
                            q: Some(q),
                            xi: self.cfg.xi,
                            direction: Some(point.direction.clone()),
                            weather: Some(point.weather.clone()),
                            zenith_deg: Some(z),
                            l_m: Some(point.l_m),
                            mean_eta: Some(pdt.mean_eta),
                            avg_rate: Some(rate),
                            qber: self.qber(p, d, q)?,
                            tolerance: None,
                            n_samples: Some(self.cfg.n_samples),
                            seed: Some(seed),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    fn pdt(&self) -> Result<Vec<PdtTable>> {
        let seed = self.cfg.seed_or_err()?;
        self.cfg
            .zenith_grid
            .iter()
            .map(|&z| {
                let (scene, point) = self.point(z)?;
                let pdt = parallel_pdt(&scene, self.cfg.n_samples, self.cfg.n_bins, seed)
                    .context(|| format!("PDT at zenith {z}°"))?;
                Ok(PdtTable {
                    point,
                    n_samples: pdt.n_samples,
                    seed,
                    chi_ext: pdt.chi_ext,
                    mean_eta: pdt.mean_eta,
                    bin_centers: pdt.bin_centers,
                    bin_means: pdt.bin_means,
                    probabilities: pdt.probabilities,
                })
            })
            .collect()
    }

    fn pdr(&self) -> Result<Vec<PdrTable>> {
        let seed = self.cfg.seed_or_err()?;
        let mut out = Vec::new();
        for &z in &self.cfg.zenith_grid {
            let (scene, point) = self.point(z)?;
            for &p in &self.cfg.protocols {
                let decimals = self.cfg.decimals(p);
                for &d in &self.cfg.d_list {
                    for &q in &self.cfg.q_list {
                        let dist = parallel_pdr(
                            &scene,
                            p,
                            d,
                            q,
                            self.cfg.xi,
                            self.cfg.n_samples,
                            decimals,
                            seed,
                        )
                        .context(|| format!("PDR for {p} d = {d}, q = {q} at zenith {z}°"))?;
                        out.push(PdrTable {
                            protocol: p.name().into(),
                            d,
                            q,
                            xi: self.cfg.xi,
                            point: point.clone(),
                            n_samples: self.cfg.n_samples,
                            seed,
                            rounding_decimals: dist.rounding_decimals,
                            rate_values: dist.rate_values,
                            probabilities: dist.probabilities,
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Link length `L` back to the zenith angle in degrees, `cos φ = L̄ / L`.
pub fn length_to_zenith_deg(l_bar: f64, length: f64) -> f64 {
    (l_bar / length)
        .clamp(-1.0, 1.0)
        .acos()
        .to_degrees()
        .clamp(0.0, 80.0)
}

/// Evaluates the configured sweep.
pub fn run_sweep(cfg: &SimulationConfig) -> Result<SweepOutput> {
    let runner = Runner { cfg };
    Ok(match cfg.sweep {
        SweepKind::Noise => SweepOutput::Records(runner.noise()?),
        SweepKind::Tolerance => SweepOutput::Records(runner.tolerance()?),
        SweepKind::Zenith => SweepOutput::Records(runner.channel(&cfg.zenith_grid)?),
        SweepKind::Length => {
            let zeniths: Vec<f64> = cfg
                .length_grid
                .iter()
                .map(|&l| length_to_zenith_deg(cfg.scene.l_bar, l))
                .collect();
            SweepOutput::Records(runner.channel(&zeniths)?)
        }
        SweepKind::Pdt => SweepOutput::Pdt(runner.pdt()?),
        SweepKind::Pdr => SweepOutput::Pdr(runner.pdr()?),
    })
}
