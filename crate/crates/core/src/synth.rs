//! Synthetic multipath CSI with known Doppler ground truth.
//!
//! Each path contributes `sensitivity[f] * a * exp(-j2π f_c(f) τ) *
//! exp(jφ(t))` while active, where `φ` integrates the path's Doppler
//! profile; circularly symmetric Gaussian noise of standard deviation `σ`
//! is added to every sample.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::csi::CsiTensor;
use crate::error::{Error, Result};
use crate::rng;

/// Doppler shift of a path: a constant, or piecewise-constant segments each
/// starting at `start_s` (0 Hz before the first segment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DopplerProfile {
    Constant(f64),
    Piecewise(Vec<DopplerSegment>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerSegment {
    pub start_s: f64,
    pub hz: f64,
}

impl Default for DopplerProfile {
    fn default() -> Self {
        DopplerProfile::Constant(0.0)
    }
}

impl DopplerProfile {
    pub fn at(&self, time_s: f64) -> f64 {
        match self {
            DopplerProfile::Constant(hz) => *hz,
            DopplerProfile::Piecewise(segs) => segs
                .iter()
                .rev()
                .find(|s| s.start_s <= time_s)
                .map_or(0.0, |s| s.hz),
        }
    }

    /// Accumulated phase `2π ∫_0^t d(s) ds`.
    pub fn phase(&self, time_s: f64) -> f64 {
        match self {
            DopplerProfile::Constant(hz) => 2.0 * PI * hz * time_s,
            DopplerProfile::Piecewise(segs) => {
                let mut acc = 0.0;
                for (i, s) in segs.iter().enumerate() {
                    if s.start_s >= time_s {
                        break;
                    }
                    let end = segs.get(i + 1).map_or(time_s, |n| n.start_s.min(time_s));
                    acc += s.hz * (end - s.start_s.max(0.0)).max(0.0);
                }
                2.0 * PI * acc
            }
        }
    }

    pub fn is_static(&self) -> bool {
        match self {
            DopplerProfile::Constant(hz) => *hz == 0.0,
            DopplerProfile::Piecewise(segs) => segs.iter().all(|s| s.hz == 0.0),
        }
    }
}

/// Complex path gain; scene files may give a bare real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "GainRepr")]
pub struct ComplexGain {
    pub re: f64,
    pub im: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GainRepr {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl From<GainRepr> for ComplexGain {
    fn from(g: GainRepr) -> Self {
        match g {
            GainRepr::Real(re) => ComplexGain { re, im: 0.0 },
            GainRepr::Complex { re, im } => ComplexGain { re, im },
        }
    }
}

impl From<ComplexGain> for Complex64 {
    fn from(c: ComplexGain) -> Self {
        Complex64::new(c.re, c.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub amplitude: ComplexGain,
    #[serde(default)]
    pub delay_s: f64,
    #[serde(default)]
    pub doppler_hz: DopplerProfile,
    /// `[start_s, end_s)`; the whole record when absent.
    #[serde(default)]
    pub active_interval: Option<[f64; 2]>,
}

impl PathSpec {
    pub fn new(amplitude: f64, doppler_hz: f64) -> Self {
        Self {
            amplitude: ComplexGain {
                re: amplitude,
                im: 0.0,
            },
            delay_s: 0.0,
            doppler_hz: DopplerProfile::Constant(doppler_hz),
            active_interval: None,
        }
    }

    pub fn with_delay(mut self, delay_s: f64) -> Self {
        self.delay_s = delay_s;
        self
    }

    pub fn active(mut self, start_s: f64, end_s: f64) -> Self {
        self.active_interval = Some([start_s, end_s]);
        self
    }

    fn span(&self, duration_s: f64) -> (f64, f64) {
        self.active_interval
            .map_or((0.0, duration_s), |[a, b]| (a, b))
    }
}

fn default_spacing() -> f64 {
    312_500.0
}

fn default_center() -> f64 {
    5.32e9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub f_count: usize,
    pub l_count: usize,
    #[serde(default = "default_spacing")]
    pub subcarrier_spacing_hz: f64,
    #[serde(default = "default_center")]
    pub center_freq_hz: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    /// Per-subcarrier gain with `f_count` entries; empty means unit gain.
    #[serde(default)]
    pub sensitivity: Vec<f64>,
    pub paths: Vec<PathSpec>,
}

impl SceneSpec {
    /// Scene with unit sensitivity, no paths and no noise.
    pub fn new(duration_s: f64, sample_rate_hz: f64, f_count: usize, l_count: usize) -> Self {
        Self {
            duration_s,
            sample_rate_hz,
            f_count,
            l_count,
            subcarrier_spacing_hz: default_spacing(),
            center_freq_hz: default_center(),
            noise_sigma: 0.0,
            sensitivity: vec![1.0; f_count],
            paths: Vec::new(),
        }
    }

    pub fn with_path(mut self, path: PathSpec) -> Self {
        self.paths.push(path);
        self
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn with_sensitivity(mut self, gains: Vec<f64>) -> Self {
        self.sensitivity = gains;
        self
    }

    pub fn t_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.sample_rate_hz > 0.0) {
            return Err(Error::config("duration and sample rate must be positive"));
        }
        if self.t_count() < 2 {
            return Err(Error::config("scene must span at least two samples"));
        }
        if self.f_count == 0 || self.l_count == 0 {
            return Err(Error::config(
                "scene needs at least one subcarrier and link",
            ));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::config("noise sigma must be non-negative"));
        }
        if !self.sensitivity.is_empty() && self.sensitivity.len() != self.f_count {
            return Err(Error::config(format!(
                "sensitivity has {} entries for {} subcarriers",
                self.sensitivity.len(),
                self.f_count
            )));
        }
        for p in &self.paths {
            if let Some([a, b]) = p.active_interval {
                if !(a < b) {
                    return Err(Error::config(format!("empty active interval [{a}, {b})")));
                }
            }
        }
        Ok(())
    }

    fn subcarrier_freq(&self, f: usize) -> f64 {
        self.center_freq_hz
            + (f as f64 - (self.f_count as f64 - 1.0) / 2.0) * self.subcarrier_spacing_hz
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTruth {
    pub doppler_hz: DopplerProfile,
    pub active_s: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub paths: Vec<PathTruth>,
    /// Earliest start and latest end over all moving paths.
    pub motion_envelope_s: Option<[f64; 2]>,
}

/// Generates the CSI tensor of a scene; noise is drawn from `seed`.
pub fn generate(scene: &SceneSpec, seed: u64) -> Result<(CsiTensor, GroundTruth)> {
    scene.validate()?;
    let t_count = scene.t_count();
    let (f_count, l_count) = (scene.f_count, scene.l_count);
    let rate = scene.sample_rate_hz;

    // static per-(path, subcarrier) gains
    let gains: Vec<Vec<Complex64>> = scene
        .paths
        .iter()
        .map(|p| {
            let a: Complex64 = p.amplitude.into();
            (0..f_count)
                .map(|f| {
                    let delay_phase = -2.0 * PI * scene.subcarrier_freq(f) * p.delay_s;
                    a * scene.sensitivity.get(f).copied().unwrap_or(1.0)
                        * Complex64::from_polar(1.0, delay_phase)
                })
                .collect()
        })
        .collect();
    let spans: Vec<(f64, f64)> = scene
        .paths
        .iter()
        .map(|p| p.span(scene.duration_s))
        .collect();

    let mut noise_rng = rng::scoped_stream(seed, "synth-noise");
    let scale = scene.noise_sigma / 2f64.sqrt();
    let mut data = Vec::with_capacity(t_count * f_count * l_count);
    let mut rotations = vec![Complex64::new(0.0, 0.0); scene.paths.len()];
    for t in 0..t_count {
        let time = t as f64 / rate;
        for (m, p) in scene.paths.iter().enumerate() {
            let (a, b) = spans[m];
            rotations[m] = if time >= a && time < b {
                Complex64::from_polar(1.0, p.doppler_hz.phase(time))
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        for f in 0..f_count {
            let clean: Complex64 = gains.iter().zip(&rotations).map(|(g, r)| g[f] * r).sum();
            for _ in 0..l_count {
                let mut h = clean;
                if scene.noise_sigma > 0.0 {
                    let g1: f64 = StandardNormal.sample(&mut noise_rng);
                    let g2: f64 = StandardNormal.sample(&mut noise_rng);
                    h += Complex64::new(g1 * scale, g2 * scale);
                }
                data.push(h);
            }
        }
    }

    let csi = CsiTensor::from_f64(&data, t_count, f_count, l_count, rate)?;
    let paths: Vec<PathTruth> = scene
        .paths
        .iter()
        .zip(&spans)
        .map(|(p, (a, b))| PathTruth {
            doppler_hz: p.doppler_hz.clone(),
            active_s: [*a, *b],
        })
        .collect();
    let motion_envelope_s = paths.iter().filter(|p| !p.doppler_hz.is_static()).fold(
        None,
        |acc: Option<[f64; 2]>, p| {
            Some(match acc {
                None => p.active_s,
                Some([a, b]) => [a.min(p.active_s[0]), b.max(p.active_s[1])],
            })
        },
    );
    Ok((
        csi,
        GroundTruth {
            paths,
            motion_envelope_s,
        },
    ))
}
