//! Doppler spectrograms via the short-time Fourier transform.
//!
//! Frames are centered on samples `n * hop` (zero padding at both ends), so
//! the time grid depends only on the record length and the hop. Windows of
//! different lengths therefore produce spectrograms with identical axes,
//! which is what time-domain augmentation relies on: every window is
//! transformed with the same fixed `n_dft`, shorter windows are zero padded
//! and, when enabled, longer windows are folded (time-aliased) onto `n_dft`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::csi::{Origin, Spectrogram};
use crate::error::{Error, Result};
use crate::motion::time_bin_count;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowFn {
    Hann,
    Rect,
}

impl WindowFn {
    /// Periodic window of `len` samples.
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            WindowFn::Rect => vec![1.0; len],
            WindowFn::Hann => (0..len)
                .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / len as f64).cos())
                .collect(),
        }
    }
}

/// How the CSI series is turned into the STFT input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// Complex samples with the per-frame mean removed.
    ComplexDemeaned,
    /// Power `|H|^2`, also demeaned per frame; for captures without usable
    /// phase.
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StftConfig {
    pub window_len: usize,
    pub hop: usize,
    pub n_dft: usize,
    pub window_fn: WindowFn,
    pub input_mode: InputMode,
    /// Largest |Doppler| kept, in Hz.
    pub crop_hz: f64,
    /// Fold windows longer than `n_dft` instead of rejecting them.
    pub fold: bool,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window_len: 128,
            hop: 16,
            n_dft: 256,
            window_fn: WindowFn::Hann,
            input_mode: InputMode::ComplexDemeaned,
            crop_hz: 60.0,
            fold: false,
        }
    }
}

impl StftConfig {
    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        if self.window_len < 2 {
            return Err(Error::config(format!(
                "window_len {} is shorter than 2",
                self.window_len
            )));
        }
        if self.hop == 0 {
            return Err(Error::config("hop must be at least 1"));
        }
        if self.n_dft == 0 {
            return Err(Error::config("n_dft must be at least 1"));
        }
        if self.window_len > self.n_dft && !self.fold {
            return Err(Error::config(format!(
                "window_len {} exceeds n_dft {} (enable fold to alias longer windows)",
                self.window_len, self.n_dft
            )));
        }
        if !(self.crop_hz > 0.0 && self.crop_hz <= sample_rate_hz / 2.0) {
            return Err(Error::config(format!(
                "crop_hz {} must lie in (0, {}]",
                self.crop_hz,
                sample_rate_hz / 2.0
            )));
        }
        Ok(())
    }

    pub fn with_window(&self, window_len: usize) -> Self {
        Self {
            window_len,
            ..self.clone()
        }
    }

    /// Signed DFT bin indices kept after cropping, ascending.
    pub fn kept_bins(&self, sample_rate_hz: f64) -> Vec<isize> {
        let n = self.n_dft as isize;
        let lo = -(n / 2);
        let spacing = sample_rate_hz / self.n_dft as f64;
        (lo..lo + n)
            .filter(|k| (*k as f64 * spacing).abs() <= self.crop_hz)
            .collect()
    }

    pub fn frequency_axis(&self, sample_rate_hz: f64) -> Vec<f64> {
        let spacing = sample_rate_hz / self.n_dft as f64;
        self.kept_bins(sample_rate_hz)
            .into_iter()
            .map(|k| k as f64 * spacing)
            .collect()
    }
}

/// Default, lengthened and shortened window lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSet {
    pub default_len: usize,
    pub lengthened_len: usize,
    pub shortened_len: usize,
}

impl Default for WindowSet {
    fn default() -> Self {
        Self {
            default_len: 128,
            lengthened_len: 256,
            shortened_len: 64,
        }
    }
}

impl WindowSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.shortened_len < self.default_len && self.default_len < self.lengthened_len) {
            return Err(Error::config(format!(
                "window set needs shortened < default < lengthened, got {} / {} / {}",
                self.shortened_len, self.default_len, self.lengthened_len
            )));
        }
        Ok(())
    }

    /// Alternate lengths in the order TDA variants use them.
    pub fn alternates(&self) -> [usize; 2] {
        [self.lengthened_len, self.shortened_len]
    }
}

/// A planned transform for one configuration and sample rate.
pub struct Stft {
    cfg: StftConfig,
    sample_rate_hz: f64,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    kept: Vec<usize>,
    freqs: Vec<f64>,
}

impl Stft {
    pub fn new(cfg: &StftConfig, sample_rate_hz: f64) -> Result<Self> {
        cfg.validate(sample_rate_hz)?;
        let n = cfg.n_dft as isize;
        let kept = cfg
            .kept_bins(sample_rate_hz)
            .into_iter()
            .map(|k| k.rem_euclid(n) as usize)
            .collect();
        Ok(Self {
            window: cfg.window_fn.coefficients(cfg.window_len),
            fft: FftPlanner::new().plan_fft_forward(cfg.n_dft),
            kept,
            freqs: cfg.frequency_axis(sample_rate_hz),
            cfg: cfg.clone(),
            sample_rate_hz,
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.cfg
    }

    pub fn compute(&self, series: &[Complex64]) -> Result<Spectrogram> {
        if series.is_empty() {
            return Err(Error::arg("cannot transform an empty series"));
        }
        let input: Vec<Complex64> = match self.cfg.input_mode {
            InputMode::ComplexDemeaned => series.to_vec(),
            InputMode::Power => series
                .iter()
                .map(|c| Complex64::new(c.norm_sqr(), 0.0))
                .collect(),
        };
        let len = input.len();
        let win = self.cfg.window_len;
        let n_dft = self.cfg.n_dft;
        let cols = time_bin_count(len, self.cfg.hop);
        let rows = self.kept.len();
        let mut values = vec![0.0; rows * cols];
        let mut buf = vec![Complex64::new(0.0, 0.0); n_dft];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];

        for col in 0..cols {
            let start = (col * self.cfg.hop) as isize - (win / 2) as isize;
            let lo = start.max(0) as usize;
            let hi = ((start + win as isize).max(0) as usize).min(len);
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            if hi > lo {
                let seg = &input[lo..hi];
                let mean = seg.iter().sum::<Complex64>() / seg.len() as f64;
                for (j, x) in seg.iter().enumerate() {
                    let i = (lo + j) as isize - start;
                    let w = self.window[i as usize];
                    buf[i as usize % n_dft] += (x - mean) * w;
                }
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (row, &k) in self.kept.iter().enumerate() {
                values[row * cols + col] = buf[k].norm();
            }
        }

        let times = (0..cols)
            .map(|n| (n * self.cfg.hop) as f64 / self.sample_rate_hz)
            .collect();
        Ok(Spectrogram::from_parts_unchecked(
            values,
            self.freqs.clone(),
            times,
            Origin {
                window_len: win,
                ..Origin::default()
            },
        ))
    }
}

pub fn stft_spectrogram(
    series: &[Complex64],
    cfg: &StftConfig,
    sample_rate_hz: f64,
) -> Result<Spectrogram> {
    Stft::new(cfg, sample_rate_hz)?.compute(series)
}

/// Spectrograms for the default, lengthened and shortened windows, in that
/// order, sharing the base configuration's `n_dft` and crop.
pub fn tda_spectrograms(
    series: &[Complex64],
    base: &StftConfig,
    windows: &WindowSet,
    sample_rate_hz: f64,
) -> Result<Vec<Spectrogram>> {
    windows.validate()?;
    [
        windows.default_len,
        windows.lengthened_len,
        windows.shortened_len,
    ]
    .into_iter()
    .map(|w| stft_spectrogram(series, &base.with_window(w), sample_rate_hz))
    .collect()
}

/// Resamples `rows` row-major rows of `n` columns to `t_out` columns.
///
/// Shorter inputs are zero padded on the right; longer inputs are linearly
/// interpolated at pixel-center positions `(j + 0.5) * n / t_out - 0.5`.
pub fn align_values(values: &[f64], rows: usize, n: usize, t_out: usize) -> Vec<f64> {
    debug_assert_eq!(values.len(), rows * n);
    if n == t_out {
        return values.to_vec();
    }
    let mut out = vec![0.0; rows * t_out];
    if n < t_out {
        for r in 0..rows {
            out[r * t_out..r * t_out + n].copy_from_slice(&values[r * n..(r + 1) * n]);
        }
        return out;
    }
    let taps = resample_taps(n, t_out);
    for r in 0..rows {
        let src = &values[r * n..(r + 1) * n];
        for (j, &(i0, frac)) in taps.iter().enumerate() {
            let a = src[i0];
            let b = src[(i0 + 1).min(n - 1)];
            out[r * t_out + j] = a + (b - a) * frac;
        }
    }
    out
}

fn resample_taps(n: usize, t_out: usize) -> Vec<(usize, f64)> {
    let scale = n as f64 / t_out as f64;
    (0..t_out)
        .map(|j| {
            let x = ((j as f64 + 0.5) * scale - 0.5).clamp(0.0, (n - 1) as f64);
            let i0 = x.floor() as usize;
            (i0, x - i0 as f64)
        })
        .collect()
}

/// Source column nearest to each output column of [`align_values`]; `None`
/// for zero-padded columns.
pub fn aligned_source_columns(n: usize, t_out: usize) -> Vec<Option<usize>> {
    if n <= t_out {
        return (0..t_out).map(|j| (j < n).then_some(j)).collect();
    }
    resample_taps(n, t_out)
        .into_iter()
        .map(|(i0, frac)| Some(if frac >= 0.5 { (i0 + 1).min(n - 1) } else { i0 }))
        .collect()
}

/// Brings a spectrogram to exactly `t_out` time bins; frequency axis untouched.
pub fn align(spec: &Spectrogram, t_out: usize) -> Result<Spectrogram> {
    if t_out == 0 {
        return Err(Error::arg("t_out must be at least 1"));
    }
    let (rows, n) = spec.shape();
    if n == t_out {
        return Ok(spec.clone());
    }
    let values = align_values(spec.values(), rows, n, t_out);
    let times = spec.bin_times_s();
    let new_times = if n < t_out {
        let dt = if n >= 2 {
            (times[n - 1] - times[0]) / (n - 1) as f64
        } else {
            1.0
        };
        (0..t_out)
            .map(|j| {
                if j < n {
                    times[j]
                } else {
                    times[n - 1] + dt * (j - n + 1) as f64
                }
            })
            .collect()
    } else {
        align_values(times, 1, n, t_out)
    };
    Ok(Spectrogram::from_parts_unchecked(
        values,
        spec.bin_freqs_hz().to_vec(),
        new_times,
        spec.origin.clone(),
    ))
}
