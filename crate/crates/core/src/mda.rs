//! Motion-aware augmentation on spectrograms.
//!
//! Random erasing masks only the part of a random time window that overlaps
//! detected motion. Random shifting rotates the time axis circularly by a
//! distance bounded by the quiet margins before and after the motion, so
//! the motion period itself never wraps around.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::csi::Spectrogram;
use crate::error::{Error, Result};
use crate::motion::{envelope, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillMode {
    /// Mean of the whole spectrogram.
    Mean,
    Zero,
}

impl FillMode {
    pub fn name(self) -> &'static str {
        match self {
            FillMode::Mean => "mean",
            FillMode::Zero => "zero",
        }
    }
}

impl std::str::FromStr for FillMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(FillMode::Mean),
            "zero" => Ok(FillMode::Zero),
            _ => Err(Error::config(format!("unknown fill mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdaConfig {
    /// Erase window width bounds as fractions of the time-bin count.
    pub erase_min_frac: f64,
    pub erase_max_frac: f64,
    pub fill: FillMode,
    pub rng_seed: u64,
}

impl Default for MdaConfig {
    fn default() -> Self {
        Self {
            erase_min_frac: 0.10,
            erase_max_frac: 0.30,
            fill: FillMode::Mean,
            rng_seed: 0,
        }
    }
}

impl MdaConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.erase_min_frac, self.erase_max_frac);
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(Error::config(format!(
                "erase fractions must satisfy 0 < min <= max <= 1, got {lo} / {hi}"
            )));
        }
        Ok(())
    }
}

fn check_intervals(intervals: &[Interval], n: usize) -> Result<()> {
    for w in intervals.windows(2) {
        if w[0].end > w[1].start {
            return Err(Error::arg("motion intervals must be sorted and disjoint"));
        }
    }
    if intervals.iter().any(|i| i.start >= i.end || i.end > n) {
        return Err(Error::arg(format!(
            "motion intervals must be non-empty and lie within [0, {n})"
        )));
    }
    Ok(())
}

/// Draws an erase window of `[min, max] * n` columns placed uniformly.
pub fn draw_erase_window<R: Rng + ?Sized>(n: usize, cfg: &MdaConfig, rng: &mut R) -> Interval {
    let min_w = ((cfg.erase_min_frac * n as f64).ceil() as usize).clamp(1, n);
    let max_w = ((cfg.erase_max_frac * n as f64).floor() as usize).clamp(min_w, n);
    let width = rng.random_range(min_w..=max_w);
    let start = rng.random_range(0..=n - width);
    Interval::new(start, start + width)
}

/// Columns to erase: the window intersected with the motion intervals.
pub fn masked_columns(window: Interval, intervals: &[Interval]) -> Vec<Interval> {
    intervals
        .iter()
        .filter_map(|i| window.intersect(i))
        .collect()
}

/// Sets every masked column to the fill value across all frequency rows.
pub fn apply_erase(spec: &Spectrogram, masked: &[Interval], fill: FillMode) -> Spectrogram {
    let mut out = spec.clone();
    if masked.is_empty() {
        return out;
    }
    let value = match fill {
        FillMode::Mean => spec.mean(),
        FillMode::Zero => 0.0,
    };
    let (rows, cols) = spec.shape();
    let data = out.values_mut();
    for iv in masked {
        for r in 0..rows {
            data[r * cols + iv.start..r * cols + iv.end].fill(value);
        }
    }
    out
}

/// Motion-aware random erasing.
pub fn mre<R: Rng + ?Sized>(
    spec: &Spectrogram,
    intervals: &[Interval],
    cfg: &MdaConfig,
    rng: &mut R,
) -> Result<Spectrogram> {
    cfg.validate()?;
    check_intervals(intervals, spec.cols())?;
    let window = draw_erase_window(spec.cols(), cfg, rng);
    Ok(apply_erase(
        spec,
        &masked_columns(window, intervals),
        cfg.fill,
    ))
}

/// Inclusive bounds of the shift distance: `[-T_start, N - T_end]` over the
/// motion envelope, or `[-N/4, N/4]` without detected motion.
pub fn shift_range(n: usize, intervals: &[Interval]) -> (i64, i64) {
    match envelope(intervals) {
        Some(env) => (-(env.start as i64), n as i64 - env.end as i64),
        None => (-((n / 4) as i64), (n / 4) as i64),
    }
}

pub fn draw_shift<R: Rng + ?Sized>(n: usize, intervals: &[Interval], rng: &mut R) -> i64 {
    let (lo, hi) = shift_range(n, intervals);
    rng.random_range(lo..=hi)
}

/// Rotates every row by `tau` columns; positive moves content rightward.
pub fn circular_shift(spec: &Spectrogram, tau: i64) -> Spectrogram {
    let mut out = spec.clone();
    let (rows, cols) = spec.shape();
    let k = tau.rem_euclid(cols as i64) as usize;
    if k == 0 {
        return out;
    }
    let data = out.values_mut();
    for r in 0..rows {
        data[r * cols..(r + 1) * cols].rotate_right(k);
    }
    out
}

/// Motion-aware random shifting; returns the shifted spectrogram and `τ`.
pub fn mrs<R: Rng + ?Sized>(
    spec: &Spectrogram,
    intervals: &[Interval],
    rng: &mut R,
) -> Result<(Spectrogram, i64)> {
    check_intervals(intervals, spec.cols())?;
    let tau = draw_shift(spec.cols(), intervals, rng);
    Ok((circular_shift(spec, tau), tau))
}

/// Converts a time shift to whole columns at `bins_per_s` time bins per
/// second.
pub fn shift_columns(seconds: f64, bins_per_s: f64) -> i64 {
    (seconds * bins_per_s).round() as i64
}
