//! Motion statistics and motion-period detection.
//!
//! The motion statistic of a subcarrier-link pair is the lag-1
//! autocorrelation coefficient of its power series `|H|^2`. Evaluated over a
//! sliding window it gives a per-time-bin weight `ω(f, n)` aligned with the
//! spectrogram columns; thresholded at the median of all measurements from
//! the same environment it marks the motion period.

use crate::csi::CsiTensor;
use crate::error::{Error, Result};

/// Half-open range `[start, end)` of time-bin indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, n: usize) -> bool {
        self.start <= n && n < self.end
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start < end).then_some(Interval { start, end })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionProfile {
    /// Whole-record statistic per subcarrier-link, indexed `f * L + l`.
    pub ms_global: Vec<f64>,
    /// One row per subcarrier-link, one column per time bin.
    pub ms_sliding: Vec<Vec<f64>>,
    /// Per-bin mean of `ms_sliding` across subcarrier-links; the series that
    /// is thresholded.
    pub activity: Vec<f64>,
    pub intervals: Vec<Interval>,
    pub threshold: f64,
}

impl MotionProfile {
    /// First start and last end of the detected motion, if any.
    pub fn envelope(&self) -> Option<Interval> {
        envelope(&self.intervals)
    }
}

pub fn envelope(intervals: &[Interval]) -> Option<Interval> {
    Some(Interval::new(
        intervals.first()?.start,
        intervals.last()?.end,
    ))
}

/// Biased lag-1 autocorrelation coefficient; 0 for a constant series.
pub fn motion_statistic(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::arg(format!(
            "motion statistic needs at least 2 samples, got {}",
            x.len()
        )));
    }
    Ok(lag1_acf(x))
}

fn lag1_acf(x: &[f64]) -> f64 {
    let first = x[0];
    if x.iter().all(|v| *v == first) {
        return 0.0;
    }
    let n = x.len() as f64;
    let mut mean = x.iter().sum::<f64>() / n;
    // second pass removes the rounding residue of the first
    mean += x.iter().map(|v| v - mean).sum::<f64>() / n;
    let mut den = 0.0;
    for v in x {
        let d = v - mean;
        den += d * d;
    }
    if den == 0.0 {
        return 0.0;
    }
    let mut num = 0.0;
    for w in x.windows(2) {
        num += (w[0] - mean) * (w[1] - mean);
    }
    (num / den).clamp(-1.0, 1.0)
}

/// Number of time bins produced for `t_len` samples at `hop` samples per bin.
///
/// Bin `n` is centered on sample `n * hop`; both the STFT and the sliding
/// motion statistic use this grid.
pub fn time_bin_count(t_len: usize, hop: usize) -> usize {
    t_len.div_ceil(hop).max(1)
}

/// Sample range of the window of `window` samples centered on `center`,
/// truncated to the record and widened to at least two samples.
pub(crate) fn centered_window(center: usize, window: usize, t_len: usize) -> (usize, usize) {
    let half = window / 2;
    let lo_signed = center as isize - half as isize;
    let mut lo = lo_signed.max(0) as usize;
    let mut hi = ((lo_signed + window as isize).max(0) as usize).min(t_len);
    while hi - lo < 2 && (hi < t_len || lo > 0) {
        if hi < t_len {
            hi += 1;
        } else {
            lo -= 1;
        }
    }
    (lo, hi)
}

fn samples(seconds: f64, rate: f64, what: &str) -> Result<usize> {
    let n = (seconds * rate).round();
    if !n.is_finite() || n < 1.0 {
        return Err(Error::arg(format!(
            "{what} of {seconds} s is less than one sample at {rate} Hz"
        )));
    }
    Ok(n as usize)
}

/// Sliding motion statistic in samples: `window` samples per estimate, one
/// column every `hop` samples.
pub fn sliding_ms_samples(csi: &CsiTensor, window: usize, hop: usize) -> Result<Vec<Vec<f64>>> {
    if window < 2 {
        return Err(Error::arg(format!(
            "motion-statistic window of {window} samples is shorter than 2"
        )));
    }
    if hop == 0 {
        return Err(Error::arg("hop must be at least one sample"));
    }
    let t_len = csi.t_count();
    let cols = time_bin_count(t_len, hop);
    let ranges: Vec<(usize, usize)> = (0..cols)
        .map(|n| centered_window(n * hop, window, t_len))
        .collect();
    let mut out = Vec::with_capacity(csi.f_count() * csi.l_count());
    for f in 0..csi.f_count() {
        for l in 0..csi.l_count() {
            let power = csi.power_series(f, l);
            out.push(
                ranges
                    .iter()
                    .map(|&(lo, hi)| lag1_acf(&power[lo..hi]))
                    .collect(),
            );
        }
    }
    Ok(out)
}

/// Sliding motion statistic with window and hop in seconds.
pub fn sliding_ms(csi: &CsiTensor, window_s: f64, hop_s: f64) -> Result<Vec<Vec<f64>>> {
    let rate = csi.sample_rate_hz();
    if !(window_s * rate >= 2.0) {
        return Err(Error::arg(format!(
            "motion-statistic window of {window_s} s covers fewer than 2 samples"
        )));
    }
    if !(hop_s > 0.0) {
        return Err(Error::arg("hop must be positive"));
    }
    sliding_ms_samples(
        csi,
        samples(window_s, rate, "window")?,
        samples(hop_s, rate, "hop")?,
    )
}

/// Whole-record motion statistic per subcarrier-link, indexed `f * L + l`.
pub fn global_ms(csi: &CsiTensor) -> Vec<f64> {
    let mut out = Vec::with_capacity(csi.f_count() * csi.l_count());
    for f in 0..csi.f_count() {
        for l in 0..csi.l_count() {
            out.push(lag1_acf(&csi.power_series(f, l)));
        }
    }
    out
}

/// Maximal runs of bins strictly above `threshold`.
pub fn detect_motion(series: &[f64], threshold: f64) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut start = None;
    for (n, v) in series.iter().enumerate() {
        match (start, *v > threshold) {
            (None, true) => start = Some(n),
            (Some(s), false) => {
                out.push(Interval::new(s, n));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Interval::new(s, series.len()));
    }
    out
}

/// Median (linearly interpolated second quartile) of all measurements.
pub fn quartile_threshold(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::arg("threshold of an empty collection"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = 0.5 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Per-bin mean across subcarrier-links.
pub fn activity_series(ms_sliding: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = ms_sliding.first() else {
        return Vec::new();
    };
    let mut acc = vec![0.0; first.len()];
    for row in ms_sliding {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let k = ms_sliding.len() as f64;
    acc.iter_mut().for_each(|a| *a /= k);
    acc
}

/// Computes the full motion profile of a recording.
///
/// `threshold` is the environment-wide median; when `None` the median of
/// this recording's own sliding measurements is used.
pub fn motion_profile(
    csi: &CsiTensor,
    window: usize,
    hop: usize,
    threshold: Option<f64>,
) -> Result<MotionProfile> {
    let ms_sliding = sliding_ms_samples(csi, window, hop)?;
    let threshold = match threshold {
        Some(t) => t,
        None => {
            let pooled: Vec<f64> = ms_sliding.iter().flatten().copied().collect();
            quartile_threshold(&pooled)?
        }
    };
    let activity = activity_series(&ms_sliding);
    let intervals = detect_motion(&activity, threshold);
    Ok(MotionProfile {
        ms_global: global_ms(csi),
        ms_sliding,
        activity,
        intervals,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    /// Textbook evaluation of the biased lag-1 estimator.
    fn acf_oracle(x: &[f64]) -> f64 {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let den: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        if den == 0.0 {
            return 0.0;
        }
        (0..n - 1)
            .map(|t| (x[t] - mean) * (x[t + 1] - mean))
            .sum::<f64>()
            / den
    }

    #[test]
    fn hand_computed_values() {
        assert_eq!(motion_statistic(&[5.0; 4]).unwrap(), 0.0);
        let alt = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        assert!((motion_statistic(&alt).unwrap() + 5.0 / 6.0).abs() < 1e-15);
        let ramp: Vec<f64> = (1..=8).map(f64::from).collect();
        assert!((motion_statistic(&ramp).unwrap() - 0.625).abs() < 1e-15);
        assert!((acf_oracle(&ramp) - 26.25 / 42.0).abs() < 1e-15);
        assert!(matches!(motion_statistic(&[1.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn detect_runs() {
        assert_eq!(
            detect_motion(&[0.1, 0.6, 0.7, 0.2], 0.5),
            vec![Interval::new(1, 3)]
        );
        assert!(detect_motion(&[0.1, 0.2], 0.5).is_empty());
        assert_eq!(
            detect_motion(&[0.9, 0.1, 0.9, 0.9], 0.5),
            vec![Interval::new(0, 1), Interval::new(2, 4)]
        );
        // ties are no-motion
        assert!(detect_motion(&[0.5, 0.5], 0.5).is_empty());
    }

    #[test]
    fn medians() {
        assert_eq!(quartile_threshold(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(quartile_threshold(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
        assert!(quartile_threshold(&[]).is_err());
    }

    fn tensor_from_power(power: &[f64], rate: f64) -> CsiTensor {
        let data: Vec<Complex64> = power
            .iter()
            .map(|p| Complex64::new(p.sqrt(), 0.0))
            .collect();
        CsiTensor::from_f64(&data, power.len(), 1, 1, rate).unwrap()
    }

    #[test]
    fn sliding_constant_is_zero() {
        let csi = tensor_from_power(&vec![2.0; 300], 100.0);
        let ms = sliding_ms(&csi, 0.2, 0.05).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].len(), time_bin_count(300, 5));
        assert!(ms[0].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn whole_window_replicates_global() {
        let power: Vec<f64> = (0..97).map(|i| ((i * 37) % 11) as f64 + 1.0).collect();
        let csi = tensor_from_power(&power, 100.0);
        let window_s = 2.0 * power.len() as f64 / 100.0;
        let ms = sliding_ms(&csi, window_s, 0.1).unwrap();
        let global = global_ms(&csi);
        assert!(ms[0].iter().all(|v| *v == global[0]));
    }

    #[test]
    fn alternating_span_stands_out() {
        // 100 Hz, 3 s; power alternates only inside [1 s, 2 s)
        let power: Vec<f64> = (0..300)
            .map(|i| {
                let base = 1.0 + 0.01 * ((i * 7919) % 13) as f64;
                if (100..200).contains(&i) {
                    base + if i % 2 == 0 { 1.0 } else { -0.5 }
                } else {
                    base
                }
            })
            .collect();
        let csi = tensor_from_power(&power, 100.0);
        let ms = sliding_ms(&csi, 0.2, 0.1).unwrap();
        let window = 20;
        for (n, v) in ms[0].iter().enumerate() {
            let (lo, hi) = centered_window(n * 10, window, 300);
            assert!((v - acf_oracle(&csi.power_series(0, 0)[lo..hi])).abs() < 1e-12);
        }
        let inside = ms[0][12..19]
            .iter()
            .map(|v| v.abs())
            .fold(f64::INFINITY, f64::min);
        let outside = ms[0][..8]
            .iter()
            .chain(&ms[0][22..])
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        assert!(inside > outside, "inside {inside} outside {outside}");
    }

    #[test]
    fn degenerate_windows_rejected() {
        let csi = tensor_from_power(&[1.0, 2.0, 3.0], 100.0);
        assert!(sliding_ms(&csi, 0.01, 0.01).is_err());
        assert!(sliding_ms(&csi, 0.05, 0.0).is_err());
    }

    #[test]
    fn truncated_windows_never_short() {
        for t in 2..10 {
            for c in 0..t {
                let (lo, hi) = centered_window(c, 2, t);
                assert!(hi - lo >= 2 && hi <= t);
            }
        }
    }

    proptest! {
        #[test]
        fn bounded_and_affine_invariant(
            x in proptest::collection::vec(-100.0f64..100.0, 2..64),
            a in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0],
            b in -100.0f64..100.0,
        ) {
            let m = motion_statistic(&x).unwrap();
            prop_assert!((-1.0..=1.0).contains(&m));
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let my = motion_statistic(&y).unwrap();
            prop_assert!((m - my).abs() < 1e-12 || x.iter().all(|v| *v == x[0]));
            prop_assert!((m - acf_oracle(&x)).abs() < 1e-12);
        }

        #[test]
        fn detection_covers_exactly(
            ms in proptest::collection::vec(-1.0f64..1.0, 0..64),
            th in -1.0f64..1.0,
        ) {
            let iv = detect_motion(&ms, th);
            for w in iv.windows(2) {
                prop_assert!(w[0].end < w[1].start);
            }
            for (n, v) in ms.iter().enumerate() {
                prop_assert_eq!(iv.iter().any(|i| i.contains(n)), *v > th);
            }
        }
    }
}
