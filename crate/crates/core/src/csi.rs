//! CSI recordings and time-frequency spectrograms.

use num_complex::{Complex32, Complex64};

use crate::error::{Error, Result};

/// Complex channel measurements indexed `(time, subcarrier, link)`.
///
/// Samples are held at storage precision (32-bit float pairs, the precision
/// of commodity CSI tools and of the `RFB1` file format) so that files round
/// trip bit-exactly. Accessors widen to 64-bit for computation.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiTensor {
    data: Vec<Complex32>,
    sample_rate_hz: f64,
    t_count: usize,
    f_count: usize,
    l_count: usize,
    pub env_tag: Option<String>,
    pub label: Option<String>,
}

impl CsiTensor {
    /// Builds a tensor from t-major, then subcarrier, then link ordered data.
    pub fn new(
        data: Vec<Complex32>,
        t_count: usize,
        f_count: usize,
        l_count: usize,
        sample_rate_hz: f64,
    ) -> Result<Self> {
        if t_count < 2 || f_count < 1 || l_count < 1 {
            return Err(Error::arg(format!(
                "tensor dimensions T={t_count} F={f_count} L={l_count} require T>=2, F>=1, L>=1"
            )));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::arg(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let expected = t_count
            .checked_mul(f_count)
            .and_then(|v| v.checked_mul(l_count))
            .ok_or_else(|| Error::arg("tensor dimensions overflow"))?;
        if data.len() != expected {
            return Err(Error::Corrupt(format!(
                "expected {expected} complex values for T={t_count} F={f_count} L={l_count}, got {}",
                data.len()
            )));
        }
        if let Some(index) = data
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::Value {
                index,
                detail: format!("{}", data[index]),
            });
        }
        Ok(Self {
            data,
            sample_rate_hz,
            t_count,
            f_count,
            l_count,
            env_tag: None,
            label: None,
        })
    }

    /// Builds a tensor from 64-bit samples, rounding to storage precision.
    pub fn from_f64(
        data: &[Complex64],
        t_count: usize,
        f_count: usize,
        l_count: usize,
        sample_rate_hz: f64,
    ) -> Result<Self> {
        let narrowed = data
            .iter()
            .map(|c| Complex32::new(c.re as f32, c.im as f32))
            .collect();
        Self::new(narrowed, t_count, f_count, l_count, sample_rate_hz)
    }

    pub fn zeros(
        t_count: usize,
        f_count: usize,
        l_count: usize,
        sample_rate_hz: f64,
    ) -> Result<Self> {
        let n = t_count * f_count * l_count;
        Self::new(
            vec![Complex32::new(0.0, 0.0); n],
            t_count,
            f_count,
            l_count,
            sample_rate_hz,
        )
    }

    pub fn with_env_tag(mut self, tag: impl Into<String>) -> Self {
        self.env_tag = Some(tag.into());
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn t_count(&self) -> usize {
        self.t_count
    }

    pub fn f_count(&self) -> usize {
        self.f_count
    }

    pub fn l_count(&self) -> usize {
        self.l_count
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.t_count as f64 / self.sample_rate_hz
    }

    /// Flat offset of `(t, f, l)`: `((t * F) + f) * L + l`.
    #[inline]
    pub fn offset(&self, t: usize, f: usize, l: usize) -> usize {
        (t * self.f_count + f) * self.l_count + l
    }

    #[inline]
    pub fn get(&self, t: usize, f: usize, l: usize) -> Complex64 {
        let c = self.data[self.offset(t, f, l)];
        Complex64::new(c.re as f64, c.im as f64)
    }

    /// Raw samples at storage precision.
    pub fn raw(&self) -> &[Complex32] {
        &self.data
    }

    /// Time series of one subcarrier-link pair.
    pub fn series(&self, f: usize, l: usize) -> Vec<Complex64> {
        (0..self.t_count).map(|t| self.get(t, f, l)).collect()
    }

    /// Power series `|H(t, f, l)|^2` of one subcarrier-link pair.
    pub fn power_series(&self, f: usize, l: usize) -> Vec<f64> {
        (0..self.t_count)
            .map(|t| self.get(t, f, l).norm_sqr())
            .collect()
    }

    /// Amplitude matrix `|H|` of one link, row-major `T x F`.
    pub fn amplitude_matrix(&self, l: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.t_count * self.f_count);
        for t in 0..self.t_count {
            for f in 0..self.f_count {
                out.push(self.get(t, f, l).norm());
            }
        }
        out
    }
}

/// What a spectrogram channel was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Channel {
    #[default]
    Unknown,
    Subcarrier {
        subcarrier: usize,
        link: usize,
    },
    /// Principal component of one link's amplitude matrix.
    Component {
        index: usize,
        link: usize,
    },
    /// Motion-weighted mix of a subcarrier group.
    Group(usize),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Origin {
    pub source: String,
    pub channel: Channel,
    pub window_len: usize,
}

/// Non-negative magnitude matrix of `B` Doppler bins by `N` time bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    values: Vec<f64>,
    bin_freqs_hz: Vec<f64>,
    bin_times_s: Vec<f64>,
    pub origin: Origin,
}

impl Spectrogram {
    /// `values` is row-major with one row per frequency bin.
    pub fn new(values: Vec<f64>, bin_freqs_hz: Vec<f64>, bin_times_s: Vec<f64>) -> Result<Self> {
        let (b, n) = (bin_freqs_hz.len(), bin_times_s.len());
        if b == 0 || n == 0 {
            return Err(Error::arg(
                "spectrogram needs at least one bin on each axis",
            ));
        }
        if values.len() != b * n {
            return Err(Error::Corrupt(format!(
                "spectrogram {b}x{n} needs {} values, got {}",
                b * n,
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Value {
                index,
                detail: format!(
                    "spectrogram value {} is negative or non-finite",
                    values[index]
                ),
            });
        }
        for (name, axis) in [("frequency", &bin_freqs_hz), ("time", &bin_times_s)] {
            if let Some(index) = axis.iter().position(|v| !v.is_finite()) {
                return Err(Error::Value {
                    index,
                    detail: format!("{name} axis value {}", axis[index]),
                });
            }
            if axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Format(format!(
                    "{name} axis is not strictly increasing"
                )));
            }
        }
        Ok(Self {
            values,
            bin_freqs_hz,
            bin_times_s,
            origin: Origin::default(),
        })
    }

    pub(crate) fn from_parts_unchecked(
        values: Vec<f64>,
        bin_freqs_hz: Vec<f64>,
        bin_times_s: Vec<f64>,
        origin: Origin,
    ) -> Self {
        debug_assert_eq!(values.len(), bin_freqs_hz.len() * bin_times_s.len());
        Self {
            values,
            bin_freqs_hz,
            bin_times_s,
            origin,
        }
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    /// Number of frequency bins `B`.
    pub fn rows(&self) -> usize {
        self.bin_freqs_hz.len()
    }

    /// Number of time bins `N`.
    pub fn cols(&self) -> usize {
        self.bin_times_s.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn bin_freqs_hz(&self) -> &[f64] {
        &self.bin_freqs_hz
    }

    pub fn bin_times_s(&self) -> &[f64] {
        &self.bin_times_s
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows()).map(|r| self.get(r, col)).collect()
    }

    /// Row index of the 0 Hz bin, if present.
    pub fn center_row(&self) -> Option<usize> {
        self.bin_freqs_hz.iter().position(|f| *f == 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Rounds every value to 32-bit precision, the precision of `RFS1` files.
    pub fn quantize_f32(&mut self) {
        for v in &mut self.values {
            *v = *v as f32 as f64;
        }
    }
}

/// One CSI recording with its class label.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub id: String,
    pub csi: CsiTensor,
    pub label: String,
    pub env_tag: Option<String>,
}

impl SampleRecord {
    pub fn new(id: impl Into<String>, csi: CsiTensor, label: impl Into<String>) -> Self {
        let env_tag = csi.env_tag.clone();
        Self {
            id: id.into(),
            csi,
            label: label.into(),
            env_tag,
        }
    }

    pub fn with_env_tag(mut self, tag: impl Into<String>) -> Self {
        self.env_tag = Some(tag.into());
        self
    }
}
