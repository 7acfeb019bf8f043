use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fda::SelectionMethod;
use crate::mda::MdaConfig;
use crate::spectro::{StftConfig, WindowSet};

/// How subcarriers are clustered for grouped mixing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingMode {
    /// One clustering over every subcarrier-link spectrogram.
    Joint,
    /// `g_count` groups per link.
    PerLink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdaConfig {
    /// Base selector; `iss` unless comparing against a baseline.
    pub selector: SelectionMethod,
    pub k: usize,
    pub g_count: usize,
    pub top: usize,
    pub normalized_mrc: bool,
    pub grouping: GroupingMode,
    /// Use ω(f, t) from the sliding statistic; otherwise the whole-record
    /// statistic is replicated across time.
    pub time_varying_weights: bool,
    /// Sliding motion-statistic window in seconds.
    pub ms_window_s: f64,
}

impl Default for FdaConfig {
    fn default() -> Self {
        Self {
            selector: SelectionMethod::Iss,
            k: 6,
            g_count: 3,
            top: 3,
            normalized_mrc: false,
            grouping: GroupingMode::Joint,
            time_varying_weights: true,
            ms_window_s: 0.2,
        }
    }
}

/// Requested variant counts per policy.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanConfig {
    /// Window-length variants, drawn from the lengthened then shortened window.
    pub tda: usize,
    /// Motion-aware variants, alternating erasing and shifting.
    pub mda: usize,
    pub mre: usize,
    pub mrs: usize,
    /// Grouped-subcarrier-mixing variants, each with its own clustering seed.
    pub gsm: usize,
    /// Extra selection variants, one per listed K.
    pub iss: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// One file per variant with its spectrograms stacked as channels.
    ChannelStack,
    /// One file per spectrogram.
    PerSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportConfig {
    pub layout: Layout,
    /// Time bins of every exported spectrogram.
    pub t_out: usize,
    pub cache_max_bytes: u64,
}

impl Default for ExportConfig {
    fn default() -> Self {
        Self {
            layout: Layout::ChannelStack,
            t_out: 256,
            cache_max_bytes: 1 << 30,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub stft: StftConfig,
    pub windows: WindowSet,
    pub fda: FdaConfig,
    pub mda: MdaConfig,
    pub plan: PlanConfig,
    pub export: ExportConfig,
}

impl PipelineConfig {
    /// Defaults plus the policy mix of the reference setup: two window
    /// variants, six motion-aware variants and one grouped mix.
    pub fn reference() -> Self {
        Self {
            plan: PlanConfig {
                tda: 2,
                mda: 6,
                gsm: 1,
                ..PlanConfig::default()
            },
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::config(format!("config: {e}")))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: Self =
            serde_json::from_value(value).map_err(|e| Error::config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Applies a `section.key=value` override; the value is read as JSON when
    /// it parses, otherwise as a string.
    pub fn apply_override(value: &mut Value, assignment: &str) -> Result<()> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(format!("override {assignment:?} is not key=value")))?;
        let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut node = value;
        let keys: Vec<&str> = path.split('.').collect();
        for (i, key) in keys.iter().enumerate() {
            let obj = node
                .as_object_mut()
                .ok_or_else(|| Error::config(format!("override path {path:?} is not an object")))?;
            if i + 1 == keys.len() {
                obj.insert(key.to_string(), parsed);
                return Ok(());
            }
            node = obj
                .entry(key.to_string())
                .or_insert_with(|| Value::Object(Default::default()));
        }
        Err(Error::config("empty override path"))
    }

    pub fn validate(&self) -> Result<()> {
        self.windows.validate()?;
        self.mda.validate()?;
        if self.stft.window_len != self.windows.default_len {
            return Err(Error::config(format!(
                "stft.window_len {} differs from windows.default_len {}",
                self.stft.window_len, self.windows.default_len
            )));
        }
        if self.export.t_out == 0 {
            return Err(Error::config("export.t_out must be at least 1"));
        }
        let f = &self.fda;
        if f.k == 0 {
            return Err(Error::config("fda.k must be at least 1"));
        }
        if f.g_count == 0 || f.top > f.g_count {
            return Err(Error::config(format!(
                "fda needs 1 <= g_count and top <= g_count, got g_count={} top={}",
                f.g_count, f.top
            )));
        }
        if !(f.ms_window_s > 0.0) {
            return Err(Error::config("fda.ms_window_s must be positive"));
        }
        if self.plan.tda > self.windows.alternates().len() {
            return Err(Error::config(format!(
                "plan.tda={} but only {} alternate windows exist",
                self.plan.tda,
                self.windows.alternates().len()
            )));
        }
        if self.plan.iss.contains(&0) {
            return Err(Error::config("plan.iss entries must be at least 1"));
        }
        Ok(())
    }
}
