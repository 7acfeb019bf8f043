use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Layout;
use super::plan::{AugPlan, Descriptor};
use super::{Pipeline, VariantSet};
use crate::csi::SampleRecord;
use crate::error::{Error, Result};
use crate::io::{encode_spectrogram, read_spectrogram_stack, write_atomic};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const PARTIAL_MARKER: &str = ".partial";
const FORMAT: &str = "rfaug-manifest/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub sample_id: String,
    pub source_id: String,
    pub label: String,
    pub env_tag: Option<String>,
    pub variant: usize,
    /// `base` or the descriptor text of the variant.
    pub descriptor: String,
    /// Relative to the manifest directory.
    pub path: String,
    pub shape: Vec<usize>,
}

impl ManifestEntry {
    pub fn is_base(&self) -> bool {
        self.variant == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub layout: Layout,
    pub aratio: usize,
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn base_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_base()).count()
    }

    /// Number of distinct augmented variants exported per source id.
    pub fn variants_per_source(&self) -> HashMap<String, usize> {
        let mut seen: HashMap<String, HashSet<usize>> = HashMap::new();
        for e in &self.entries {
            let v = seen.entry(e.source_id.clone()).or_default();
            if !e.is_base() {
                v.insert(e.variant);
            }
        }
        seen.into_iter().map(|(k, v)| (k, v.len())).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

fn sanitize(id: &str) -> String {
    let s: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() || s.chars().all(|c| c == '.') {
        format!("_{s}")
    } else {
        s
    }
}

fn write_variant(
    out_dir: &Path,
    sample: &SampleRecord,
    dir_name: &str,
    set: &VariantSet,
    layout: Layout,
) -> Result<Vec<ManifestEntry>> {
    let descriptor = set.descriptor_text();
    let entry = |sample_id: String, path: String, shape: Vec<usize>| ManifestEntry {
        sample_id,
        source_id: sample.id.clone(),
        label: sample.label.clone(),
        env_tag: sample.env_tag.clone(),
        variant: set.variant,
        descriptor: descriptor.clone(),
        path,
        shape,
    };
    let Some(first) = set.spectrograms.first() else {
        return Err(Error::arg(format!(
            "variant {} of {} produced no spectrograms",
            set.variant, sample.id
        )));
    };
    let (rows, cols) = first.shape();
    match layout {
        Layout::ChannelStack => {
            if set.spectrograms.iter().any(|s| s.shape() != (rows, cols)) {
                return Err(Error::arg(format!(
                    "variant {} of {} mixes spectrogram shapes",
                    set.variant, sample.id
                )));
            }
            let rel = format!("{dir_name}/v{:02}.rfs", set.variant);
            let mut bytes = Vec::new();
            for s in &set.spectrograms {
                encode_spectrogram(s, &mut bytes);
            }
            write_atomic(&out_dir.join(&rel), &bytes)?;
            Ok(vec![entry(
                format!("{}#v{:02}", sample.id, set.variant),
                rel,
                vec![set.spectrograms.len(), rows, cols],
            )])
        }
        Layout::PerSample => set
            .spectrograms
            .iter()
            .enumerate()
            .map(|(c, s)| {
                let rel = format!("{dir_name}/v{:02}_c{c:02}.rfs", set.variant);
                let mut bytes = Vec::new();
                encode_spectrogram(s, &mut bytes);
                write_atomic(&out_dir.join(&rel), &bytes)?;
                let (r, k) = s.shape();
                Ok(entry(
                    format!("{}#v{:02}c{c:02}", sample.id, set.variant),
                    rel,
                    vec![r, k],
                ))
            })
            .collect(),
    }
}

/// Runs `plan` on every sample and writes tensors plus `manifest.json`.
///
/// Samples are processed on `jobs` worker threads; the manifest is written
/// last, so an interrupted export leaves only the `.partial` marker.
pub fn export_dataset(
    pipeline: &Pipeline,
    samples: &[SampleRecord],
    plan: &AugPlan,
    out_dir: &Path,
    layout: Layout,
    jobs: usize,
) -> Result<DatasetManifest> {
    let mut names = HashMap::new();
    for s in samples {
        let name = sanitize(&s.id);
        if let Some(prev) = names.insert(name.clone(), s.id.clone()) {
            return Err(Error::arg(if prev == s.id {
                format!("duplicate sample id {:?}", s.id)
            } else {
                format!(
                    "sample ids {prev:?} and {:?} map to one directory {name:?}",
                    s.id
                )
            }));
        }
    }

    fs::create_dir_all(out_dir).map_err(|e| Error::io_at(out_dir, e))?;
    let marker = out_dir.join(PARTIAL_MARKER);
    fs::write(&marker, b"").map_err(|e| Error::io_at(&marker, e))?;
    let manifest_path = out_dir.join(MANIFEST_NAME);
    match fs::remove_file(&manifest_path) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(Error::io_at(&manifest_path, e)),
    }

    let thresholds = pipeline.environment_thresholds(samples)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::arg(format!("cannot start {jobs} workers: {e}")))?;
    let per_sample: Vec<Vec<ManifestEntry>> = pool.install(|| {
        samples
            .par_iter()
            .map(|sample| {
                let threshold = sample
                    .env_tag
                    .as_ref()
                    .and_then(|t| thresholds.get(t))
                    .copied();
                let sets = pipeline.run_plan(sample, plan, threshold)?;
                let dir_name = sanitize(&sample.id);
                let dir = out_dir.join(&dir_name);
                fs::create_dir_all(&dir).map_err(|e| Error::io_at(&dir, e))?;
                let mut entries = Vec::new();
                for set in &sets {
                    entries.extend(write_variant(out_dir, sample, &dir_name, set, layout)?);
                }
                Ok(entries)
            })
            .collect::<Result<_>>()
    })?;

    let manifest = DatasetManifest {
        format: FORMAT.to_string(),
        layout,
        aratio: plan.aratio(),
        seed: plan.seed,
        entries: per_sample.into_iter().flatten().collect(),
    };
    write_atomic(&manifest_path, manifest.to_json().as_bytes())?;
    fs::remove_file(&marker).map_err(|e| Error::io_at(&marker, e))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|e| Error::io_at(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Checks an exported directory against its manifest.
pub fn validate_manifest(dir: &Path) -> Result<DatasetManifest> {
    if dir.join(PARTIAL_MARKER).exists() {
        return Err(Error::Validation(format!(
            "{} holds an incomplete export",
            dir.display()
        )));
    }
    let manifest = read_manifest(dir)?;
    if manifest.format != FORMAT {
        return Err(Error::Validation(format!(
            "unknown manifest format {:?}",
            manifest.format
        )));
    }
    let mut ids = HashSet::new();
    let mut bases = HashSet::new();
    for e in &manifest.entries {
        if !ids.insert(e.sample_id.as_str()) {
            return Err(Error::Validation(format!(
                "duplicate sample id {:?}",
                e.sample_id
            )));
        }
        if e.is_base() {
            bases.insert(e.source_id.as_str());
        }
    }
    for e in &manifest.entries {
        if !e.is_base() {
            if !bases.contains(e.source_id.as_str()) {
                return Err(Error::Validation(format!(
                    "{} names source {:?} without a base entry",
                    e.sample_id, e.source_id
                )));
            }
            e.descriptor.parse::<Descriptor>().map_err(|err| {
                Error::Validation(format!("{}: bad descriptor: {err}", e.sample_id))
            })?;
        } else if e.descriptor != "base" {
            return Err(Error::Validation(format!(
                "{}: base entry carries descriptor {:?}",
                e.sample_id, e.descriptor
            )));
        }
        let rel = Path::new(&e.path);
        if rel.is_absolute()
            || rel
                .components()
                .any(|c| matches!(c, std::path::Component::ParentDir))
        {
            return Err(Error::Validation(format!(
                "tensor path {} escapes the dataset",
                e.path
            )));
        }
        let path = dir.join(rel);
        if !path.is_file() {
            return Err(Error::Validation(format!(
                "missing tensor {}",
                path.display()
            )));
        }
        let specs = read_spectrogram_stack(&path).map_err(|err| {
            Error::Validation(format!("unreadable tensor {}: {err}", path.display()))
        })?;
        let shape = match manifest.layout {
            Layout::ChannelStack => {
                let (r, c) = specs.first().map_or((0, 0), |s| s.shape());
                vec![specs.len(), r, c]
            }
            Layout::PerSample if specs.len() == 1 => {
                let (r, c) = specs[0].shape();
                vec![r, c]
            }
            Layout::PerSample => vec![specs.len()],
        };
        if shape != e.shape || specs.iter().any(|s| s.shape() != specs[0].shape()) {
            return Err(Error::Validation(format!(
                "tensor {} has shape {shape:?}, manifest says {:?}",
                path.display(),
                e.shape
            )));
        }
    }
    Ok(manifest)
}
