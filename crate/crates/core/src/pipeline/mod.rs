//! Plan composition, per-sample execution, export and prediction voting.

mod cache;
mod config;
mod export;
mod plan;
mod vote;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;

pub use cache::{content_hash, CacheStore};
pub use config::{ExportConfig, FdaConfig, GroupingMode, Layout, PipelineConfig, PlanConfig};
pub use export::{
    export_dataset, read_manifest, validate_manifest, DatasetManifest, ManifestEntry,
    MANIFEST_NAME, PARTIAL_MARKER,
};
pub use plan::{build_plan, AugPlan, Descriptor};
pub use vote::{parse_predictions, tta_vote, vote_by_sample, Prediction};

use crate::csi::{Channel, Origin, SampleRecord, Spectrogram};
use crate::error::{Error, Result};
use crate::fda::{
    kmeans_group, mrc_combine, pca_components, select_baseline, select_iss, top_g_indices,
    GroupingResult, PcaResult, SelectionMethod,
};
use crate::io::encode_csi;
use crate::mda::{apply_erase, circular_shift, draw_erase_window, draw_shift, masked_columns};
use crate::motion::{
    detect_motion, motion_profile, quartile_threshold, sliding_ms_samples, time_bin_count,
    Interval, MotionProfile,
};
use crate::rng;
use crate::spectro::{align, align_values, aligned_source_columns, Stft, StftConfig};

/// Spectrograms of one variant of one sample; variant 0 is the base set.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantSet {
    pub variant: usize,
    pub descriptor: Option<Descriptor>,
    pub spectrograms: Vec<Spectrogram>,
}

impl VariantSet {
    pub fn descriptor_text(&self) -> String {
        self.descriptor
            .as_ref()
            .map_or_else(|| "base".to_string(), |d| d.to_string())
    }
}

/// Work counters, for verifying cache behaviour.
#[derive(Debug, Default)]
pub struct Stats {
    stft: AtomicUsize,
    kmeans: AtomicUsize,
}

impl Stats {
    pub fn stft_computations(&self) -> usize {
        self.stft.load(Ordering::Relaxed)
    }

    pub fn kmeans_runs(&self) -> usize {
        self.kmeans.load(Ordering::Relaxed)
    }
}

pub struct Pipeline {
    cfg: PipelineConfig,
    cache: Option<CacheStore>,
    stats: Stats,
}

/// Maps motion intervals on an `n`-column grid onto the aligned `t_out` grid.
pub fn remap_intervals(intervals: &[Interval], n: usize, t_out: usize) -> Vec<Interval> {
    let mut in_motion = vec![0.0; n];
    for iv in intervals {
        in_motion[iv.start..iv.end].fill(1.0);
    }
    let mapped: Vec<f64> = aligned_source_columns(n, t_out)
        .into_iter()
        .map(|src| src.map_or(0.0, |s| in_motion[s]))
        .collect();
    detect_motion(&mapped, 0.5)
}

/// Per-sample state shared by every descriptor of one run.
struct SampleRun<'a> {
    sample: &'a SampleRecord,
    hash: String,
    profile: MotionProfile,
    base_channels: Vec<Channel>,
    intervals: Vec<Interval>,
    /// ω rows aligned to `t_out`, indexed `f * L + l`.
    weights: Vec<Vec<f64>>,
    stfts: Mutex<HashMap<usize, std::sync::Arc<Stft>>>,
    pca: Mutex<HashMap<usize, std::sync::Arc<PcaResult>>>,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            cache: None,
            stats: Stats::default(),
        })
    }

    pub fn with_cache(mut self, cache: CacheStore) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn cache(&self) -> Option<&CacheStore> {
        self.cache.as_ref()
    }

    fn stft_config(&self, window_len: usize) -> StftConfig {
        self.cfg.stft.with_window(window_len)
    }

    fn ms_window(&self, rate: f64) -> Result<usize> {
        let w = (self.cfg.fda.ms_window_s * rate).round();
        if !(w >= 2.0) {
            return Err(Error::config(format!(
                "fda.ms_window_s={} covers fewer than 2 samples at {rate} Hz",
                self.cfg.fda.ms_window_s
            )));
        }
        Ok(w as usize)
    }

    /// Median of all sliding motion statistics of the tagged samples, per
    /// environment tag.
    pub fn environment_thresholds(&self, samples: &[SampleRecord]) -> Result<HashMap<String, f64>> {
        let mut pooled: HashMap<String, Vec<f64>> = HashMap::new();
        for s in samples {
            let Some(tag) = &s.env_tag else { continue };
            let ms = sliding_ms_samples(
                &s.csi,
                self.ms_window(s.csi.sample_rate_hz())?,
                self.cfg.stft.hop,
            )?;
            pooled
                .entry(tag.clone())
                .or_default()
                .extend(ms.into_iter().flatten());
        }
        pooled
            .into_iter()
            .map(|(tag, values)| Ok((tag, quartile_threshold(&values)?)))
            .collect()
    }

    /// Motion profile of a sample at the configured window and hop.
    pub fn motion_profile(
        &self,
        sample: &SampleRecord,
        threshold: Option<f64>,
    ) -> Result<MotionProfile> {
        let csi = &sample.csi;
        motion_profile(
            csi,
            self.ms_window(csi.sample_rate_hz())?,
            self.cfg.stft.hop,
            threshold,
        )
    }

    fn base_channels(
        &self,
        sample: &SampleRecord,
        profile: &MotionProfile,
        seed: u64,
    ) -> Result<Vec<Channel>> {
        let csi = &sample.csi;
        let k = self.cfg.fda.k;
        let selected = match self.cfg.fda.selector {
            SelectionMethod::Pca => {
                if k > csi.f_count() {
                    return Err(Error::arg(format!(
                        "fda.k={k} exceeds {} subcarriers",
                        csi.f_count()
                    )));
                }
                return Ok((0..csi.l_count())
                    .flat_map(|link| (0..k).map(move |index| Channel::Component { index, link }))
                    .collect());
            }
            SelectionMethod::Iss => {
                select_iss(&profile.ms_global, csi.f_count(), csi.l_count(), k)?
            }
            method => select_baseline(
                csi,
                &profile.ms_global,
                method,
                k,
                rng::derive_seed(seed, &format!("selector/{}", sample.id)),
            )?,
        };
        Ok(selected
            .indices
            .into_iter()
            .map(|(subcarrier, link)| Channel::Subcarrier { subcarrier, link })
            .collect())
    }

    fn stft_params(cfg: &StftConfig) -> String {
        format!(
            "v1;win={};hop={};ndft={};fn={:?};mode={:?};crop={:?};fold={}",
            cfg.window_len,
            cfg.hop,
            cfg.n_dft,
            cfg.window_fn,
            cfg.input_mode,
            cfg.crop_hz,
            cfg.fold
        )
    }

    fn stft_for(&self, run: &SampleRun<'_>, window_len: usize) -> Result<std::sync::Arc<Stft>> {
        let mut map = run.stfts.lock().unwrap();
        if let Some(s) = map.get(&window_len) {
            return Ok(s.clone());
        }
        let stft = std::sync::Arc::new(Stft::new(
            &self.stft_config(window_len),
            run.sample.csi.sample_rate_hz(),
        )?);
        map.insert(window_len, stft.clone());
        Ok(stft)
    }

    fn pca_for(&self, run: &SampleRun<'_>, link: usize) -> Result<std::sync::Arc<PcaResult>> {
        let mut map = run.pca.lock().unwrap();
        if let Some(p) = map.get(&link) {
            return Ok(p.clone());
        }
        let csi = &run.sample.csi;
        let p = std::sync::Arc::new(pca_components(
            &csi.amplitude_matrix(link),
            csi.t_count(),
            csi.f_count(),
            self.cfg.fda.k,
        )?);
        map.insert(link, p.clone());
        Ok(p)
    }

    fn channel_series(&self, run: &SampleRun<'_>, channel: Channel) -> Result<Vec<Complex64>> {
        let csi = &run.sample.csi;
        match channel {
            Channel::Subcarrier { subcarrier, link } => Ok(csi.series(subcarrier, link)),
            Channel::Component { index, link } => Ok(self.pca_for(run, link)?.components[index]
                .iter()
                .map(|v| Complex64::new(*v, 0.0))
                .collect()),
            other => Err(Error::arg(format!(
                "channel {other:?} has no source series"
            ))),
        }
    }

    /// Raw (unaligned) spectrogram of one channel, from cache when possible.
    fn raw_spectrogram(
        &self,
        run: &SampleRun<'_>,
        channel: Channel,
        window_len: usize,
    ) -> Result<Spectrogram> {
        let cfg = self.stft_config(window_len);
        let key = self.cache.as_ref().map(|_| {
            let params = match channel {
                Channel::Subcarrier { subcarrier, link } => format!("sub={subcarrier};link={link}"),
                Channel::Component { index, link } => {
                    format!("pca={index};of={};link={link}", self.cfg.fda.k)
                }
                _ => String::new(),
            };
            CacheStore::key(
                &run.hash,
                "stft",
                &format!("{params};{}", Self::stft_params(&cfg)),
            )
        });
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            if let Some(spec) = cache.get_spectrogram(key)? {
                return Ok(spec);
            }
        }
        let series = self.channel_series(run, channel)?;
        let mut spec = self.stft_for(run, window_len)?.compute(&series)?;
        self.stats.stft.fetch_add(1, Ordering::Relaxed);
        spec.quantize_f32();
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            cache.put_spectrogram(key, &spec)?;
        }
        Ok(spec)
    }

    fn spectrogram(
        &self,
        run: &SampleRun<'_>,
        channel: Channel,
        window_len: usize,
    ) -> Result<Spectrogram> {
        let raw = self.raw_spectrogram(run, channel, window_len)?;
        let origin = Origin {
            source: run.sample.id.clone(),
            channel,
            window_len,
        };
        Ok(align(&raw, self.cfg.export.t_out)?.with_origin(origin))
    }

    fn spectrograms(
        &self,
        run: &SampleRun<'_>,
        channels: &[Channel],
        window_len: usize,
    ) -> Result<Vec<Spectrogram>> {
        channels
            .iter()
            .map(|c| self.spectrogram(run, *c, window_len))
            .collect()
    }

    fn grouping(
        &self,
        run: &SampleRun<'_>,
        specs: &[Spectrogram],
        g_count: usize,
        seed: u64,
    ) -> Result<GroupingResult> {
        let csi = &run.sample.csi;
        let (f_count, l_count) = (csi.f_count(), csi.l_count());
        let seed = rng::derive_seed(seed, &run.sample.id);
        let ms = &run.profile.ms_global;
        let key = self.cache.as_ref().map(|_| {
            CacheStore::key(
                &run.hash,
                "kmeans",
                &format!(
                    "g={g_count};seed={seed};mode={:?};t_out={};{}",
                    self.cfg.fda.grouping,
                    self.cfg.export.t_out,
                    Self::stft_params(&self.stft_config(self.cfg.windows.default_len))
                ),
            )
        });
        let from_assignment = |assignment: Vec<usize>, groups: usize| {
            let mut group_ms_sum = vec![0.0; groups];
            for (g, m) in assignment.iter().zip(ms) {
                group_ms_sum[*g] += m;
            }
            GroupingResult {
                assignment,
                centroids: Vec::new(),
                group_ms_sum,
                inertia_history: Vec::new(),
            }
        };
        let groups = match self.cfg.fda.grouping {
            GroupingMode::Joint => g_count,
            GroupingMode::PerLink => g_count * l_count,
        };
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            if let Some(assignment) = cache.get_json::<Vec<usize>>(key)? {
                if assignment.len() == specs.len() && assignment.iter().all(|g| *g < groups) {
                    return Ok(from_assignment(assignment, groups));
                }
                return Err(Error::Cache {
                    key: key.clone(),
                    detail: "grouping does not match the recording".into(),
                });
            }
        }
        let refs: Vec<&Spectrogram> = specs.iter().collect();
        let result = match self.cfg.fda.grouping {
            GroupingMode::Joint => kmeans_group(&refs, g_count, seed, ms)?,
            GroupingMode::PerLink => {
                let mut assignment = vec![0; specs.len()];
                for l in 0..l_count {
                    let idx: Vec<usize> = (0..f_count).map(|f| f * l_count + l).collect();
                    let link_refs: Vec<&Spectrogram> = idx.iter().map(|i| refs[*i]).collect();
                    let link_ms: Vec<f64> = idx.iter().map(|i| ms[*i]).collect();
                    let g = kmeans_group(
                        &link_refs,
                        g_count,
                        rng::derive_seed(seed, &format!("link{l}")),
                        &link_ms,
                    )?;
                    for (i, a) in idx.iter().zip(g.assignment) {
                        assignment[*i] = l * g_count + a;
                    }
                }
                from_assignment(assignment, groups)
            }
        };
        self.stats.kmeans.fetch_add(1, Ordering::Relaxed);
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            cache.put_json(key, &result.assignment)?;
        }
        Ok(result)
    }

    fn gsm_variant(
        &self,
        run: &SampleRun<'_>,
        base: &[Spectrogram],
        g_count: usize,
        top: usize,
        seed: u64,
    ) -> Result<Vec<Spectrogram>> {
        let csi = &run.sample.csi;
        let (f_count, l_count) = (csi.f_count(), csi.l_count());
        let per_group_pool = match self.cfg.fda.grouping {
            GroupingMode::Joint => f_count * l_count,
            GroupingMode::PerLink => f_count,
        };
        if g_count == 0 || g_count > per_group_pool {
            return Err(Error::arg(format!(
                "cannot form {g_count} groups from {per_group_pool} subcarriers"
            )));
        }
        let all: Vec<Channel> = (0..f_count)
            .flat_map(|subcarrier| {
                (0..l_count).map(move |link| Channel::Subcarrier { subcarrier, link })
            })
            .collect();
        let specs = self.spectrograms(run, &all, self.cfg.windows.default_len)?;
        let grouping = self.grouping(run, &specs, g_count, seed)?;
        let t_out = self.cfg.export.t_out;
        let replicated: Vec<Vec<f64>>;
        let weights: &[Vec<f64>] = if self.cfg.fda.time_varying_weights {
            &run.weights
        } else {
            replicated = run
                .profile
                .ms_global
                .iter()
                .map(|m| vec![*m; t_out])
                .collect();
            &replicated
        };
        let mut out = base.to_vec();
        for g in top_g_indices(&grouping.group_ms_sum, top)? {
            let members = grouping.members(g);
            let member_specs: Vec<&Spectrogram> = members.iter().map(|i| &specs[*i]).collect();
            let member_w: Vec<&[f64]> = members.iter().map(|i| weights[*i].as_slice()).collect();
            let mixed = mrc_combine(&member_specs, &member_w, self.cfg.fda.normalized_mrc)?;
            out.push(mixed.with_origin(Origin {
                source: run.sample.id.clone(),
                channel: Channel::Group(g),
                window_len: self.cfg.windows.default_len,
            }));
        }
        Ok(out)
    }

    /// Runs the base pipeline and every descriptor of `plan` on one sample.
    ///
    /// `threshold` is the motion threshold of the sample's environment; the
    /// sample's own median is used when it is `None`.
    pub fn run_plan(
        &self,
        sample: &SampleRecord,
        plan: &AugPlan,
        threshold: Option<f64>,
    ) -> Result<Vec<VariantSet>> {
        let csi = &sample.csi;
        let rate = csi.sample_rate_hz();
        let t_out = self.cfg.export.t_out;
        self.stft_config(self.cfg.windows.default_len)
            .validate(rate)?;

        let profile = self.motion_profile(sample, threshold)?;
        let n_native = time_bin_count(csi.t_count(), self.cfg.stft.hop);
        let intervals = remap_intervals(&profile.intervals, n_native, t_out);
        let weights = profile
            .ms_sliding
            .iter()
            .map(|row| align_values(row, 1, n_native, t_out))
            .collect();
        let base_channels = self.base_channels(sample, &profile, plan.seed)?;
        let run = SampleRun {
            sample,
            hash: content_hash(&encode_csi(csi)),
            profile,
            base_channels,
            intervals,
            weights,
            stfts: Mutex::new(HashMap::new()),
            pca: Mutex::new(HashMap::new()),
        };

        let base = self.spectrograms(&run, &run.base_channels, self.cfg.windows.default_len)?;
        let mut out = Vec::with_capacity(plan.aratio() + 1);
        for (i, d) in plan.descriptors.iter().enumerate() {
            let specs = match d {
                Descriptor::FdaIss { k } => {
                    let sel = select_iss(&run.profile.ms_global, csi.f_count(), csi.l_count(), *k)?;
                    let channels: Vec<Channel> = sel
                        .indices
                        .into_iter()
                        .map(|(subcarrier, link)| Channel::Subcarrier { subcarrier, link })
                        .collect();
                    self.spectrograms(&run, &channels, self.cfg.windows.default_len)?
                }
                Descriptor::FdaGsm { g_count, top, seed } => {
                    self.gsm_variant(&run, &base, *g_count, *top, *seed)?
                }
                Descriptor::Tda { window_len } => {
                    self.spectrograms(&run, &run.base_channels, *window_len)?
                }
                Descriptor::MdaErase(cfg) => {
                    cfg.validate()?;
                    let mut r = rng::scoped_stream(cfg.rng_seed, &sample.id);
                    let window = draw_erase_window(t_out, cfg, &mut r);
                    let masked = masked_columns(window, &run.intervals);
                    base.iter()
                        .map(|s| apply_erase(s, &masked, cfg.fill))
                        .collect()
                }
                Descriptor::MdaShift { seed } => {
                    let mut r = rng::scoped_stream(*seed, &sample.id);
                    let tau = draw_shift(t_out, &run.intervals, &mut r);
                    base.iter().map(|s| circular_shift(s, tau)).collect()
                }
            };
            out.push(VariantSet {
                variant: i + 1,
                descriptor: Some(d.clone()),
                spectrograms: specs,
            });
        }
        out.insert(
            0,
            VariantSet {
                variant: 0,
                descriptor: None,
                spectrograms: base,
            },
        );
        Ok(out)
    }
}
