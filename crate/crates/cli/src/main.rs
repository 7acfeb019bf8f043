//! `rfaug` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use rfaug::fda::{pca_components, select_baseline};
use rfaug::io::{read_csi, write_csi};
use rfaug::motion::{global_ms, motion_profile};
use rfaug::pipeline::{
    build_plan, export_dataset, parse_predictions, validate_manifest, vote_by_sample, CacheStore,
    Layout, Pipeline, PipelineConfig,
};
use rfaug::synth::{generate, PathSpec};
use rfaug::{Error, SampleRecord, SceneSpec, SelectionMethod};

#[derive(Parser, Debug)]
#[command(
    name = "rfaug",
    version,
    about = "Augment WiFi CSI recordings into Doppler spectrogram datasets"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Pipeline configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration value, e.g. `fda.k=8`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Progress messages on stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print dimensions and summary statistics of a recording.
    Inspect { input: PathBuf },
    /// Print per-subcarrier motion statistics.
    Ms {
        input: PathBuf,
        /// Also print the sliding statistic of every time bin.
        #[arg(long)]
        sliding: bool,
        /// Print detected motion intervals (time-bin indices).
        #[arg(long)]
        intervals: bool,
    },
    /// Print the subcarriers chosen by a selection method.
    Select {
        input: PathBuf,
        #[arg(long, default_value = "iss")]
        method: String,
        /// Subcarriers per link; defaults to `fda.k`.
        #[arg(long)]
        k: Option<usize>,
        /// Seed for the `random` method.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Augment individual recordings into a dataset directory.
    Augment {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        /// Label recorded for every input.
        #[arg(long, default_value = "unknown")]
        label: String,
        /// Environment tag shared by every input.
        #[arg(long)]
        env: Option<String>,
    },
    /// Augment every recording listed in a dataset index.
    Export {
        /// JSON list of {id, path, label, env_tag}; paths relative to the index.
        #[arg(long)]
        index: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Generate synthetic recordings with ground truth.
    Synth {
        /// Scene description (JSON); a walking scene when omitted.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Output file, or directory when `--count` is given.
        #[arg(long)]
        out: PathBuf,
        /// Number of recordings; writes a dataset index next to them.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Majority-vote predictions of augmented test inputs.
    Vote { predictions: PathBuf },
    /// Check an exported dataset against its manifest.
    Validate { dir: PathBuf },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    layout: Option<LayoutArg>,
    /// Spectrogram cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Parallel workers.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
#[value(rename_all = "snake_case")]
enum LayoutArg {
    ChannelStack,
    PerSample,
}

impl From<LayoutArg> for Layout {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::ChannelStack => Layout::ChannelStack,
            LayoutArg::PerSample => Layout::PerSample,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexEntry {
    id: String,
    path: PathBuf,
    #[serde(default)]
    label: String,
    #[serde(default)]
    env_tag: Option<String>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Argument(_) | Error::Config(_) => 1,
        Error::Format(_)
        | Error::Corrupt(_)
        | Error::Value { .. }
        | Error::Validation(_)
        | Error::Cache { .. } => 2,
        Error::Io(_) | Error::IoAt { .. } => 3,
    }
}

fn load_config(global: &Global) -> rfaug::Result<PipelineConfig> {
    let mut value = match &global.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::IoAt {
                path: path.clone(),
                source: e,
            })?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => PipelineConfig::default().to_value(),
    };
    for o in &global.overrides {
        PipelineConfig::apply_override(&mut value, o)?;
    }
    PipelineConfig::from_value(value)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn inspect(input: &Path) -> rfaug::Result<()> {
    let csi = read_csi(input)?;
    println!(
        "T={} F={} L={} rate={}",
        csi.t_count(),
        csi.f_count(),
        csi.l_count(),
        csi.sample_rate_hz()
    );
    let amp: Vec<f64> = csi.raw().iter().map(|c| f64::from(c.norm())).collect();
    let mean = amp.iter().sum::<f64>() / amp.len() as f64;
    let (min, max) = amp
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(*v), b.max(*v))
        });
    println!("duration_s={}", csi.duration_s());
    println!("amplitude_mean={mean} amplitude_min={min} amplitude_max={max}");
    Ok(())
}

fn ms(cfg: &PipelineConfig, input: &Path, sliding: bool, intervals: bool) -> rfaug::Result<()> {
    let csi = read_csi(input)?;
    let l_count = csi.l_count();
    if !(sliding || intervals) {
        for (i, m) in global_ms(&csi).iter().enumerate() {
            println!("{},{},{m}", i / l_count, i % l_count);
        }
        return Ok(());
    }
    let window = (cfg.fda.ms_window_s * csi.sample_rate_hz()).round() as usize;
    let profile = motion_profile(&csi, window, cfg.stft.hop, None)?;
    if sliding {
        for (i, row) in profile.ms_sliding.iter().enumerate() {
            let mut line = format!("{},{},{}", i / l_count, i % l_count, profile.ms_global[i]);
            for v in row {
                line.push_str(&format!(",{v}"));
            }
            println!("{line}");
        }
    }
    if intervals {
        println!("threshold={}", profile.threshold);
        for iv in &profile.intervals {
            println!("interval={},{}", iv.start, iv.end);
        }
    }
    Ok(())
}

fn select(
    cfg: &PipelineConfig,
    input: &Path,
    method: &str,
    k: Option<usize>,
    seed: u64,
) -> rfaug::Result<()> {
    let csi = read_csi(input)?;
    let method: SelectionMethod = method.parse()?;
    let k = k.unwrap_or(cfg.fda.k);
    println!("method={method} k={k}");
    if method == SelectionMethod::Pca {
        for l in 0..csi.l_count() {
            let p = pca_components(&csi.amplitude_matrix(l), csi.t_count(), csi.f_count(), k)?;
            for (c, ev) in p.eigenvalues.iter().enumerate() {
                println!("{c},{l},{ev}");
            }
        }
        return Ok(());
    }
    let sel = select_baseline(&csi, &global_ms(&csi), method, k, seed)?;
    for (f, l) in sel.indices {
        println!("{f},{l}");
    }
    Ok(())
}

fn run_export(
    cfg: PipelineConfig,
    samples: &[SampleRecord],
    run: &RunArgs,
    verbose: u8,
) -> rfaug::Result<()> {
    if run.jobs == 0 {
        return Err(Error::Argument("--jobs must be at least 1".into()));
    }
    let layout = run.layout.map_or(cfg.export.layout, Layout::from);
    let cache_bytes = cfg.export.cache_max_bytes;
    let mut pipeline = Pipeline::new(cfg)?;
    if let Some(dir) = &run.cache {
        pipeline = pipeline.with_cache(CacheStore::open(dir, cache_bytes)?);
    }
    let plan = build_plan(pipeline.config(), run.seed)?;
    let manifest = export_dataset(&pipeline, samples, &plan, &run.out, layout, run.jobs)?;
    if verbose > 0 {
        eprintln!(
            "{} samples, {} stft computations",
            samples.len(),
            pipeline.stats().stft_computations()
        );
    }
    println!(
        "entries={} base={} aratio={} manifest={}",
        manifest.entries.len(),
        manifest.base_count(),
        manifest.aratio,
        run.out.join(rfaug::pipeline::MANIFEST_NAME).display()
    );
    Ok(())
}

fn read_index(path: &Path) -> rfaug::Result<Vec<SampleRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::IoAt {
        path: path.to_path_buf(),
        source: e,
    })?;
    let entries: Vec<IndexEntry> = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    entries
        .into_iter()
        .map(|e| {
            let csi = read_csi(base.join(&e.path))?;
            let s = SampleRecord::new(e.id, csi, e.label);
            Ok(match e.env_tag {
                Some(tag) => s.with_env_tag(tag),
                None => s,
            })
        })
        .collect()
}

fn default_scene() -> SceneSpec {
    SceneSpec::new(3.0, 1000.0, 30, 1)
        .with_path(PathSpec::new(1.0, 0.0))
        .with_path(PathSpec::new(0.5, 40.0).active(1.0, 2.0))
        .with_noise(0.05)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> rfaug::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::IoAt {
        path: path.to_path_buf(),
        source: e,
    })
}

fn synth(scene: Option<&Path>, seed: u64, out: &Path, count: Option<usize>) -> rfaug::Result<()> {
    let scene = match scene {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::IoAt {
                path: path.to_path_buf(),
                source: e,
            })?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
        }
        None => default_scene(),
    };
    let write_one = |path: &Path, seed: u64| -> rfaug::Result<()> {
        let (csi, truth) = generate(&scene, seed)?;
        write_csi(&csi, path)?;
        write_json(&path.with_extension("truth.json"), &truth)?;
        println!("{}", path.display());
        Ok(())
    };
    let Some(count) = count else {
        return write_one(out, seed);
    };
    fs::create_dir_all(out).map_err(|e| Error::IoAt {
        path: out.to_path_buf(),
        source: e,
    })?;
    let mut index = Vec::with_capacity(count);
    for i in 0..count {
        let name = format!("scene{i:04}.rfb");
        write_one(
            &out.join(&name),
            rfaug::rng::derive_seed(seed, &format!("scene/{i}")),
        )?;
        index.push(serde_json::json!({
            "id": format!("scene{i:04}"),
            "path": name,
            "label": "motion",
            "env_tag": null,
        }));
    }
    write_json(&out.join("index.json"), &index)
}

fn vote(path: &Path) -> rfaug::Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::IoAt {
        path: path.to_path_buf(),
        source: e,
    })?;
    let rows = parse_predictions(&text)?;
    let votes = vote_by_sample(&rows)?;
    if votes.len() == 1 {
        println!("{}", votes[0].1);
    } else {
        for (id, label) in votes {
            println!("{id},{label}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> rfaug::Result<()> {
    let cfg = load_config(&cli.global)?;
    let verbose = cli.global.verbose;
    match cli.command {
        Command::Inspect { input } => inspect(&input),
        Command::Ms {
            input,
            sliding,
            intervals,
        } => ms(&cfg, &input, sliding, intervals),
        Command::Select {
            input,
            method,
            k,
            seed,
        } => select(&cfg, &input, &method, k, seed),
        Command::Augment {
            inputs,
            run,
            label,
            env,
        } => {
            let samples = inputs
                .iter()
                .map(|p| {
                    let s = SampleRecord::new(stem(p), read_csi(p)?, label.clone());
                    Ok(match &env {
                        Some(tag) => s.with_env_tag(tag.clone()),
                        None => s,
                    })
                })
                .collect::<rfaug::Result<Vec<_>>>()?;
            run_export(cfg, &samples, &run, verbose)
        }
        Command::Export { index, run } => run_export(cfg, &read_index(&index)?, &run, verbose),
        Command::Synth {
            scene,
            seed,
            out,
            count,
        } => synth(scene.as_deref(), seed, &out, count),
        Command::Vote { predictions } => vote(&predictions),
        Command::Validate { dir } => {
            let m = validate_manifest(&dir)?;
            println!(
                "ok entries={} base={} aratio={}",
                m.entries.len(),
                m.base_count(),
                m.aratio
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rfaug: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
