//! Physical data augmentation for WiFi channel state information.
//!
//! The crate turns raw CSI recordings into Doppler spectrogram datasets and
//! multiplies them with augmentation policies that follow the physics of the
//! radio channel:
//!
//! * frequency diversity: informative subcarrier selection and grouped
//!   subcarrier mixing ([`fda`]),
//! * time diversity: spectrograms regenerated with lengthened and shortened
//!   STFT windows under a fixed DFT size ([`spectro`]),
//! * motion awareness: random erasing and circular shifting bounded by the
//!   detected motion period ([`mda`]).
//!
//! [`pipeline`] composes these into plans with exact augmentation-ratio
//! accounting, caches intermediate spectrograms and exports manifest-indexed
//! datasets. [`synth`] generates multipath CSI with known Doppler ground
//! truth for verification.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::needless_range_loop))]

pub mod csi;
pub mod error;
pub mod fda;
pub mod io;
pub mod mda;
pub mod motion;
pub mod pipeline;
pub mod rng;
pub mod spectro;
pub mod synth;

pub use csi::{CsiTensor, Origin, SampleRecord, Spectrogram};
pub use error::{Error, Result};
pub use fda::{GroupingResult, SelectionMethod, SelectionResult};
pub use mda::{FillMode, MdaConfig};
pub use motion::{Interval, MotionProfile};
pub use pipeline::{
    AugPlan, CacheStore, DatasetManifest, Descriptor, Layout, Pipeline, PipelineConfig, VariantSet,
};
pub use spectro::{InputMode, StftConfig, WindowFn, WindowSet};
pub use synth::{GroundTruth, SceneSpec};

pub use num_complex::Complex64;
