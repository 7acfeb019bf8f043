//! Frequency-domain augmentation.
//!
//! Informative subcarrier selection picks the highest-motion subcarrier in
//! each of K uniform sub-bands. Grouped subcarrier mixing clusters the
//! per-subcarrier spectrograms with k-means and combines every group with
//! motion-statistic weights (maximal ratio combining). The remaining
//! selectors are baselines for comparison.

mod kmeans;
mod mrc;
mod pca;
mod select;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use kmeans::{kmeans, kmeans_group, KMeans};
pub use mrc::{mrc_combine, top_g_groups, top_g_indices};
pub use pca::{pca_components, PcaResult};
pub use select::{select_baseline, select_iss, select_iss_link, sub_bands, top_k_indices};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    Iss,
    TopMs,
    TopMean,
    TopVar,
    Random,
    Pca,
}

impl SelectionMethod {
    pub const ALL: [SelectionMethod; 6] = [
        SelectionMethod::Iss,
        SelectionMethod::TopMs,
        SelectionMethod::TopMean,
        SelectionMethod::TopVar,
        SelectionMethod::Random,
        SelectionMethod::Pca,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SelectionMethod::Iss => "iss",
            SelectionMethod::TopMs => "top_ms",
            SelectionMethod::TopMean => "top_mean",
            SelectionMethod::TopVar => "top_var",
            SelectionMethod::Random => "random",
            SelectionMethod::Pca => "pca",
        }
    }
}

impl fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown selection method {s:?}")))
    }
}

/// Selected `(subcarrier, link)` pairs, ordered by link then subcarrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionResult {
    pub indices: Vec<(usize, usize)>,
    pub method: SelectionMethod,
    pub k: usize,
}

/// Partition of spectrograms into groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupingResult {
    /// Group id of each input spectrogram.
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of whole-record motion statistics over each group's members.
    pub group_ms_sum: Vec<f64>,
    /// Inertia after every assignment/update round.
    pub inertia_history: Vec<f64>,
}

impl GroupingResult {
    pub fn g_count(&self) -> usize {
        self.group_ms_sum.len()
    }

    pub fn members(&self, group: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, g)| **g == group)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.g_count()];
        for g in &self.assignment {
            sizes[*g] += 1;
        }
        sizes
    }
}
