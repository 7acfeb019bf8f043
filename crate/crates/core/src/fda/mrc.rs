use super::GroupingResult;
use crate::csi::{Channel, Origin, Spectrogram};
use crate::error::{Error, Result};

/// Motion-weighted combination of one group of spectrograms.
///
/// Computes `S_g(b, n) = (1 / N_g) * Σ_f ω(f, n) * S_f(b, n)` with every
/// weight clamped to `[0, 1]`. `weights[i]` holds one weight per time bin of
/// `specs[i]`. With `normalized` the sum is divided by `Σ_f ω(f, n)` instead
/// of `N_g` (columns with zero total weight become zero).
pub fn mrc_combine(
    specs: &[&Spectrogram],
    weights: &[&[f64]],
    normalized: bool,
) -> Result<Spectrogram> {
    let Some(first) = specs.first() else {
        return Err(Error::arg("cannot combine an empty group"));
    };
    if weights.len() != specs.len() {
        return Err(Error::arg(format!(
            "{} spectrograms but {} weight rows",
            specs.len(),
            weights.len()
        )));
    }
    let (rows, cols) = first.shape();
    for (s, w) in specs.iter().zip(weights) {
        if s.shape() != (rows, cols) {
            return Err(Error::arg("group spectrograms must share one shape"));
        }
        if w.len() != cols {
            return Err(Error::arg(format!(
                "weight row has {} entries for {cols} time bins",
                w.len()
            )));
        }
    }

    let mut out = vec![0.0; rows * cols];
    let mut totals = vec![0.0; cols];
    for (s, w) in specs.iter().zip(weights) {
        let v = s.values();
        for n in 0..cols {
            let wn = w[n].clamp(0.0, 1.0);
            totals[n] += wn;
            if wn == 0.0 {
                continue;
            }
            for b in 0..rows {
                out[b * cols + n] += wn * v[b * cols + n];
            }
        }
    }
    let n_g = specs.len() as f64;
    for n in 0..cols {
        let denom = if normalized { totals[n] } else { n_g };
        for b in 0..rows {
            let cell = &mut out[b * cols + n];
            *cell = if denom > 0.0 { *cell / denom } else { 0.0 };
        }
    }
    Ok(Spectrogram::from_parts_unchecked(
        out,
        first.bin_freqs_hz().to_vec(),
        first.bin_times_s().to_vec(),
        Origin {
            source: first.origin.source.clone(),
            channel: Channel::Unknown,
            window_len: first.origin.window_len,
        },
    ))
}

/// Group ids by descending score, first `top`; ties favour lower ids.
pub fn top_g_indices(scores: &[f64], top: usize) -> Result<Vec<usize>> {
    if top > scores.len() {
        return Err(Error::arg(format!(
            "asked for top {top} of {} groups",
            scores.len()
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(top);
    Ok(order)
}

/// Groups with the largest motion-statistic sums.
pub fn top_g_groups(grouping: &GroupingResult, top: usize) -> Result<Vec<usize>> {
    top_g_indices(&grouping.group_ms_sum, top)
}
