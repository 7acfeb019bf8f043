use std::ops::Range;

use rand::seq::index::sample;

use super::{SelectionMethod, SelectionResult};
use crate::csi::CsiTensor;
use crate::error::{Error, Result};
use crate::rng;

/// Splits `f_count` subcarriers into `k` contiguous sub-bands; when the split
/// is uneven the earlier sub-bands are one wider.
pub fn sub_bands(f_count: usize, k: usize) -> Vec<Range<usize>> {
    let base = f_count / k;
    let extra = f_count % k;
    let mut start = 0;
    (0..k)
        .map(|b| {
            let len = base + usize::from(b < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

fn check_k(k: usize, available: usize) -> Result<()> {
    if k == 0 || k > available {
        return Err(Error::arg(format!(
            "k must lie in 1..={available}, got {k}"
        )));
    }
    Ok(())
}

/// Highest-scoring index of each sub-band of one link; ties go to the lower
/// index.
pub fn select_iss_link(ms: &[f64], k: usize) -> Result<Vec<usize>> {
    check_k(k, ms.len())?;
    Ok(sub_bands(ms.len(), k)
        .into_iter()
        .map(|band| {
            band.clone().fold(
                band.start,
                |best, i| if ms[i] > ms[best] { i } else { best },
            )
        })
        .collect())
}

fn link_scores(scores: &[f64], f_count: usize, l_count: usize, l: usize) -> Vec<f64> {
    (0..f_count).map(|f| scores[f * l_count + l]).collect()
}

/// Informative subcarrier selection, run independently on every link.
///
/// `ms_global` is indexed `f * L + l`.
pub fn select_iss(
    ms_global: &[f64],
    f_count: usize,
    l_count: usize,
    k: usize,
) -> Result<SelectionResult> {
    if ms_global.len() != f_count * l_count {
        return Err(Error::arg(format!(
            "expected {} motion statistics, got {}",
            f_count * l_count,
            ms_global.len()
        )));
    }
    check_k(k, f_count)?;
    let mut indices = Vec::with_capacity(k * l_count);
    for l in 0..l_count {
        let ms = link_scores(ms_global, f_count, l_count, l);
        indices.extend(select_iss_link(&ms, k)?.into_iter().map(|f| (f, l)));
    }
    Ok(SelectionResult {
        indices,
        method: SelectionMethod::Iss,
        k,
    })
}

/// The `k` highest scores, returned in ascending index order; ties favour
/// lower indices.
pub fn top_k_indices(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    check_k(k, scores.len())?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut top = order[..k].to_vec();
    top.sort_unstable();
    Ok(top)
}

fn mean_amplitude(csi: &CsiTensor, f: usize, l: usize) -> f64 {
    (0..csi.t_count())
        .map(|t| csi.get(t, f, l).norm())
        .sum::<f64>()
        / csi.t_count() as f64
}

fn power_variance(csi: &CsiTensor, f: usize, l: usize) -> f64 {
    let p = csi.power_series(f, l);
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    p.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / p.len() as f64
}

/// Per-link selection with a baseline criterion.
///
/// `pca` produces synthetic series rather than subcarrier indices and is
/// served by [`super::pca_components`].
pub fn select_baseline(
    csi: &CsiTensor,
    ms_global: &[f64],
    method: SelectionMethod,
    k: usize,
    seed: u64,
) -> Result<SelectionResult> {
    let (f_count, l_count) = (csi.f_count(), csi.l_count());
    if method == SelectionMethod::Iss {
        return select_iss(ms_global, f_count, l_count, k);
    }
    check_k(k, f_count)?;
    let mut indices = Vec::with_capacity(k * l_count);
    for l in 0..l_count {
        let chosen = match method {
            SelectionMethod::TopMs => {
                top_k_indices(&link_scores(ms_global, f_count, l_count, l), k)?
            }
            SelectionMethod::TopMean => {
                let s: Vec<f64> = (0..f_count).map(|f| mean_amplitude(csi, f, l)).collect();
                top_k_indices(&s, k)?
            }
            SelectionMethod::TopVar => {
                let s: Vec<f64> = (0..f_count).map(|f| power_variance(csi, f, l)).collect();
                top_k_indices(&s, k)?
            }
            SelectionMethod::Random => {
                let mut r = rng::scoped_stream(seed, &format!("random-select/link{l}"));
                let mut v = sample(&mut r, f_count, k).into_vec();
                v.sort_unstable();
                v
            }
            SelectionMethod::Pca | SelectionMethod::Iss => {
                return Err(Error::arg(format!(
                    "{method} is not an index-selection baseline"
                )))
            }
        };
        indices.extend(chosen.into_iter().map(|f| (f, l)));
    }
    Ok(SelectionResult { indices, method, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn iss_examples() {
        let ms = [0.1, 0.9, 0.2, 0.3, 0.8, 0.4];
        assert_eq!(select_iss_link(&ms, 3).unwrap(), vec![1, 3, 4]);
        assert_eq!(select_iss_link(&ms, 6).unwrap(), (0..6).collect::<Vec<_>>());
        assert!(matches!(select_iss_link(&ms, 7), Err(Error::Argument(_))));
        assert!(select_iss_link(&ms, 0).is_err());
    }

    #[test]
    fn uneven_bands_front_loaded() {
        let bands = sub_bands(10, 4);
        assert_eq!(bands, vec![0..3, 3..6, 6..8, 8..10]);
        assert_eq!(
            sub_bands(90, 6).iter().map(|b| b.len()).collect::<Vec<_>>(),
            vec![15; 6]
        );
    }

    #[test]
    fn iss_per_link_union() {
        // F=4, L=2: link 0 favours 1 and 2, link 1 favours 0 and 3
        let ms = [0.1, 0.9, 0.8, 0.2, 0.7, 0.1, 0.0, 0.95];
        let r = select_iss(&ms, 4, 2, 2).unwrap();
        assert_eq!(r.indices, vec![(1, 0), (2, 0), (0, 1), (3, 1)]);
    }

    #[test]
    fn baselines() {
        let ms = [0.1, 0.9, 0.2, 0.3, 0.8, 0.4];
        assert_eq!(top_k_indices(&ms, 2).unwrap(), vec![1, 4]);

        let csi =
            CsiTensor::from_f64(&vec![Complex64::new(1.0, 1.0); 20 * 5], 20, 5, 1, 100.0).unwrap();
        let flat = vec![0.0; 5];
        for k in 1..=5 {
            let r = select_baseline(&csi, &flat, SelectionMethod::TopVar, k, 0).unwrap();
            assert_eq!(r.indices, (0..k).map(|f| (f, 0)).collect::<Vec<_>>());
        }
        let a = select_baseline(&csi, &flat, SelectionMethod::Random, 3, 42).unwrap();
        let b = select_baseline(&csi, &flat, SelectionMethod::Random, 3, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.indices.len(), 3);
        assert!(select_baseline(&csi, &flat, SelectionMethod::Pca, 2, 0).is_err());
    }

    #[test]
    fn top_mean_uses_amplitude() {
        let data: Vec<Complex64> = (0..10)
            .flat_map(|_| [1.0, 3.0, 2.0].map(|a| Complex64::new(a, 0.0)))
            .collect();
        let csi = CsiTensor::from_f64(&data, 10, 3, 1, 100.0).unwrap();
        let r = select_baseline(&csi, &[0.0; 3], SelectionMethod::TopMean, 1, 0).unwrap();
        assert_eq!(r.indices, vec![(1, 0)]);
    }

    proptest! {
        #[test]
        fn iss_picks_band_maxima(
            ms in proptest::collection::vec(-1.0f64..1.0, 1..40),
            k_raw in 1usize..40,
            scale in 0.1f64..10.0,
            shift in -5.0f64..5.0,
        ) {
            let k = 1 + (k_raw - 1) % ms.len();
            let picked = select_iss_link(&ms, k).unwrap();
            let bands = sub_bands(ms.len(), k);
            prop_assert_eq!(picked.len(), k);
            for (i, band) in picked.iter().zip(&bands) {
                prop_assert!(band.contains(i));
                prop_assert!(band.clone().all(|j| ms[*i] >= ms[j]));
            }
            let rescaled: Vec<f64> = ms.iter().map(|v| v * scale + shift).collect();
            prop_assert_eq!(select_iss_link(&rescaled, k).unwrap(), picked);
        }
    }
}
