use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// Projected series, one per component, each of length T.
    pub components: Vec<Vec<f64>>,
    /// Unit principal directions, one per component, each of length F.
    pub loadings: Vec<Vec<f64>>,
    /// Covariance eigenvalues, non-increasing.
    pub eigenvalues: Vec<f64>,
}

/// Projects the per-subcarrier demeaned `T x F` amplitude matrix (row-major)
/// onto its `count` leading principal directions.
///
/// Each direction's largest-magnitude loading is made positive.
pub fn pca_components(
    amplitude: &[f64],
    t_count: usize,
    f_count: usize,
    count: usize,
) -> Result<PcaResult> {
    if count == 0 || count > f_count {
        return Err(Error::arg(format!(
            "component count must lie in 1..={f_count}, got {count}"
        )));
    }
    if amplitude.len() != t_count * f_count || t_count < 2 {
        return Err(Error::arg(format!(
            "amplitude matrix must be {t_count}x{f_count} with T >= 2"
        )));
    }
    let mut x = DMatrix::from_row_slice(t_count, f_count, amplitude);
    for mut col in x.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let cov = x.transpose() * &x / (t_count - 1) as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..f_count).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut result = PcaResult {
        components: Vec::with_capacity(count),
        loadings: Vec::with_capacity(count),
        eigenvalues: Vec::with_capacity(count),
    };
    for &idx in order.iter().take(count) {
        let mut v = eig.eigenvectors.column(idx).into_owned();
        let pivot = v.iter().enumerate().fold(
            0,
            |best, (i, c)| if c.abs() > v[best].abs() { i } else { best },
        );
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        let projected = &x * &v;
        result.components.push(projected.iter().copied().collect());
        result.loadings.push(v.iter().copied().collect());
        result.eigenvalues.push(eig.eigenvalues[idx].max(0.0));
    }
    Ok(result)
}
