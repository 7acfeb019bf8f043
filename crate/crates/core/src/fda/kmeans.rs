use rand::Rng;

use super::GroupingResult;
use crate::csi::Spectrogram;
use crate::error::{Error, Result};
use crate::rng;

const MAX_ITERATIONS: usize = 100;

/// Outcome of a Lloyd run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia_history: Vec<f64>,
    /// True when the last assignment round changed nothing.
    pub converged: bool,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (g, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (g, d);
        }
    }
    best
}

/// Nearest-centroid assignment; on an exact distance tie a point keeps its
/// previous group, otherwise the lowest group index wins.
fn assign(points: &[&[f64]], centroids: &[Vec<f64>], prev: Option<&[usize]>) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (g, d) = nearest(p, centroids);
            match prev {
                Some(prev) if sq_dist(p, &centroids[prev[i]]) == d => prev[i],
                _ => g,
            }
        })
        .collect()
}

fn inertia(points: &[&[f64]], centroids: &[Vec<f64>], assignment: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignment)
        .map(|(p, g)| sq_dist(p, &centroids[*g]))
        .sum()
}

/// Seeded farthest-point initialisation: a random first centre, then
/// repeatedly the point farthest from all chosen centres.
fn init_centroids(points: &[&[f64]], g_count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::scoped_stream(seed, "kmeans-init");
    let first = r.random_range(0..points.len());
    let mut centroids = vec![points[first].to_vec()];
    let mut closest: Vec<f64> = points.iter().map(|p| sq_dist(p, points[first])).collect();
    while centroids.len() < g_count {
        let next = closest
            .iter()
            .enumerate()
            .fold(0, |best, (i, d)| if *d > closest[best] { i } else { best });
        centroids.push(points[next].to_vec());
        for (c, p) in closest.iter_mut().zip(points) {
            *c = c.min(sq_dist(p, points[next]));
        }
    }
    centroids
}

/// Recomputes centroids as member means, reseeding empty groups with the
/// point farthest from its own centroid (taken from a group with at least
/// two members). May reassign points, hence `&mut assignment`.
fn update(points: &[&[f64]], assignment: &mut [usize], centroids: &mut [Vec<f64>]) {
    let dim = points[0].len();
    loop {
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (p, g) in points.iter().zip(assignment.iter()) {
            counts[*g] += 1;
            for (s, v) in sums[*g].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        for (g, (sum, n)) in sums.into_iter().zip(&counts).enumerate() {
            if *n > 0 {
                centroids[g] = sum.into_iter().map(|s| s / *n as f64).collect();
            }
        }
        let Some(empty) = counts.iter().position(|n| *n == 0) else {
            return;
        };
        let donor = (0..points.len())
            .filter(|i| counts[assignment[*i]] >= 2)
            .fold(None, |best: Option<(usize, f64)>, i| {
                let d = sq_dist(points[i], &centroids[assignment[i]]);
                match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((i, d)),
                }
            })
            .map(|(i, _)| i)
            .expect("g_count <= point count leaves a group with two members");
        assignment[donor] = empty;
    }
}

/// Lloyd's k-means under squared Euclidean distance.
///
/// Runs until an assignment round changes nothing or 100 rounds elapse.
pub fn kmeans(points: &[&[f64]], g_count: usize, seed: u64) -> Result<KMeans> {
    if points.is_empty() || g_count == 0 || g_count > points.len() {
        return Err(Error::arg(format!(
            "group count must lie in 1..={}, got {g_count}",
            points.len()
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::arg("all points must share one dimension"));
    }
    let mut centroids = init_centroids(points, g_count, seed);
    let mut assignment = assign(points, &centroids, None);
    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        update(points, &mut assignment, &mut centroids);
        history.push(inertia(points, &centroids, &assignment));
        let next = assign(points, &centroids, Some(&assignment));
        if next == assignment {
            converged = true;
            break;
        }
        assignment = next;
    }
    Ok(KMeans {
        assignment,
        centroids,
        inertia_history: history,
        converged,
    })
}

/// Clusters same-shaped spectrograms; `ms_global` holds one motion statistic
/// per spectrogram.
pub fn kmeans_group(
    specs: &[&Spectrogram],
    g_count: usize,
    seed: u64,
    ms_global: &[f64],
) -> Result<GroupingResult> {
    let Some(first) = specs.first() else {
        return Err(Error::arg("no spectrograms to group"));
    };
    if specs.iter().any(|s| s.shape() != first.shape()) {
        return Err(Error::arg("spectrograms to group must share one shape"));
    }
    if ms_global.len() != specs.len() {
        return Err(Error::arg(format!(
            "expected {} motion statistics, got {}",
            specs.len(),
            ms_global.len()
        )));
    }
    let points: Vec<&[f64]> = specs.iter().map(|s| s.values()).collect();
    let km = kmeans(&points, g_count, seed)?;
    let mut group_ms_sum = vec![0.0; g_count];
    for (g, ms) in km.assignment.iter().zip(ms_global) {
        group_ms_sum[*g] += ms;
    }
    Ok(GroupingResult {
        assignment: km.assignment,
        centroids: km.centroids,
        group_ms_sum,
        inertia_history: km.inertia_history,
    })
}
