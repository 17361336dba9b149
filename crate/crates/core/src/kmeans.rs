//! Weighted Lloyd iteration with k-means++ seeding.
//!
//! Points live in (latitude, unwrapped longitude) degree space and the
//! objective is the weighted within-cluster sum of squared Euclidean
//! distances. Everything is driven by an explicit seed: the same inputs
//! and seed produce bit-identical output on any thread.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::partition::PartitionError;

/// Convergence threshold on the maximum centroid movement, in degrees.
pub const MOVEMENT_TOL_DEG: f64 = 1e-6;
/// Iteration cap for the Lloyd loop.
pub const MAX_ITERATIONS: usize = 100;

/// Output of a weighted k-means run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    /// Final cluster centers, `[lat, lon]` in frame space.
    pub centroids: Vec<[f64; 2]>,
    /// Cluster index per input point.
    pub assignments: Vec<usize>,
    /// Weighted WCSS recorded once per iteration (after the assignment
    /// step); non-increasing.
    pub wcss_trace: Vec<f64>,
    /// Weighted WCSS of the returned state.
    pub final_wcss: f64,
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dy = a[0] - b[0];
    let dx = a[1] - b[1];
    dy * dy + dx * dx
}

/// Nearest centroid by squared Euclidean distance; ties go to the lowest
/// index.
fn nearest(p: [f64; 2], centroids: &[[f64; 2]]) -> usize {
    let mut best = 0;
    let mut best_d = dist2(p, centroids[0]);
    for (i, c) in centroids.iter().enumerate().skip(1) {
        let d = dist2(p, *c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn wcss(points: &[[f64; 2]], weights: &[f64], assignments: &[usize], centroids: &[[f64; 2]]) -> f64 {
    points
        .iter()
        .zip(weights)
        .zip(assignments)
        .map(|((p, &w), &a)| w * dist2(*p, centroids[a]))
        .sum()
}

/// Samples an index with probability proportional to `masses`; assumes a
/// positive total.
fn weighted_pick<R: Rng>(rng: &mut R, masses: &[f64], total: f64) -> usize {
    let r = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &m) in masses.iter().enumerate() {
        acc += m;
        if r < acc {
            return i;
        }
    }
    masses.len() - 1
}

/// Weighted k-means++ initialization.
fn seed_centroids(
    points: &[[f64; 2]],
    weights: &[f64],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<[f64; 2]> {
    let total_w: f64 = weights.iter().sum();
    let mut centroids = Vec::with_capacity(k);
    let first = if total_w > 0.0 {
        weighted_pick(rng, weights, total_w)
    } else {
        0
    };
    centroids.push(points[first]);

    let mut d2: Vec<f64> = points.iter().map(|p| dist2(*p, points[first])).collect();
    while centroids.len() < k {
        let masses: Vec<f64> = weights.iter().zip(&d2).map(|(&w, &d)| w * d).collect();
        let total: f64 = masses.iter().sum();
        let idx = if total > 0.0 {
            weighted_pick(rng, &masses, total)
        } else {
            // Weight mass vanished; take the first point not yet coincident
            // with a chosen center.
            d2.iter().position(|&d| d > 0.0).unwrap_or(0)
        };
        let c = points[idx];
        centroids.push(c);
        for (slot, p) in d2.iter_mut().zip(points) {
            *slot = slot.min(dist2(*p, c));
        }
    }
    centroids
}

/// Weighted mean per cluster. A cluster whose total weight is zero falls
/// back to the unweighted mean of its members.
fn weighted_means(
    points: &[[f64; 2]],
    weights: &[f64],
    assignments: &[usize],
    k: usize,
) -> Vec<[f64; 2]> {
    let mut sums = vec![[0.0f64; 2]; k];
    let mut wsum = vec![0.0f64; k];
    let mut counts = vec![0usize; k];
    for ((p, &w), &a) in points.iter().zip(weights).zip(assignments) {
        sums[a][0] += w * p[0];
        sums[a][1] += w * p[1];
        wsum[a] += w;
        counts[a] += 1;
    }
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        if wsum[i] > 0.0 {
            out.push([sums[i][0] / wsum[i], sums[i][1] / wsum[i]]);
        } else if counts[i] > 0 {
            let mut s = [0.0f64; 2];
            for (p, &a) in points.iter().zip(assignments) {
                if a == i {
                    s[0] += p[0];
                    s[1] += p[1];
                }
            }
            out.push([s[0] / counts[i] as f64, s[1] / counts[i] as f64]);
        } else {
            out.push([f64::nan(), f64::nan()]);
        }
    }
    out
}

/// Moves the point farthest from its centroid into each empty cluster,
/// which strictly lowers the objective.
fn fix_empty_clusters(
    points: &[[f64; 2]],
    assignments: &mut [usize],
    centroids: &mut [[f64; 2]],
) {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    for &a in assignments.iter() {
        counts[a] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let mut far_idx = usize::MAX;
        let mut far_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            if counts[assignments[i]] < 2 {
                continue;
            }
            let d = dist2(*p, centroids[assignments[i]]);
            if d > far_d {
                far_d = d;
                far_idx = i;
            }
        }
        if far_idx == usize::MAX {
            continue; // fewer points than clusters; caller precludes this
        }
        counts[assignments[far_idx]] -= 1;
        counts[empty] += 1;
        centroids[empty] = points[far_idx];
        assignments[far_idx] = empty;
    }
}

/// Runs weighted k-means. `points` are `[lat, lon]` in frame space,
/// `weights` are non-negative with at least one positive entry per typical
/// use; `k` must be between 1 and the number of distinct points.
pub fn fit_weighted(
    points: &[[f64; 2]],
    weights: &[f64],
    k: usize,
    seed: u64,
) -> Result<KMeansFit, PartitionError> {
    let distinct = distinct_points(points);
    if k == 0 || k > distinct {
        return Err(PartitionError::KOutOfRange { k, distinct });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(points, weights, k, &mut rng);
    let mut assignments: Vec<usize> = vec![usize::MAX; points.len()];
    let mut trace = Vec::new();

    for _ in 0..MAX_ITERATIONS {
        let mut next: Vec<usize> = points.iter().map(|p| nearest(*p, &centroids)).collect();
        fix_empty_clusters(points, &mut next, &mut centroids);
        trace.push(wcss(points, weights, &next, &centroids));

        let stable = next == assignments;
        assignments = next;
        let new_centroids = weighted_means(points, weights, &assignments, k);
        let movement = centroids
            .iter()
            .zip(&new_centroids)
            .map(|(a, b)| dist2(*a, *b).sqrt())
            .fold(0.0, f64::max);
        centroids = new_centroids;
        if stable || movement < MOVEMENT_TOL_DEG {
            break;
        }
    }

    let final_wcss = wcss(points, weights, &assignments, &centroids);
    Ok(KMeansFit {
        centroids,
        assignments,
        wcss_trace: trace,
        final_wcss,
    })
}

/// Number of distinct coordinate pairs, compared bit-exactly.
pub fn distinct_points(points: &[[f64; 2]]) -> usize {
    let mut keys: Vec<(u64, u64)> = points
        .iter()
        .map(|p| (p[0].to_bits(), p[1].to_bits()))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_clouds() -> (Vec<[f64; 2]>, Vec<f64>) {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for i in 0..12 {
            let jitter = (i % 4) as f64 * 0.1;
            points.push([10.0 + jitter, 150.0 + jitter]);
            weights.push(1.0 + (i % 3) as f64);
            points.push([30.0 + jitter, 170.0 + jitter]);
            weights.push(2.0);
        }
        (points, weights)
    }

    #[test]
    fn k1_centroid_is_global_weighted_mean() {
        let (points, weights) = two_clouds();
        let fit = fit_weighted(&points, &weights, 1, 9).unwrap();
        let total: f64 = weights.iter().sum();
        let lat: f64 = points.iter().zip(&weights).map(|(p, w)| p[0] * w).sum::<f64>() / total;
        let lon: f64 = points.iter().zip(&weights).map(|(p, w)| p[1] * w).sum::<f64>() / total;
        assert!((fit.centroids[0][0] - lat).abs() < 1e-9);
        assert!((fit.centroids[0][1] - lon).abs() < 1e-9);
    }

    #[test]
    fn two_separated_clouds_recovered_exactly() {
        let (points, weights) = two_clouds();
        let fit = fit_weighted(&points, &weights, 2, 4).unwrap();
        // Ground-truth clustering is known: membership by construction.
        for (i, p) in points.iter().enumerate() {
            let expect_low = p[0] < 20.0;
            let assigned_low = fit.centroids[fit.assignments[i]][0] < 20.0;
            assert_eq!(expect_low, assigned_low);
        }
        // Each centroid equals its cloud's weighted mean.
        for cluster in 0..2 {
            let mut wsum = 0.0;
            let mut lat = 0.0;
            let mut lon = 0.0;
            for (i, p) in points.iter().enumerate() {
                if fit.assignments[i] == cluster {
                    wsum += weights[i];
                    lat += weights[i] * p[0];
                    lon += weights[i] * p[1];
                }
            }
            assert!((fit.centroids[cluster][0] - lat / wsum).abs() < 1e-9);
            assert!((fit.centroids[cluster][1] - lon / wsum).abs() < 1e-9);
        }
    }

    #[test]
    fn wcss_trace_is_non_increasing() {
        let (points, weights) = two_clouds();
        for seed in 0..10u64 {
            let fit = fit_weighted(&points, &weights, 3, seed).unwrap();
            for pair in fit.wcss_trace.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-9, "trace rose: {:?}", fit.wcss_trace);
            }
        }
    }

    #[test]
    fn converged_assignments_are_nearest_centroid() {
        let (points, weights) = two_clouds();
        let fit = fit_weighted(&points, &weights, 4, 7).unwrap();
        for (i, p) in points.iter().enumerate() {
            assert_eq!(fit.assignments[i], nearest(*p, &fit.centroids));
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let (points, weights) = two_clouds();
        let a = fit_weighted(&points, &weights, 3, 123).unwrap();
        let b = fit_weighted(&points, &weights, 3, 123).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn k_above_distinct_points_is_rejected() {
        let points = [[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]];
        let err = fit_weighted(&points, &[1.0, 1.0, 1.0], 3, 0).unwrap_err();
        assert!(matches!(err, PartitionError::KOutOfRange { distinct: 2, .. }));
    }
}
