//! Spherical geometry over latitude/longitude pairs.
//!
//! Distances are great-circle nautical miles on a sphere of mean Earth
//! radius. Longitude arithmetic near the antimeridian goes through a
//! [`LonFrame`]: a rotation of the longitude axis chosen so that the
//! working region is contiguous, which lets centroids and cell bounds be
//! computed with plain arithmetic instead of wraparound case analysis.

use core::fmt;

use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Mean Earth radius in nautical miles.
pub const EARTH_RADIUS_NM: f64 = 3440.065;

/// Smallest longitude gap (degrees) considered usable as a frame cut.
const MIN_FRAME_GAP_DEG: f64 = 1e-6;

/// A point on the sphere in degrees. Latitude is in `[-90, 90]`,
/// longitude is kept normalized to `[-180, 180)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoPoint {
    /// Builds a point, wrapping longitude into `[-180, 180)` and clamping
    /// latitude into `[-90, 90]`.
    pub fn new(lat_deg: f64, lon_deg: f64) -> Self {
        GeoPoint {
            lat_deg: lat_deg.clamp(-90.0, 90.0),
            lon_deg: wrap_lon_deg(lon_deg),
        }
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lat_deg, self.lon_deg)
    }
}

/// Errors from centroid computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeoError {
    EmptyPoints,
    LengthMismatch { points: usize, weights: usize },
    /// All weights are zero (or negative), so no centroid exists.
    ZeroTotalWeight,
}

impl fmt::Display for GeoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeoError::EmptyPoints => write!(f, "centroid of an empty point set"),
            GeoError::LengthMismatch { points, weights } => {
                write!(f, "{points} points but {weights} weights")
            }
            GeoError::ZeroTotalWeight => write!(f, "total weight is zero (degenerate zone)"),
        }
    }
}

impl core::error::Error for GeoError {}

/// Great-circle distance between two points in nautical miles.
///
/// Uses the haversine form `2r asin(sqrt(sin^2(dlat/2) + cos(lat1) cos(lat2)
/// sin^2(dlon/2)))`; symmetric, non-negative, and at most `pi * r`.
pub fn haversine_nm(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat1 = a.lat_deg.to_radians();
    let lat2 = b.lat_deg.to_radians();
    let dlat = (b.lat_deg - a.lat_deg).to_radians();
    let dlon = (b.lon_deg - a.lon_deg).to_radians();

    let sin_dlat = (dlat / 2.0).sin();
    let sin_dlon = (dlon / 2.0).sin();
    let h = sin_dlat * sin_dlat + lat1.cos() * lat2.cos() * sin_dlon * sin_dlon;
    // Rounding can push h a hair outside [0, 1]; clamp before asin.
    let root = h.max(0.0).sqrt().min(1.0);
    2.0 * EARTH_RADIUS_NM * root.asin()
}

/// A rotation of the longitude axis. Raw longitudes unwrap into the working
/// range `[offset_deg, offset_deg + 360)`, where the region of interest is
/// contiguous and ordinary arithmetic applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LonFrame {
    pub offset_deg: f64,
    /// Set when no usable longitude gap existed and the frame fell back to
    /// offset 0; spans computed under a degenerate frame are unreliable.
    pub degenerate: bool,
}

impl LonFrame {
    pub fn new(offset_deg: f64) -> Self {
        LonFrame {
            offset_deg,
            degenerate: false,
        }
    }

    /// Maps a raw longitude to its unique representative in
    /// `[offset_deg, offset_deg + 360)`.
    pub fn unwrap_lon(&self, lon_deg: f64) -> f64 {
        self.offset_deg + positive_mod_360(lon_deg - self.offset_deg)
    }

    /// Maps an unwrapped (frame-space) longitude back to `[-180, 180)`.
    pub fn wrap_lon(unwrapped_deg: f64) -> f64 {
        wrap_lon_deg(unwrapped_deg)
    }
}

/// Normalizes a longitude into `[-180, 180)`.
pub fn wrap_lon_deg(lon_deg: f64) -> f64 {
    positive_mod_360(lon_deg + 180.0) - 180.0
}

fn positive_mod_360(x: f64) -> f64 {
    let r = x % 360.0;
    if r < 0.0 {
        r + 360.0
    } else {
        r
    }
}

/// Chooses a [`LonFrame`] whose working range holds all input longitudes
/// without wraparound, with the smallest achievable span.
///
/// The cut is placed in the largest circular gap between the input
/// longitudes; among offsets realizing the minimal span, the smallest
/// non-negative whole degree is preferred. Inputs so dense that no gap of
/// at least [`MIN_FRAME_GAP_DEG`] exists fall back to offset 0 with the
/// `degenerate` flag set.
pub fn make_frame(lons: &[f64]) -> LonFrame {
    if lons.is_empty() {
        return LonFrame {
            offset_deg: 0.0,
            degenerate: true,
        };
    }
    let mut xs: Vec<f64> = lons.iter().map(|&l| wrap_lon_deg(l)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite longitudes"));
    xs.dedup();

    // Largest circular gap between consecutive longitudes.
    let n = xs.len();
    let mut best_gap = 0.0;
    let mut best_hi = xs[0];
    for i in 0..n {
        let lo = xs[i];
        let hi = if i + 1 < n { xs[i + 1] } else { xs[0] + 360.0 };
        let gap = hi - lo;
        if gap > best_gap {
            best_gap = gap;
            best_hi = hi;
        }
    }
    if best_gap < MIN_FRAME_GAP_DEG {
        return LonFrame {
            offset_deg: 0.0,
            degenerate: true,
        };
    }
    let min_span = 360.0 - best_gap;

    // Smallest non-negative whole-degree offset achieving the minimal span.
    for o in 0..360 {
        if span_at(&xs, o as f64) <= min_span + 1e-9 {
            return LonFrame::new(o as f64);
        }
    }
    // The valid cut arc is narrower than a degree and misses every whole
    // degree; cut at the data point just past the largest gap.
    LonFrame::new(positive_mod_360(best_hi))
}

/// Longitude span of `xs` when unwrapped at `offset`.
fn span_at(xs: &[f64], offset: f64) -> f64 {
    let mut lo = f64::infinity();
    let mut hi = f64::neg_infinity();
    for &x in xs {
        let u = positive_mod_360(x - offset);
        lo = lo.min(u);
        hi = hi.max(u);
    }
    hi - lo
}

/// Weighted arithmetic mean of latitudes and frame-unwrapped longitudes,
/// wrapped back to `[-180, 180)`.
pub fn weighted_centroid(
    points: &[GeoPoint],
    weights: &[f64],
    frame: &LonFrame,
) -> Result<GeoPoint, GeoError> {
    if points.is_empty() {
        return Err(GeoError::EmptyPoints);
    }
    if points.len() != weights.len() {
        return Err(GeoError::LengthMismatch {
            points: points.len(),
            weights: weights.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(GeoError::ZeroTotalWeight);
    }
    let mut lat_sum = 0.0;
    let mut lon_sum = 0.0;
    for (p, &w) in points.iter().zip(weights) {
        lat_sum += w * p.lat_deg;
        lon_sum += w * frame.unwrap_lon(p.lon_deg);
    }
    Ok(GeoPoint {
        lat_deg: lat_sum / total,
        lon_deg: LonFrame::wrap_lon(lon_sum / total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn haversine_identical_points_is_zero() {
        let p = GeoPoint::new(20.0, -155.0);
        assert_eq!(haversine_nm(p, p), 0.0);
    }

    #[test]
    fn haversine_antipodal_equator_is_half_circumference() {
        let d = haversine_nm(GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 180.0));
        let expect = core::f64::consts::PI * EARTH_RADIUS_NM;
        assert!((d - expect).abs() < 1e-9 * expect);
        assert!((d - 10807.27).abs() < 0.02);
    }

    // Independent check: spherical law of cosines.
    fn law_of_cosines_nm(a: GeoPoint, b: GeoPoint) -> f64 {
        let lat1 = a.lat_deg.to_radians();
        let lat2 = b.lat_deg.to_radians();
        let dlon = (b.lon_deg - a.lon_deg).to_radians();
        let c = lat1.sin() * lat2.sin() + lat1.cos() * lat2.cos() * dlon.cos();
        EARTH_RADIUS_NM * c.clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn haversine_honolulu_guam_matches_law_of_cosines() {
        let honolulu = GeoPoint::new(21.3069, -157.8583);
        let guam = GeoPoint::new(13.4443, 144.7937);
        let d = haversine_nm(honolulu, guam);
        let oracle = law_of_cosines_nm(honolulu, guam);
        assert!((d - oracle).abs() / oracle < 1e-3, "d={d} oracle={oracle}");
    }

    #[test]
    fn make_frame_antimeridian_cluster_has_small_span() {
        let lons = [-170.0, 175.0, 179.0];
        let frame = make_frame(&lons);
        assert!(!frame.degenerate);
        let us: Vec<f64> = lons.iter().map(|&l| frame.unwrap_lon(l)).collect();
        let span = us.iter().cloned().fold(f64::neg_infinity(), f64::max)
            - us.iter().cloned().fold(f64::infinity(), f64::min);
        assert!(span <= 15.0 + 1e-9, "span={span}");
    }

    #[test]
    fn make_frame_no_wrap_needed_is_offset_zero() {
        let frame = make_frame(&[10.0, 20.0, 30.0]);
        assert_eq!(frame.offset_deg, 0.0);
        assert!(!frame.degenerate);
    }

    #[test]
    fn make_frame_matches_whole_degree_brute_force() {
        // 100 pseudo-random longitudes within +-20 degrees of 180.
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut lons = Vec::new();
        for _ in 0..100 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let unit = (state >> 11) as f64 / (1u64 << 53) as f64;
            lons.push(wrap_lon_deg(160.0 + 40.0 * unit));
        }
        let frame = make_frame(&lons);
        let frame_span = span_at(
            &lons.iter().map(|&l| frame.unwrap_lon(l)).collect::<Vec<_>>(),
            0.0,
        );
        assert!(frame_span <= 40.0 + 1e-9, "span={frame_span}");
        // Brute force over whole-degree offsets.
        let mut best = f64::infinity();
        for o in 0..360 {
            best = best.min(span_at(&lons, o as f64));
        }
        assert!(frame_span <= best + 1e-9, "frame {frame_span} vs brute {best}");
    }

    #[test]
    fn make_frame_empty_or_dense_is_degenerate() {
        assert!(make_frame(&[]).degenerate);
    }

    #[test]
    fn centroid_singleton_is_the_point() {
        let p = GeoPoint::new(12.5, -170.25);
        let c = weighted_centroid(&[p], &[3.0], &LonFrame::new(0.0)).unwrap();
        assert_eq!(c, p);
    }

    #[test]
    fn centroid_straddles_antimeridian() {
        let pts = [GeoPoint::new(0.0, 179.0), GeoPoint::new(0.0, -179.0)];
        let frame = make_frame(&[179.0, -179.0]);
        let c = weighted_centroid(&pts, &[1.0, 1.0], &frame).unwrap();
        assert_eq!(c.lat_deg, 0.0);
        assert_eq!(c.lon_deg, -180.0);
    }

    #[test]
    fn centroid_matches_direct_summation_oracle() {
        // 50 pseudo-random points and weights vs a separate direct loop.
        let mut state = 42u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for _ in 0..50 {
            points.push(GeoPoint::new(next() * 120.0 - 60.0, next() * 360.0 - 180.0));
            weights.push(next() * 9.0 + 1.0);
        }
        let frame = LonFrame::new(0.0);
        let got = weighted_centroid(&points, &weights, &frame).unwrap();

        let mut wsum = 0.0;
        let mut lat = 0.0;
        let mut lon = 0.0;
        for i in 0..50 {
            wsum += weights[i];
            lat += weights[i] * points[i].lat_deg;
            lon += weights[i] * frame.unwrap_lon(points[i].lon_deg);
        }
        assert!((got.lat_deg - lat / wsum).abs() < 1e-12);
        assert!((got.lon_deg - LonFrame::wrap_lon(lon / wsum)).abs() < 1e-12);
    }

    #[test]
    fn centroid_zero_weight_is_error() {
        let pts = vec![GeoPoint::new(0.0, 0.0), GeoPoint::new(1.0, 1.0)];
        let err = weighted_centroid(&pts, &[0.0, 0.0], &LonFrame::new(0.0)).unwrap_err();
        assert_eq!(err, GeoError::ZeroTotalWeight);
    }

    #[test]
    fn centroid_length_mismatch_is_error() {
        let pts = vec![GeoPoint::new(0.0, 0.0)];
        let err = weighted_centroid(&pts, &[1.0, 2.0], &LonFrame::new(0.0)).unwrap_err();
        assert!(matches!(err, GeoError::LengthMismatch { .. }));
    }
}
