//! Marked Poisson samples and the monotone intensity coupling.
//!
//! A marked point set drawn at capacity `lambda_max` carries, per point, an
//! intensity mark uniform on `[0, lambda_max]` and an independent uniform mark
//! on `[0, 1]`. Restricting to points with intensity mark `<= lambda` yields a
//! Poisson process of intensity `lambda`, and the restrictions are nested in
//! `lambda`, so one sample serves a whole intensity scan pathwise
//! monotonically. The uniform mark is reserved for radius assignment.
//!
//! Reproducibility: every sampler is a pure function of an explicit `u64`
//! seed. Concurrent callers derive per-replication seeds with
//! [`replication_seed`] and never share RNG state, so results are independent
//! of scheduling and thread count. Within one seed, independent concerns draw
//! from disjoint ChaCha streams selected by [`StreamLane`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::param_err;
use crate::geom::{Point2, Rect};
use crate::scalar::Scalar;
use crate::Result;

/// Independent sub-stream labels hanging off one seed.
#[derive(Clone, Copy, Debug)]
pub enum StreamLane {
    Points = 0,
    Lines = 1,
    FieldMarks = 2,
    Probes = 3,
    Aux = 4,
}

/// ChaCha stream for one concern under one seed. Different lanes under the
/// same seed are disjoint streams of the same keyed cipher.
pub fn lane_rng(seed: u64, lane: StreamLane) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(lane as u64);
    rng
}

/// Seed for replication `index` of an experiment keyed by `master_seed`.
/// SplitMix64 finalizer; distinct inputs map to well-separated seeds.
pub fn replication_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Poisson count with the convention that a zero-mean process is empty.
pub(crate) fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> Result<u64> {
    if !mean.is_finite() || mean < 0.0 {
        return param_err(format!("Poisson mean must be finite and >= 0, got {mean}"));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = rand_distr::Poisson::new(mean)
        .map_err(|e| crate::Error::Parameter(format!("Poisson({mean}): {e}")))?;
    Ok(dist.sample(rng) as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint<T> {
    pub location: Point2<T>,
    /// Uniform on `[0, lambda_max]`; the point is present at intensity
    /// `lambda` iff this mark is `<= lambda`.
    pub intensity_mark: f64,
    /// Uniform on `[0, 1]`, independent of everything else; drives radius
    /// assignment under i.i.d. marking.
    pub uniform_mark: f64,
}

/// A realization of the marked Poisson process at capacity `lambda_max` on
/// `region`, sorted lexicographically by location.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedPointSet<T> {
    pub region: Rect<T>,
    pub lambda_max: f64,
    pub points: Vec<MarkedPoint<T>>,
    pub seed: u64,
}

/// Draws the marked process at capacity `lambda_max` on `region`.
///
/// Uses the [`StreamLane::Points`] stream of `seed`. The returned points are
/// sorted by location, so equal seeds give bitwise-equal sets.
pub fn sample_marked_points<T: Scalar>(
    lambda_max: f64,
    region: Rect<T>,
    seed: u64,
) -> Result<MarkedPointSet<T>> {
    if !lambda_max.is_finite() || lambda_max < 0.0 {
        return param_err(format!("lambda_max must be finite and >= 0, got {lambda_max}"));
    }
    let mut rng = lane_rng(seed, StreamLane::Points);
    let mean = lambda_max * region.area().as_f64();
    let count = poisson_count(&mut rng, mean)?;
    let mut points = Vec::with_capacity(count as usize);
    let width = region.width();
    let height = region.height();
    for _ in 0..count {
        let ux: f64 = rng.random();
        let uy: f64 = rng.random();
        let ui: f64 = rng.random();
        let uz: f64 = rng.random();
        points.push(MarkedPoint {
            location: Point2::new(
                region.x_min + width * T::of_f64(ux),
                region.y_min + height * T::of_f64(uy),
            ),
            intensity_mark: ui * lambda_max,
            uniform_mark: uz,
        });
    }
    points.sort_by(|a, b| a.location.lex_cmp(b.location));
    Ok(MarkedPointSet { region, lambda_max, points, seed })
}

/// Restricts a marked set to intensity `lambda` along the monotone coupling.
///
/// Returns exactly the points with `intensity_mark <= lambda`; the result is
/// a realization at intensity `lambda` and is a subset of any restriction at
/// higher intensity. Asking for `lambda` above the set's capacity is an
/// error: those points were never sampled.
pub fn couple_to_intensity<T: Scalar>(
    set: &MarkedPointSet<T>,
    lambda: f64,
) -> Result<MarkedPointSet<T>> {
    if !lambda.is_finite() || lambda < 0.0 {
        return param_err(format!("lambda must be finite and >= 0, got {lambda}"));
    }
    if lambda > set.lambda_max {
        return param_err(format!(
            "cannot couple upward: lambda {} exceeds sampled capacity {}",
            lambda, set.lambda_max
        ));
    }
    Ok(MarkedPointSet {
        region: set.region,
        lambda_max: lambda,
        points: set.points.iter().filter(|p| p.intensity_mark <= lambda).copied().collect(),
        seed: set.seed,
    })
}

/// An undirected line with normal direction `theta`: the set of points `q`
/// with `q · (cos theta, sin theta) = x`, carrying an independent uniform
/// mark.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedLine<T> {
    /// Direction of the perpendicular from the origin, in `[0, 2*pi)`.
    pub theta: T,
    /// Distance from the origin, in `[0, max_distance]`.
    pub x: T,
    /// Uniform mark on `[0, 1]`.
    pub z: f64,
}

/// Draws the isotropic Poisson line process of intensity `u`, restricted to
/// lines within `max_distance` of the origin. The count is Poisson with mean
/// `2 * pi * u * max_distance`. Uses the [`StreamLane::Lines`] stream.
pub fn sample_marked_lines<T: Scalar>(
    u: f64,
    max_distance: T,
    seed: u64,
) -> Result<Vec<MarkedLine<T>>> {
    if !u.is_finite() || u < 0.0 {
        return param_err(format!("line intensity must be finite and >= 0, got {u}"));
    }
    let max_distance_f = max_distance.as_f64();
    if !(max_distance_f >= 0.0) {
        return param_err(format!("max_distance must be >= 0, got {max_distance_f}"));
    }
    let mut rng = lane_rng(seed, StreamLane::Lines);
    let mean = 2.0 * std::f64::consts::PI * u * max_distance_f;
    let count = poisson_count(&mut rng, mean)?;
    let two_pi = T::of_f64(2.0) * T::PI();
    let mut lines = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let ut: f64 = rng.random();
        let ux: f64 = rng.random();
        let uz: f64 = rng.random();
        lines.push(MarkedLine {
            theta: two_pi * T::of_f64(ut),
            x: max_distance * T::of_f64(ux),
            z: uz,
        });
    }
    lines.sort_by(|a, b| {
        (a.theta, a.x)
            .partial_cmp(&(b.theta, b.x))
            .expect("non-finite line parameter")
    });
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region() -> Rect<f64> {
        Rect::new(0.0, 0.0, 10.0, 10.0).unwrap()
    }

    #[test]
    fn same_seed_same_sample() {
        let a = sample_marked_points(0.7, region(), 42).unwrap();
        let b = sample_marked_points(0.7, region(), 42).unwrap();
        assert_eq!(a, b);
        let c = sample_marked_points(0.7, region(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn points_sorted_and_in_region() {
        let s = sample_marked_points(1.0, region(), 7).unwrap();
        assert!(!s.points.is_empty());
        for w in s.points.windows(2) {
            assert_ne!(w[0].location.lex_cmp(w[1].location), std::cmp::Ordering::Greater);
        }
        for p in &s.points {
            assert!(s.region.contains(p.location));
            assert!((0.0..=s.lambda_max).contains(&p.intensity_mark));
            assert!((0.0..1.0).contains(&p.uniform_mark));
        }
    }

    #[test]
    fn zero_intensity_is_empty() {
        let s = sample_marked_points::<f64>(0.0, region(), 1).unwrap();
        assert!(s.points.is_empty());
    }

    #[test]
    fn rejects_bad_intensity() {
        assert!(sample_marked_points(-1.0, region(), 1).is_err());
        assert!(sample_marked_points(f64::NAN, region(), 1).is_err());
    }

    #[test]
    fn coupling_is_nested_filter() {
        let s = sample_marked_points(2.0, region(), 99).unwrap();
        let lo = couple_to_intensity(&s, 0.5).unwrap();
        let hi = couple_to_intensity(&s, 1.5).unwrap();
        assert!(lo.points.len() <= hi.points.len());
        assert!(lo.points.iter().all(|p| p.intensity_mark <= 0.5));
        // Every low-intensity point is present at the higher intensity.
        assert!(lo.points.iter().all(|p| hi.points.contains(p)));
        // Re-restriction of the restriction agrees with direct restriction.
        let again = couple_to_intensity(&hi, 0.5).unwrap();
        assert_eq!(again.points, lo.points);
    }

    #[test]
    fn coupling_above_capacity_errors() {
        let s = sample_marked_points(1.0, region(), 5).unwrap();
        assert!(couple_to_intensity(&s, 1.01).is_err());
        let restricted = couple_to_intensity(&s, 0.5).unwrap();
        assert!(couple_to_intensity(&restricted, 0.8).is_err());
    }

    #[test]
    fn lanes_are_disjoint_streams() {
        let mut a = lane_rng(11, StreamLane::Points);
        let mut b = lane_rng(11, StreamLane::Lines);
        let xs: Vec<f64> = (0..8).map(|_| a.random()).collect();
        let ys: Vec<f64> = (0..8).map(|_| b.random()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn lines_deterministic_and_bounded() {
        let a = sample_marked_lines::<f64>(0.5, 6.0, 3).unwrap();
        let b = sample_marked_lines::<f64>(0.5, 6.0, 3).unwrap();
        assert_eq!(a, b);
        for l in &a {
            assert!((0.0..2.0 * std::f64::consts::PI).contains(&l.theta));
            assert!((0.0..=6.0).contains(&l.x));
            assert!((0.0..1.0).contains(&l.z));
        }
    }

    #[test]
    fn f32_sampling_compiles_and_runs() {
        let r = Rect::<f32>::new(0.0, 0.0, 4.0, 4.0).unwrap();
        let s = sample_marked_points(0.5, r, 12).unwrap();
        for p in &s.points {
            assert!(r.contains(p.location));
        }
    }
}
