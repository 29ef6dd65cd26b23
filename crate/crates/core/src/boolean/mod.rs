//! Occupied-set realization and exact geometric queries.
//!
//! A realization is the union of closed discs around the coupled points at a
//! given intensity, restricted to the discs that meet a query window. Points
//! are sampled on a padded region so that, up to an explicit leakage budget,
//! no disc reaching the window is missing:
//!
//! * bounded radius laws pad by the essential supremum and leak nothing;
//! * unbounded laws pad so that the expected number of discs from points
//!   beyond the pad that still reach the window is below `eps_leak`, using
//!   the closed-form tail integral `∫_d^∞ tail(t) (perimeter + 2πt) dt`;
//! * laws with infinite second moment make that integral diverge for every
//!   pad, so realization refuses them up front: truncate the law instead.

mod connect;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{contract_err, param_err, Result};
use crate::fields::{FieldRealization, RadialDistribution};
use crate::geom::{Disc, Point2, Rect};
use crate::raster::FloodAxis;
use crate::sampling::{couple_to_intensity, lane_rng, MarkedPointSet, StreamLane};
use crate::scalar::Scalar;
use crate::CrossingAnswer;

use connect::DiscGrid;
use rand::Rng;

/// How a coupled point acquires its radius.
#[derive(Clone, Copy, Debug)]
pub enum MarkingMode<'a, T> {
    /// Radius is the field value at the point's location.
    Geostatistical(&'a FieldRealization<T>),
    /// Radius is the quantile of the law at the point's uniform mark,
    /// independent of location.
    Iid(&'a RadialDistribution<T>),
}

/// Which set a crossing query asks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetPhase {
    Occupied,
    Vacant,
}

/// Expected intensity measure of leaked discs when points farther than `d`
/// from the window are dropped: `∫_d^∞ tail(t) (perimeter + 2πt) dt`, the
/// area of the locus at distance `t` from a convex window weighted by the
/// probability that a disc there reaches back. `None` when the integral
/// diverges (infinite second moment).
fn leakage_intensity<T: Scalar>(phi: &RadialDistribution<T>, perimeter: f64, d: f64) -> Option<f64> {
    // Contribution of a constant tail level `w` over radii in [a, b).
    let band = |a: f64, b: f64, w: f64| -> f64 {
        let lo = a.max(d);
        if b > lo {
            w * (perimeter * (b - lo) + std::f64::consts::PI * (b * b - lo * lo))
        } else {
            0.0
        }
    };
    // ∫_{e1}^{e2} (s/t)^β (perimeter + 2πt) dt for s ≤ e1 ≤ e2, β > 1, β ≠ 2.
    let pareto_seg = |shape: f64, scale: f64, e1: f64, e2: f64| -> f64 {
        if e2 <= e1 {
            return 0.0;
        }
        let sb = scale.powf(shape);
        let lin = perimeter * (e1.powf(1.0 - shape) - e2.powf(1.0 - shape)) / (shape - 1.0);
        let quad = if (shape - 2.0).abs() < 1e-12 && e2.is_finite() {
            2.0 * std::f64::consts::PI * (e2.ln() - e1.ln())
        } else {
            2.0 * std::f64::consts::PI * (e1.powf(2.0 - shape) - e2.powf(2.0 - shape)) / (shape - 2.0)
        };
        sb * (lin + quad)
    };
    match phi {
        RadialDistribution::PointMass { value } => Some(band(0.0, value.as_f64(), 1.0)),
        RadialDistribution::TwoPoint { low, high, p_high } => {
            Some(band(0.0, low.as_f64(), 1.0) + band(low.as_f64(), high.as_f64(), *p_high))
        }
        RadialDistribution::Pareto { shape, scale } => {
            if *shape <= 2.0 {
                return None;
            }
            let s = scale.as_f64();
            Some(band(0.0, s, 1.0) + pareto_seg(*shape, s, d.max(s), f64::INFINITY))
        }
        RadialDistribution::Truncated { inner, cap } => {
            let c = cap.as_f64();
            match inner.as_ref() {
                RadialDistribution::PointMass { value } => Some(band(0.0, value.as_f64().min(c), 1.0)),
                RadialDistribution::TwoPoint { low, high, p_high } => Some(
                    band(0.0, low.as_f64().min(c), 1.0)
                        + band(low.as_f64().min(c), high.as_f64().min(c), *p_high),
                ),
                RadialDistribution::Pareto { shape, scale } => {
                    let s = scale.as_f64();
                    Some(band(0.0, s.min(c), 1.0) + pareto_seg(*shape, s, d.max(s), c.max(s)))
                }
                RadialDistribution::Truncated { .. } => {
                    unreachable!("truncation constructor collapses nesting")
                }
            }
        }
    }
}

/// The pad distance a point sample must extend beyond the window, and the
/// leakage budget that pad leaves: zero for bounded laws (pad = essential
/// supremum), otherwise the smallest distance at which the expected number
/// of leaked discs drops to `eps_leak`.
pub fn required_pad<T: Scalar>(
    marking: MarkingMode<'_, T>,
    lambda: f64,
    window: &Rect<T>,
    eps_leak: f64,
) -> Result<(T, f64)> {
    if !(eps_leak > 0.0) || !eps_leak.is_finite() {
        return param_err(format!("eps_leak must be positive and finite, got {eps_leak}"));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return param_err(format!("intensity must be nonnegative and finite, got {lambda}"));
    }
    let phi = match marking {
        MarkingMode::Geostatistical(field) => {
            return match field.bound() {
                Some(b) => Ok((b, 0.0)),
                None => param_err(
                    "field values are unbounded; truncate the field before realizing occupied sets",
                ),
            };
        }
        MarkingMode::Iid(phi) => phi,
    };
    if let Some(m) = phi.max_radius() {
        return Ok((m, 0.0));
    }
    let perimeter = window.perimeter().as_f64();
    let intensity = |d: f64| leakage_intensity(phi, perimeter, d).map(|i| lambda * i);
    let total = match intensity(0.0) {
        Some(v) => v,
        None => {
            return param_err(
                "radius law has infinite second moment, so leaked-disc intensity diverges \
                 for every pad; truncate the law",
            )
        }
    };
    if total <= eps_leak {
        return Ok((T::zero(), total));
    }
    let mut hi = 1.0f64;
    while intensity(hi).expect("finite beyond check above") > eps_leak {
        hi *= 2.0;
        if hi > 1e12 {
            return param_err(
                "pad needed to meet eps_leak exceeds 1e12; radius tail is too heavy",
            );
        }
    }
    let mut lo = hi / 2.0;
    if hi == 1.0 {
        lo = 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if intensity(mid).expect("finite") <= eps_leak {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let budget = intensity(hi).expect("finite");
    Ok((T::of_f64(hi), budget))
}

/// Probability that a fixed point is covered by the Boolean model with iid
/// radii from `phi` at intensity `lambda`: `1 - exp(-lambda * pi * E[R^2])`.
/// An infinite second moment covers every point almost surely.
pub fn iid_coverage_probability<T: Scalar>(lambda: f64, phi: &RadialDistribution<T>) -> f64 {
    match phi.second_moment() {
        Some(m2) => 1.0 - (-lambda * std::f64::consts::PI * m2).exp(),
        None => {
            if lambda > 0.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Monte Carlo estimate of the covered area fraction of a rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaEstimate {
    pub fraction: f64,
    pub std_error: f64,
    pub probes: u64,
}

/// The occupied set at one intensity: every disc meeting the window, plus
/// the leakage budget certifying how much could be missing.
#[derive(Debug)]
pub struct OccupiedRealization<T> {
    window: Rect<T>,
    discs: Vec<Disc<T>>,
    lambda: f64,
    leakage_budget: f64,
    grid: DiscGrid,
}

/// Builds the occupied set at intensity `lambda` from a coupled point sample.
///
/// The sample's region must cover the window dilated by the required pad, and
/// a geostatistical field must be realized on at least that region; both are
/// Contract errors because they indicate a mis-sized pipeline, not bad data.
pub fn realize_occupied<T: Scalar>(
    points: &MarkedPointSet<T>,
    lambda: f64,
    marking: MarkingMode<'_, T>,
    window: Rect<T>,
    eps_leak: f64,
) -> Result<OccupiedRealization<T>> {
    let (pad, leakage_budget) = required_pad(marking, lambda, &window, eps_leak)?;
    let required_region = window.dilate(pad)?;
    if !points.region.contains_rect(&required_region) {
        return contract_err(format!(
            "point sample region {:?} does not cover the window dilated by pad {:?}",
            points.region, pad
        ));
    }
    if let MarkingMode::Geostatistical(field) = marking {
        if !field.window().contains_rect(&required_region) {
            return contract_err(
                "field window does not cover the window dilated by the field bound",
            );
        }
    }
    let coupled = couple_to_intensity(points, lambda)?;
    let mut discs = Vec::new();
    for p in &coupled.points {
        let radius = match marking {
            MarkingMode::Geostatistical(field) => {
                // Points beyond the pad cannot reach the window: their radius
                // is at most the bound, which equals the pad.
                if !required_region.contains(p.location) {
                    continue;
                }
                field.evaluate(p.location)
            }
            MarkingMode::Iid(phi) => phi.quantile(p.uniform_mark),
        };
        let disc = Disc::new(p.location, radius);
        if disc.meets_rect(&window) {
            discs.push(disc);
        }
    }
    let grid = DiscGrid::build(&discs);
    Ok(OccupiedRealization { window, discs, lambda, leakage_budget, grid })
}

impl<T: Scalar> OccupiedRealization<T> {
    pub fn window(&self) -> Rect<T> {
        self.window
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn leakage_budget(&self) -> f64 {
        self.leakage_budget
    }

    pub fn discs(&self) -> &[Disc<T>] {
        &self.discs
    }

    fn require_in_window(&self, p: Point2<T>) -> Result<()> {
        if self.window.contains(p) {
            Ok(())
        } else {
            contract_err(format!(
                "query point ({:?}, {:?}) lies outside the realized window",
                p.x, p.y
            ))
        }
    }

    fn require_subwindow(&self, rect: &Rect<T>) -> Result<()> {
        if self.window.contains_rect(rect) {
            Ok(())
        } else {
            contract_err("query rectangle is not contained in the realized window")
        }
    }

    /// Whether the closed occupied set contains `p`.
    pub fn covers_point(&self, p: Point2<T>) -> Result<bool> {
        self.require_in_window(p)?;
        let mut near = Vec::new();
        self.grid.near(p, &mut near);
        Ok(near.iter().any(|&i| self.discs[i as usize].contains(p)))
    }

    /// Whether the segment from the origin to `(length, 0)` is fully covered.
    /// Decided exactly by an interval sweep over the chord each disc cuts
    /// from the segment; closed discs, so touching intervals merge.
    pub fn covers_segment(&self, length: T) -> Result<bool> {
        if !(length >= T::zero()) {
            return param_err("segment length must be nonnegative");
        }
        self.require_in_window(Point2::origin())?;
        self.require_in_window(Point2::new(length, T::zero()))?;
        if length == T::zero() {
            return self.covers_point(Point2::origin());
        }
        let mut intervals: Vec<(T, T)> = Vec::new();
        for d in &self.discs {
            let dy = d.center.y;
            if dy.abs() > d.radius {
                continue;
            }
            let half = (d.radius * d.radius - dy * dy).sqrt();
            let start = d.center.x - half;
            let end = d.center.x + half;
            if end < T::zero() || start > length {
                continue;
            }
            intervals.push((start.max(T::zero()), end.min(length)));
        }
        intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite interval endpoints"));
        let mut covered_to = T::zero();
        for (start, end) in intervals {
            if start > covered_to {
                return Ok(false);
            }
            covered_to = covered_to.max(end);
            if covered_to >= length {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Stratified Monte Carlo estimate of the covered fraction of `rect`:
    /// one jittered probe per cell of a near-square grid.
    pub fn covered_area_fraction(&self, rect: &Rect<T>, probes: u64, seed: u64) -> Result<AreaEstimate> {
        self.require_subwindow(rect)?;
        if probes == 0 {
            return param_err("probe count must be positive");
        }
        let k = (probes as f64).sqrt().ceil() as u64;
        let mut rng = lane_rng(seed, StreamLane::Probes);
        let w = rect.width().as_f64();
        let h = rect.height().as_f64();
        let x0 = rect.x_min.as_f64();
        let y0 = rect.y_min.as_f64();
        let mut hits = 0u64;
        let mut near = Vec::new();
        for cell in 0..probes {
            let cx = (cell % k) as f64;
            let cy = (cell / k) as f64;
            let px = x0 + (cx + rng.random::<f64>()) * w / k as f64;
            let py = y0 + (cy + rng.random::<f64>()) * h / k as f64;
            let p = Point2::new(T::of_f64(px), T::of_f64(py));
            self.grid.near(p, &mut near);
            if near.iter().any(|&i| self.discs[i as usize].contains(p)) {
                hits += 1;
            }
        }
        let n = probes as f64;
        let fraction = hits as f64 / n;
        let std_error = (fraction * (1.0 - fraction) / n).sqrt();
        Ok(AreaEstimate { fraction, std_error, probes })
    }

    /// Whether `rect` is crossed by the chosen set along `axis`. Occupied
    /// crossings are decided by exact disc connectivity inside `rect`; a
    /// vacant crossing exists exactly when the occupied set does not cross
    /// the perpendicular way, by planar duality of the closed/open pair.
    pub fn has_crossing(&self, rect: &Rect<T>, phase: SetPhase, axis: FloodAxis) -> Result<bool> {
        self.require_subwindow(rect)?;
        let occupied_axis = match phase {
            SetPhase::Occupied => axis,
            SetPhase::Vacant => axis.perpendicular(),
        };
        let edges = rect.edges();
        let (source, target) = match occupied_axis {
            FloodAxis::LeftRight => (edges[0], edges[1]),
            FloodAxis::BottomTop => (edges[2], edges[3]),
        };
        let crossed = connect::occupied_crossing(&self.discs, &self.grid, rect, source, target);
        Ok(match phase {
            SetPhase::Occupied => crossed,
            SetPhase::Vacant => !crossed,
        })
    }

    /// Whether the occupied component of the origin, within the centered box
    /// of the given half-width, reaches the box boundary.
    pub fn origin_cluster_reaches(&self, half: T) -> Result<bool> {
        if !(half > T::zero()) {
            return param_err("box half-width must be positive");
        }
        let boxr = Rect::centered_square(Point2::origin(), half)?;
        self.require_subwindow(&boxr)?;
        Ok(connect::origin_component_reaches(&self.discs, &self.grid, &boxr))
    }

    /// Rasterized crossing decision, independent of the exact machinery.
    /// `Yes` and `No` come with a robust margin certificate and are always
    /// correct; `Uncertain` means neither certificate appeared even after
    /// halving the resolution once.
    pub fn grid_crossing(
        &self,
        rect: &Rect<T>,
        phase: SetPhase,
        axis: FloodAxis,
        resolution: T,
    ) -> Result<CrossingAnswer> {
        self.require_subwindow(rect)?;
        oracle::grid_crossing(&self.discs, rect, phase, axis, resolution.as_f64())
    }
}
