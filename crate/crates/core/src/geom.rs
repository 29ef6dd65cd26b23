//! Planar primitives and the exact predicates the crossing machinery relies on.
//!
//! Everything here is closed-set geometry: discs include their boundary circle,
//! rectangles include their edges, and intersection predicates use `<=`
//! comparisons throughout. The one nontrivial predicate is
//! [`discs_meet_in_rect`], which decides whether two discs intersect *inside* a
//! rectangle by testing a finite candidate set that provably contains a witness
//! point whenever the (convex) intersection is nonempty.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Point2 { x, y }
    }

    pub fn origin() -> Self {
        Point2 { x: T::zero(), y: T::zero() }
    }

    pub fn dist2(self, other: Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Lexicographic order by (x, y). Total for finite coordinates.
    pub fn lex_cmp(self, other: Self) -> std::cmp::Ordering {
        self.x
            .partial_cmp(&other.x)
            .expect("non-finite coordinate")
            .then(self.y.partial_cmp(&other.y).expect("non-finite coordinate"))
    }
}

/// Closed axis-aligned rectangle, `x_min <= x <= x_max`, `y_min <= y <= y_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect<T> {
    pub x_min: T,
    pub y_min: T,
    pub x_max: T,
    pub y_max: T,
}

impl<T: Scalar> Rect<T> {
    pub fn new(x_min: T, y_min: T, x_max: T, y_max: T) -> crate::Result<Self> {
        if !(x_min < x_max && y_min < y_max)
            || !(x_min.is_finite() && y_min.is_finite() && x_max.is_finite() && y_max.is_finite())
        {
            return crate::error::param_err(format!(
                "degenerate rectangle [{:?},{:?}]x[{:?},{:?}]",
                x_min, x_max, y_min, y_max
            ));
        }
        Ok(Rect { x_min, y_min, x_max, y_max })
    }

    /// The sup-norm ball `B(center, half)` as a rectangle.
    pub fn centered_square(center: Point2<T>, half: T) -> crate::Result<Self> {
        Rect::new(center.x - half, center.y - half, center.x + half, center.y + half)
    }

    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> T {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn perimeter(&self) -> T {
        let two = T::of_f64(2.0);
        two * (self.width() + self.height())
    }

    pub fn center(&self) -> Point2<T> {
        let half = T::of_f64(0.5);
        Point2::new((self.x_min + self.x_max) * half, (self.y_min + self.y_max) * half)
    }

    /// Distance from the center to a corner.
    pub fn circumradius(&self) -> T {
        let half = T::of_f64(0.5);
        let hw = self.width() * half;
        let hh = self.height() * half;
        (hw * hw + hh * hh).sqrt()
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        self.x_min <= p.x && p.x <= self.x_max && self.y_min <= p.y && p.y <= self.y_max
    }

    /// Whether `other` lies entirely inside this rectangle.
    pub fn contains_rect(&self, other: &Rect<T>) -> bool {
        self.x_min <= other.x_min
            && other.x_max <= self.x_max
            && self.y_min <= other.y_min
            && other.y_max <= self.y_max
    }

    /// Squared Euclidean distance from `p` to the rectangle (zero inside).
    pub fn dist2_to(&self, p: Point2<T>) -> T {
        let dx = (self.x_min - p.x).max(T::zero()).max(p.x - self.x_max);
        let dy = (self.y_min - p.y).max(T::zero()).max(p.y - self.y_max);
        dx * dx + dy * dy
    }

    /// Distance from an interior point to the boundary; negative clearance
    /// means the point is outside.
    pub fn clearance(&self, p: Point2<T>) -> T {
        (p.x - self.x_min)
            .min(self.x_max - p.x)
            .min(p.y - self.y_min)
            .min(self.y_max - p.y)
    }

    pub fn dilate(&self, pad: T) -> crate::Result<Self> {
        Rect::new(self.x_min - pad, self.y_min - pad, self.x_max + pad, self.y_max + pad)
    }

    pub fn corners(&self) -> [Point2<T>; 4] {
        [
            Point2::new(self.x_min, self.y_min),
            Point2::new(self.x_max, self.y_min),
            Point2::new(self.x_max, self.y_max),
            Point2::new(self.x_min, self.y_max),
        ]
    }

    /// The four edges as segments: left, right, bottom, top.
    pub fn edges(&self) -> [(Point2<T>, Point2<T>); 4] {
        [
            (Point2::new(self.x_min, self.y_min), Point2::new(self.x_min, self.y_max)),
            (Point2::new(self.x_max, self.y_min), Point2::new(self.x_max, self.y_max)),
            (Point2::new(self.x_min, self.y_min), Point2::new(self.x_max, self.y_min)),
            (Point2::new(self.x_min, self.y_max), Point2::new(self.x_max, self.y_max)),
        ]
    }

    /// Smallest rectangle containing both operands.
    pub fn hull(&self, other: &Rect<T>) -> Rect<T> {
        Rect {
            x_min: self.x_min.min(other.x_min),
            y_min: self.y_min.min(other.y_min),
            x_max: self.x_max.max(other.x_max),
            y_max: self.y_max.max(other.y_max),
        }
    }
}

/// Closed disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disc<T> {
    pub center: Point2<T>,
    pub radius: T,
}

impl<T: Scalar> Disc<T> {
    pub fn new(center: Point2<T>, radius: T) -> Self {
        Disc { center, radius }
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        self.center.dist2(p) <= self.radius * self.radius
    }

    pub fn meets_rect(&self, rect: &Rect<T>) -> bool {
        rect.dist2_to(self.center) <= self.radius * self.radius
    }

    /// Whether the disc intersects the rectangle's boundary curve.
    pub fn meets_rect_boundary(&self, rect: &Rect<T>) -> bool {
        self.meets_rect(rect) && self.radius >= rect.clearance(self.center)
    }

    pub fn meets_segment(&self, a: Point2<T>, b: Point2<T>) -> bool {
        segment_dist2(self.center, a, b) <= self.radius * self.radius
    }
}

/// Squared distance from `p` to the segment `[a, b]`.
pub fn segment_dist2<T: Scalar>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    let abx = b.x - a.x;
    let aby = b.y - a.y;
    let apx = p.x - a.x;
    let apy = p.y - a.y;
    let len2 = abx * abx + aby * aby;
    if len2 == T::zero() {
        return p.dist2(a);
    }
    let t = ((apx * abx + apy * aby) / len2).max(T::zero()).min(T::one());
    let cx = a.x + t * abx;
    let cy = a.y + t * aby;
    p.dist2(Point2::new(cx, cy))
}

/// Intersection points of a circle with the segment `[a, b]`, as parameters
/// `t` in `[0, 1]` mapped to points. Zero, one, or two points.
pub fn circle_segment_points<T: Scalar>(
    center: Point2<T>,
    radius: T,
    a: Point2<T>,
    b: Point2<T>,
) -> Vec<Point2<T>> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let fx = a.x - center.x;
    let fy = a.y - center.y;
    let qa = dx * dx + dy * dy;
    let qb = T::of_f64(2.0) * (fx * dx + fy * dy);
    let qc = fx * fx + fy * fy - radius * radius;
    let mut out = Vec::new();
    if qa == T::zero() {
        return out;
    }
    let disc = qb * qb - T::of_f64(4.0) * qa * qc;
    if disc < T::zero() {
        return out;
    }
    let sq = disc.sqrt();
    let two_a = T::of_f64(2.0) * qa;
    for t in [(-qb - sq) / two_a, (-qb + sq) / two_a] {
        if t >= T::zero() && t <= T::one() {
            out.push(Point2::new(a.x + t * dx, a.y + t * dy));
        }
    }
    out.dedup_by(|p, q| p == q);
    out
}

/// Intersection points of two circles. Empty when they do not meet or when
/// they coincide.
pub fn circle_circle_points<T: Scalar>(
    c1: Point2<T>,
    r1: T,
    c2: Point2<T>,
    r2: T,
) -> Vec<Point2<T>> {
    let d2 = c1.dist2(c2);
    if d2 == T::zero() {
        return Vec::new();
    }
    let d = d2.sqrt();
    if d > r1 + r2 || d < (r1 - r2).abs() {
        return Vec::new();
    }
    // Distance from c1 to the radical line along the center line.
    let a = (d2 + r1 * r1 - r2 * r2) / (T::of_f64(2.0) * d);
    let h2 = r1 * r1 - a * a;
    let h = h2.max(T::zero()).sqrt();
    let ux = (c2.x - c1.x) / d;
    let uy = (c2.y - c1.y) / d;
    let mx = c1.x + a * ux;
    let my = c1.y + a * uy;
    let p1 = Point2::new(mx + h * uy, my - h * ux);
    let p2 = Point2::new(mx - h * uy, my + h * ux);
    if p1 == p2 {
        vec![p1]
    } else {
        vec![p1, p2]
    }
}

/// Midpoint of the chord that the segment through both centers cuts out of
/// `d1 ∩ d2`. Lies in both discs whenever they intersect; `None` otherwise.
/// Degenerates to the contained disc's center when one disc contains the
/// other, and to `d1.center` when the centers coincide.
pub fn lens_anchor<T: Scalar>(d1: &Disc<T>, d2: &Disc<T>) -> Option<Point2<T>> {
    let dist2 = d1.center.dist2(d2.center);
    let d = dist2.sqrt();
    if d > d1.radius + d2.radius {
        return None;
    }
    if d == T::zero() {
        return Some(d1.center);
    }
    let lo = (-d1.radius).max(d - d2.radius);
    let hi = d1.radius.min(d + d2.radius);
    if lo > hi {
        return None;
    }
    let t = (lo + hi) * T::of_f64(0.5);
    let ux = (d2.center.x - d1.center.x) / d;
    let uy = (d2.center.y - d1.center.y) / d;
    Some(Point2::new(d1.center.x + t * ux, d1.center.y + t * uy))
}

/// Exact test for `d1 ∩ d2 ∩ rect != ∅` (all sets closed).
///
/// The intersection is convex. If it is nonempty it contains at least one of:
/// the chord-midpoint anchor of the two discs (covers configurations whose
/// only active constraints are the discs, including nested discs), a
/// circle-circle intersection point, a circle-edge intersection point lying in
/// the other disc, or a rectangle corner lying in both discs. Testing all
/// candidates therefore decides the predicate without tolerances.
pub fn discs_meet_in_rect<T: Scalar>(d1: &Disc<T>, d2: &Disc<T>, rect: &Rect<T>) -> bool {
    let rsum = d1.radius + d2.radius;
    if d1.center.dist2(d2.center) > rsum * rsum {
        return false;
    }
    if let Some(p) = lens_anchor(d1, d2) {
        if rect.contains(p) {
            return true;
        }
    }
    for p in circle_circle_points(d1.center, d1.radius, d2.center, d2.radius) {
        if rect.contains(p) {
            return true;
        }
    }
    for p in rect.corners() {
        if d1.contains(p) && d2.contains(p) {
            return true;
        }
    }
    for (a, b) in rect.edges() {
        for p in circle_segment_points(d1.center, d1.radius, a, b) {
            if d2.contains(p) {
                return true;
            }
        }
        for p in circle_segment_points(d2.center, d2.radius, a, b) {
            if d1.contains(p) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Point2<f64>;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Rect<f64> {
        Rect::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn rect_rejects_degenerate() {
        assert!(Rect::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(Rect::new(0.0, 0.0, -1.0, 1.0).is_err());
        assert!(Rect::new(0.0, f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn dist2_to_rect() {
        let r = rect(0.0, 0.0, 2.0, 1.0);
        assert_eq!(r.dist2_to(P::new(1.0, 0.5)), 0.0);
        assert_eq!(r.dist2_to(P::new(3.0, 0.5)), 1.0);
        assert_eq!(r.dist2_to(P::new(3.0, 2.0)), 2.0);
    }

    #[test]
    fn segment_distance() {
        let a = P::new(0.0, 0.0);
        let b = P::new(2.0, 0.0);
        assert_eq!(segment_dist2(P::new(1.0, 1.0), a, b), 1.0);
        assert_eq!(segment_dist2(P::new(-1.0, 0.0), a, b), 1.0);
        assert_eq!(segment_dist2(P::new(3.0, 4.0), a, b), 17.0);
    }

    #[test]
    fn circle_circle_basic() {
        let pts = circle_circle_points(P::new(0.0, 0.0), 1.0, P::new(1.0, 0.0), 1.0);
        assert_eq!(pts.len(), 2);
        for p in pts {
            assert!((p.x - 0.5).abs() < 1e-12);
            assert!((p.y.abs() - (0.75f64).sqrt()).abs() < 1e-12);
        }
        // Tangent circles meet in one point.
        let pts = circle_circle_points(P::new(0.0, 0.0), 1.0, P::new(2.0, 0.0), 1.0);
        assert_eq!(pts.len(), 1);
        assert!((pts[0].x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lens_anchor_nested_and_disjoint() {
        let big = Disc::new(P::new(0.0, 0.0), 2.0);
        let small = Disc::new(P::new(0.5, 0.0), 0.25);
        let p = lens_anchor(&big, &small).unwrap();
        assert!(big.contains(p) && small.contains(p));
        let far = Disc::new(P::new(10.0, 0.0), 1.0);
        assert!(lens_anchor(&big, &far).is_none());
    }

    #[test]
    fn discs_meet_in_rect_cases() {
        let r = rect(0.0, 0.0, 4.0, 2.0);
        let d1 = Disc::new(P::new(1.0, 1.0), 0.8);
        let d2 = Disc::new(P::new(2.0, 1.0), 0.8);
        assert!(discs_meet_in_rect(&d1, &d2, &r));

        // Overlapping discs whose lens lies entirely above the rectangle.
        let d3 = Disc::new(P::new(1.0, 3.2), 1.3);
        let d4 = Disc::new(P::new(3.0, 3.2), 1.3);
        assert!(d3.meets_rect(&r) && d4.meets_rect(&r));
        assert!(lens_anchor(&d3, &d4).is_some());
        assert!(!discs_meet_in_rect(&d3, &d4, &r));

        // Nested discs inside the rectangle.
        let outer = Disc::new(P::new(2.0, 1.0), 0.9);
        let inner = Disc::new(P::new(2.0, 1.0), 0.2);
        assert!(discs_meet_in_rect(&outer, &inner, &r));

        // Both discs huge: rectangle corners witness the intersection.
        let h1 = Disc::new(P::new(-5.0, 1.0), 12.0);
        let h2 = Disc::new(P::new(9.0, 1.0), 12.0);
        assert!(discs_meet_in_rect(&h1, &h2, &r));

        // Lens pokes into the rectangle through an edge.
        let e1 = Disc::new(P::new(2.0, 2.5), 0.7);
        let e2 = Disc::new(P::new(2.6, 2.5), 0.7);
        assert!(discs_meet_in_rect(&e1, &e2, &r));

        // Same pair shifted up so the lens stops short of the edge.
        let f1 = Disc::new(P::new(2.0, 3.5), 0.7);
        let f2 = Disc::new(P::new(2.6, 3.5), 0.7);
        assert!(!discs_meet_in_rect(&f1, &f2, &r));
    }

    #[test]
    fn disc_rect_boundary_touch() {
        let r = rect(0.0, 0.0, 10.0, 10.0);
        let strictly_inside = Disc::new(P::new(5.0, 5.0), 1.0);
        assert!(!strictly_inside.meets_rect_boundary(&r));
        let touching = Disc::new(P::new(5.0, 9.5), 1.0);
        assert!(touching.meets_rect_boundary(&r));
        let outside_reaching = Disc::new(P::new(11.0, 5.0), 1.5);
        assert!(outside_reaching.meets_rect_boundary(&r));
        let outside_far = Disc::new(P::new(15.0, 5.0), 1.0);
        assert!(!outside_far.meets_rect_boundary(&r));
    }

    #[test]
    fn generic_over_f32() {
        let r = Rect::<f32>::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let d = Disc::new(Point2::<f32>::new(0.5, 0.5), 0.2);
        assert!(d.meets_rect(&r));
    }
}
