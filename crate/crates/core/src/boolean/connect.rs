//! Connectivity of the occupied set inside a rectangle.
//!
//! Discs clipped to a rectangle are convex, hence connected, so the
//! components of the clipped union are exactly the transitive closure of the
//! pairwise predicate `disc_i ∩ disc_j ∩ rect != ∅`, which
//! [`crate::geom::discs_meet_in_rect`] decides exactly. Candidate pairs come
//! from a uniform hash grid with cell size twice the maximum radius: any two
//! discs that touch at all have centers within one cell of each other.

use std::collections::HashMap;

use crate::geom::{discs_meet_in_rect, Disc, Point2, Rect};
use crate::scalar::Scalar;
use crate::union_find::UnionFind;

#[derive(Clone, Debug)]
pub(crate) struct DiscGrid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<u32>>,
}

impl DiscGrid {
    pub fn build<T: Scalar>(discs: &[Disc<T>]) -> Self {
        let max_r = discs
            .iter()
            .map(|d| d.radius.as_f64())
            .fold(0.0f64, f64::max);
        let cell = if max_r > 0.0 { 2.0 * max_r } else { 1.0 };
        let mut buckets: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, d) in discs.iter().enumerate() {
            buckets
                .entry(Self::key(cell, d.center))
                .or_default()
                .push(i as u32);
        }
        DiscGrid { cell, buckets }
    }

    fn key<T: Scalar>(cell: f64, p: Point2<T>) -> (i64, i64) {
        ((p.x.as_f64() / cell).floor() as i64, (p.y.as_f64() / cell).floor() as i64)
    }

    /// All disc ids whose center lies within one cell of `p`'s cell. Complete
    /// for both point-coverage (centers within one max radius) and pairwise
    /// adjacency (centers within two max radii = one cell width).
    pub fn near<T: Scalar>(&self, p: Point2<T>, out: &mut Vec<u32>) {
        out.clear();
        let (kx, ky) = Self::key(self.cell, p);
        for dy in -1..=1 {
            for dx in -1..=1 {
                if let Some(ids) = self.buckets.get(&(kx + dx, ky + dy)) {
                    out.extend_from_slice(ids);
                }
            }
        }
    }
}

/// Whether the occupied set restricted to `rect` has a connected component
/// meeting both `source` and `target` edge segments.
pub(crate) fn occupied_crossing<T: Scalar>(
    discs: &[Disc<T>],
    grid: &DiscGrid,
    rect: &Rect<T>,
    source: (Point2<T>, Point2<T>),
    target: (Point2<T>, Point2<T>),
) -> bool {
    let n = discs.len();
    let mut relevant = vec![false; n];
    let mut touches_source = vec![false; n];
    let mut touches_target = vec![false; n];
    for (i, d) in discs.iter().enumerate() {
        if d.meets_rect(rect) {
            relevant[i] = true;
            touches_source[i] = d.meets_segment(source.0, source.1);
            touches_target[i] = d.meets_segment(target.0, target.1);
            if touches_source[i] && touches_target[i] {
                return true;
            }
        }
    }
    let mut uf = UnionFind::new(n);
    let mut scratch = Vec::new();
    for i in 0..n {
        if !relevant[i] {
            continue;
        }
        grid.near(discs[i].center, &mut scratch);
        for &j in scratch.iter() {
            let j = j as usize;
            if j <= i || !relevant[j] {
                continue;
            }
            if discs_meet_in_rect(&discs[i], &discs[j], rect) {
                uf.union(i as u32, j as u32);
            }
        }
    }
    let mut src_root = vec![false; n];
    let mut tgt_root = vec![false; n];
    for i in 0..n {
        if relevant[i] {
            let r = uf.find(i as u32) as usize;
            src_root[r] |= touches_source[i];
            tgt_root[r] |= touches_target[i];
            if src_root[r] && tgt_root[r] {
                return true;
            }
        }
    }
    false
}

/// Whether the component of discs covering the origin, within `boxr`, reaches
/// the boundary of `boxr`. All origin-covering discs are mutually adjacent at
/// the origin, so they form one component by construction.
pub(crate) fn origin_component_reaches<T: Scalar>(
    discs: &[Disc<T>],
    grid: &DiscGrid,
    boxr: &Rect<T>,
) -> bool {
    let origin = Point2::origin();
    let n = discs.len();
    let mut covers_origin = vec![false; n];
    let mut any_origin = false;
    let mut relevant = vec![false; n];
    let mut touches = vec![false; n];
    for (i, d) in discs.iter().enumerate() {
        if d.meets_rect(boxr) {
            relevant[i] = true;
            covers_origin[i] = d.contains(origin);
            any_origin |= covers_origin[i];
            touches[i] = d.meets_rect_boundary(boxr);
            if covers_origin[i] && touches[i] {
                return true;
            }
        }
    }
    if !any_origin {
        return false;
    }
    let mut uf = UnionFind::new(n);
    let mut scratch = Vec::new();
    for i in 0..n {
        if !relevant[i] {
            continue;
        }
        grid.near(discs[i].center, &mut scratch);
        for &j in scratch.iter() {
            let j = j as usize;
            if j <= i || !relevant[j] {
                continue;
            }
            if discs_meet_in_rect(&discs[i], &discs[j], boxr) {
                uf.union(i as u32, j as u32);
            }
        }
    }
    let mut origin_root = vec![false; n];
    let mut touch_root = vec![false; n];
    for i in 0..n {
        if relevant[i] {
            let r = uf.find(i as u32) as usize;
            origin_root[r] |= covers_origin[i];
            touch_root[r] |= touches[i];
            if origin_root[r] && touch_root[r] {
                return true;
            }
        }
    }
    false
}
