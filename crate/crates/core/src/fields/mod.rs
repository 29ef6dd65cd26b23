//! Stationary random fields used as radius marks.
//!
//! A field realization is exact on its stated window: evaluating it there
//! gives the same values the infinite-volume field would take (for the
//! Voronoi family, up to the recorded certificate budget). Realizations are
//! immutable; queries never mutate shared state.

mod cylinder;
mod radial;
mod voronoi;

pub use cylinder::{Cylinder, CylinderField, CylinderParams};
pub use radial::RadialDistribution;
pub use voronoi::{VoronoiField, VoronoiParams};

use crate::error::{contract_err, param_err};
use crate::geom::{Point2, Rect};
use crate::raster::{raster_shape, Connectivity, CrossingAnswer, FloodAxis, Raster};
use crate::scalar::Scalar;
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub enum FieldRealization<T> {
    Constant { value: T, window: Rect<T> },
    Cylinder(CylinderField<T>),
    Voronoi(VoronoiField<T>),
    Truncated { inner: Box<FieldRealization<T>>, cap: T },
}

impl<T: Scalar> FieldRealization<T> {
    /// Field value at `p`. Defined for every point of the window.
    pub fn evaluate(&self, p: Point2<T>) -> T {
        match self {
            FieldRealization::Constant { value, .. } => *value,
            FieldRealization::Cylinder(f) => f.evaluate(p),
            FieldRealization::Voronoi(f) => f.evaluate(p),
            FieldRealization::Truncated { inner, cap } => inner.evaluate(p).min(*cap),
        }
    }

    /// Region on which the realization is exact.
    pub fn window(&self) -> Rect<T> {
        match self {
            FieldRealization::Constant { window, .. } => *window,
            FieldRealization::Cylinder(f) => f.window(),
            FieldRealization::Voronoi(f) => f.window(),
            FieldRealization::Truncated { inner, .. } => inner.window(),
        }
    }

    /// Region the underlying randomness was sampled on.
    pub fn padded_window(&self) -> Rect<T> {
        match self {
            FieldRealization::Constant { window, .. } => *window,
            FieldRealization::Cylinder(f) => f.window(),
            FieldRealization::Voronoi(f) => f.padded_window(),
            FieldRealization::Truncated { inner, .. } => inner.padded_window(),
        }
    }

    /// Probability budget for the realization differing from the
    /// infinite-volume field anywhere on the window.
    pub fn failure_probability_budget(&self) -> f64 {
        match self {
            FieldRealization::Constant { .. } => 0.0,
            FieldRealization::Cylinder(_) => 0.0,
            FieldRealization::Voronoi(f) => f.failure_probability_budget(),
            FieldRealization::Truncated { inner, .. } => inner.failure_probability_budget(),
        }
    }

    /// Essential supremum of the field, `None` when unbounded.
    pub fn bound(&self) -> Option<T> {
        match self {
            FieldRealization::Constant { value, .. } => Some(*value),
            FieldRealization::Cylinder(f) => {
                f.params.values.max_radius().map(|m| m.max(T::zero()))
            }
            FieldRealization::Voronoi(f) => Some(f.params.high),
            FieldRealization::Truncated { inner, cap } => {
                Some(inner.bound().map_or(*cap, |b| b.min(*cap)))
            }
        }
    }
}

pub fn build_constant_field<T: Scalar>(value: T, window: Rect<T>) -> Result<FieldRealization<T>> {
    if !(value >= T::zero()) || !value.is_finite() {
        return param_err("constant field value must be finite and >= 0");
    }
    Ok(FieldRealization::Constant { value, window })
}

pub fn build_cylinder_field<T: Scalar>(
    params: CylinderParams<T>,
    window: Rect<T>,
    seed: u64,
) -> Result<FieldRealization<T>> {
    Ok(FieldRealization::Cylinder(CylinderField::build(params, window, seed)?))
}

pub fn build_voronoi_field<T: Scalar>(
    params: VoronoiParams<T>,
    window: Rect<T>,
    eps_pad: f64,
    seed: u64,
) -> Result<FieldRealization<T>> {
    Ok(FieldRealization::Voronoi(VoronoiField::build(params, window, eps_pad, seed)?))
}

/// Pointwise minimum with `cap`. Truncating a truncation collapses.
pub fn truncate_field<T: Scalar>(field: FieldRealization<T>, cap: T) -> Result<FieldRealization<T>> {
    if !(cap > T::zero()) || !cap.is_finite() {
        return param_err("field truncation cap must be positive and finite");
    }
    Ok(match field {
        FieldRealization::Truncated { inner, cap: old } => {
            FieldRealization::Truncated { inner, cap: old.min(cap) }
        }
        other => FieldRealization::Truncated { inner: Box::new(other), cap },
    })
}

/// Left-right crossing of `{ field > alpha }` restricted to `rect`, decided
/// on a raster of cell centers with 4-connectivity. Answers `Uncertain` when
/// halving the resolution flips the answer.
pub fn level_set_crossing<T: Scalar>(
    field: &FieldRealization<T>,
    rect: Rect<T>,
    alpha: T,
    resolution: T,
) -> Result<CrossingAnswer> {
    if !(resolution > T::zero()) || !resolution.is_finite() {
        return param_err("raster resolution must be positive and finite");
    }
    if !field.window().contains_rect(&rect) {
        return contract_err("level-set query rectangle exceeds the field window");
    }
    let answer_at = |res: f64| -> bool {
        let (nx, ny) = raster_shape(rect.width().as_f64(), rect.height().as_f64(), res);
        let mut marked = vec![false; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let fx = (ix as f64 + 0.5) / nx as f64;
                let fy = (iy as f64 + 0.5) / ny as f64;
                let p = Point2::new(
                    rect.x_min + rect.width() * T::of_f64(fx),
                    rect.y_min + rect.height() * T::of_f64(fy),
                );
                marked[iy * nx + ix] = field.evaluate(p) > alpha;
            }
        }
        Raster { nx, ny, marked }.flood(FloodAxis::LeftRight, Connectivity::Four).0
    };
    let res = resolution.as_f64();
    let coarse = answer_at(res);
    let fine = answer_at(res / 2.0);
    Ok(if coarse == fine {
        if coarse {
            CrossingAnswer::Yes
        } else {
            CrossingAnswer::No
        }
    } else {
        CrossingAnswer::Uncertain
    })
}
