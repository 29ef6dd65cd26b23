//! Field built from a Poisson process of marked lines: each line carries a
//! value drawn through the value law's quantile, the field at a point is the
//! smallest value among cylinders (line thickenings of the base radius)
//! containing it, and zero outside all of them.

use serde::{Deserialize, Serialize};

use crate::error::param_err;
use crate::fields::radial::RadialDistribution;
use crate::geom::{Point2, Rect};
use crate::sampling::sample_marked_lines;
use crate::scalar::Scalar;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderParams<T> {
    /// Line process intensity `u`.
    pub intensity: f64,
    /// Cylinder radius `r` around each line.
    pub base_radius: T,
    /// Value law; a line with mark `z` gets value `quantile(z)`.
    pub values: RadialDistribution<T>,
}

impl<T: Scalar> CylinderParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.intensity.is_finite() || self.intensity < 0.0 {
            return param_err(format!("line intensity must be >= 0, got {}", self.intensity));
        }
        if !(self.base_radius > T::zero()) || !self.base_radius.is_finite() {
            return param_err("cylinder base radius must be positive and finite");
        }
        Ok(())
    }

    /// Pointwise law of the field when the value law is a point mass: the
    /// field is `value` inside the union of cylinders and zero outside, and
    /// the number of cylinders over a fixed point is Poisson with mean
    /// `2*pi*u*r`.
    pub fn marginal(&self) -> Result<RadialDistribution<T>> {
        match self.values {
            RadialDistribution::PointMass { value } => {
                let hit = 1.0
                    - (-2.0 * std::f64::consts::PI
                        * self.intensity
                        * self.base_radius.as_f64())
                    .exp();
                if value == T::zero() || hit == 0.0 {
                    RadialDistribution::point_mass(T::zero())
                } else if hit == 1.0 {
                    RadialDistribution::point_mass(value)
                } else {
                    RadialDistribution::two_point(T::zero(), value, hit)
                }
            }
            _ => param_err(
                "cylinder-field marginal is only available in closed form for point-mass values",
            ),
        }
    }

    /// Mean number of cylinders, each dilated by its own value, over a fixed
    /// point: `2*pi*u*(r + E[value])`. The count is Poisson with this mean.
    pub fn dilated_cover_mean(&self) -> f64 {
        2.0 * std::f64::consts::PI
            * self.intensity
            * (self.base_radius.as_f64() + self.values.mean())
    }

    /// Probability that a fixed point lies in some cylinder dilated by its
    /// own value; an intensity-free upper bound for coverage by any Boolean
    /// model whose radii are driven by this field.
    pub fn plane_cover_probability(&self) -> f64 {
        1.0 - (-self.dilated_cover_mean()).exp()
    }
}

/// One realized cylinder: points `q` with `|q . normal - offset| <= r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cylinder<T> {
    pub normal: Point2<T>,
    pub offset: T,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CylinderField<T> {
    pub params: CylinderParams<T>,
    window: Rect<T>,
    /// Lines were drawn within this distance of the window center, which
    /// makes the realization exact on the window: every cylinder of the
    /// infinite process that meets the window is present.
    max_line_distance: T,
    cylinders: Vec<Cylinder<T>>,
}

impl<T: Scalar> CylinderField<T> {
    /// Samples every line within `circumradius(window) + base_radius` of the
    /// window center. A cylinder meets the window only if its line passes
    /// within `base_radius` of the window, hence within that budget of the
    /// center, so no relevant cylinder is missed.
    pub fn build(params: CylinderParams<T>, window: Rect<T>, seed: u64) -> Result<Self> {
        params.validate()?;
        let center = window.center();
        let max_line_distance = window.circumradius() + params.base_radius;
        let lines = sample_marked_lines(params.intensity, max_line_distance, seed)?;
        let cylinders = lines
            .iter()
            .map(|l| {
                let normal = Point2::new(l.theta.cos(), l.theta.sin());
                Cylinder {
                    normal,
                    offset: l.x + center.x * normal.x + center.y * normal.y,
                    value: params.values.quantile(l.z),
                }
            })
            .collect();
        Ok(CylinderField { params, window, max_line_distance, cylinders })
    }

    pub fn window(&self) -> Rect<T> {
        self.window
    }

    pub fn cylinders(&self) -> &[Cylinder<T>] {
        &self.cylinders
    }

    /// Smallest value among cylinders containing `p`; zero outside all of
    /// them. Exact for `p` in the window.
    pub fn evaluate(&self, p: Point2<T>) -> T {
        let r = self.params.base_radius;
        let mut best: Option<T> = None;
        for c in &self.cylinders {
            let dist = (p.x * c.normal.x + p.y * c.normal.y - c.offset).abs();
            if dist <= r {
                best = Some(match best {
                    Some(b) => b.min(c.value),
                    None => c.value,
                });
            }
        }
        best.unwrap_or_else(T::zero)
    }

    /// Number of cylinders whose dilation by their own value contains `p`.
    /// Only exact when `max_line_distance >= base_radius + max value`, i.e.
    /// for bounded value laws on a large enough window.
    pub fn dilated_cover_count(&self, p: Point2<T>) -> usize {
        let r = self.params.base_radius;
        self.cylinders
            .iter()
            .filter(|c| (p.x * c.normal.x + p.y * c.normal.y - c.offset).abs() <= r + c.value)
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_values() -> RadialDistribution<f64> {
        RadialDistribution::point_mass(1.0).unwrap()
    }

    #[test]
    fn deterministic_by_seed() {
        let params =
            CylinderParams { intensity: 0.2, base_radius: 2.0, values: unit_values() };
        let w = Rect::new(-5.0, -5.0, 5.0, 5.0).unwrap();
        let a = CylinderField::build(params.clone(), w, 7).unwrap();
        let b = CylinderField::build(params, w, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn field_is_value_on_cylinder_axis_and_zero_far_away() {
        let params =
            CylinderParams { intensity: 0.3, base_radius: 1.0, values: unit_values() };
        let w = Rect::new(-8.0, -8.0, 8.0, 8.0).unwrap();
        let f = CylinderField::build(params, w, 3).unwrap();
        assert!(!f.cylinders().is_empty());
        for c in f.cylinders().iter().take(4) {
            // A point on the line itself evaluates to at most the line value.
            let on_line = Point2::new(c.normal.x * c.offset, c.normal.y * c.offset);
            if w.contains(on_line) {
                let v = f.evaluate(on_line);
                assert!(v <= c.value && v > 0.0);
            }
        }
        // A point farther than base_radius from every line is outside.
        let far = (0..200)
            .map(|i| Point2::new(-8.0 + 16.0 * (i as f64 / 199.0), 7.3))
            .find(|p| {
                f.cylinders().iter().all(|c| {
                    (p.x * c.normal.x + p.y * c.normal.y - c.offset).abs() > 1.0
                })
            });
        if let Some(p) = far {
            assert_eq!(f.evaluate(p), 0.0);
        }
    }

    #[test]
    fn min_rule_on_overlaps() {
        // Two-point values: where two cylinders with different values overlap,
        // the field takes the smaller one.
        let params = CylinderParams {
            intensity: 1.0,
            base_radius: 1.5,
            values: RadialDistribution::two_point(0.5, 2.0, 0.5).unwrap(),
        };
        let w = Rect::new(-4.0, -4.0, 4.0, 4.0).unwrap();
        let f = CylinderField::build(params, w, 11).unwrap();
        let r = f.params.base_radius;
        let mut checked = false;
        for i in 0..60 {
            for j in 0..60 {
                let p = Point2::new(-4.0 + 8.0 * i as f64 / 59.0, -4.0 + 8.0 * j as f64 / 59.0);
                let covering: Vec<f64> = f
                    .cylinders()
                    .iter()
                    .filter(|c| (p.x * c.normal.x + p.y * c.normal.y - c.offset).abs() <= r)
                    .map(|c| c.value)
                    .collect();
                if covering.len() >= 2 {
                    let min = covering.iter().cloned().fold(f64::INFINITY, f64::min);
                    assert_eq!(f.evaluate(p), min);
                    checked = true;
                }
            }
        }
        assert!(checked, "no overlap found; enlarge intensity");
    }

    #[test]
    fn marginal_needs_point_mass() {
        let ok = CylinderParams { intensity: 0.1, base_radius: 2.0, values: unit_values() };
        match ok.marginal().unwrap() {
            RadialDistribution::TwoPoint { low, high, p_high } => {
                assert_eq!(low, 0.0);
                assert_eq!(high, 1.0);
                assert!((p_high - 0.7153904566639707).abs() < 1e-12);
            }
            other => panic!("unexpected marginal {other:?}"),
        }
        let bad = CylinderParams {
            intensity: 0.1,
            base_radius: 2.0,
            values: RadialDistribution::pareto(1.5, 0.5).unwrap(),
        };
        assert!(bad.marginal().is_err());
    }
}
