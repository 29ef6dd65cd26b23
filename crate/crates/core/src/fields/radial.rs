//! Radius laws used for disc marking and as field value distributions.
//!
//! Each law exposes its generalized inverse CDF ("quantile"), upper tail,
//! moments, and essential supremum. The quantile is the canonical sampler:
//! a radius is always `quantile(uniform mark)`, which is what makes paired
//! comparisons between marking modes well defined.

use serde::{Deserialize, Serialize};

use crate::error::param_err;
use crate::scalar::Scalar;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RadialDistribution<T> {
    /// All mass at `value`.
    PointMass { value: T },
    /// `low` with probability `1 - p_high`, `high` with probability `p_high`.
    TwoPoint { low: T, high: T, p_high: f64 },
    /// `P(R > t) = (scale / t)^shape` for `t >= scale`; requires `shape > 1`
    /// so the mean is finite.
    Pareto { shape: f64, scale: T },
    /// `min(inner, cap)`.
    Truncated { inner: Box<RadialDistribution<T>>, cap: T },
}

impl<T: Scalar> RadialDistribution<T> {
    pub fn point_mass(value: T) -> Result<Self> {
        if !(value >= T::zero()) || !value.is_finite() {
            return param_err("point mass value must be finite and >= 0");
        }
        Ok(RadialDistribution::PointMass { value })
    }

    pub fn two_point(low: T, high: T, p_high: f64) -> Result<Self> {
        if !(low >= T::zero() && high > low) || !high.is_finite() {
            return param_err("two-point law requires 0 <= low < high < inf");
        }
        if !(0.0..=1.0).contains(&p_high) {
            return param_err(format!("p_high must be in [0, 1], got {p_high}"));
        }
        Ok(RadialDistribution::TwoPoint { low, high, p_high })
    }

    pub fn pareto(shape: f64, scale: T) -> Result<Self> {
        if !(shape > 1.0) || !shape.is_finite() {
            return param_err(format!("Pareto shape must be > 1 (finite mean), got {shape}"));
        }
        if !(scale > T::zero()) || !scale.is_finite() {
            return param_err("Pareto scale must be positive and finite");
        }
        Ok(RadialDistribution::Pareto { shape, scale })
    }

    /// Truncates at `cap`. Truncating a truncation collapses to the smaller
    /// cap.
    pub fn truncated(self, cap: T) -> Result<Self> {
        if !(cap > T::zero()) || !cap.is_finite() {
            return param_err("truncation cap must be positive and finite");
        }
        Ok(match self {
            RadialDistribution::Truncated { inner, cap: old } => {
                RadialDistribution::Truncated { inner, cap: old.min(cap) }
            }
            other => RadialDistribution::Truncated { inner: Box::new(other), cap },
        })
    }

    /// Generalized inverse CDF: `inf { x : P(R <= x) >= z }` for `z` in
    /// `[0, 1)`.
    pub fn quantile(&self, z: f64) -> T {
        match self {
            RadialDistribution::PointMass { value } => *value,
            RadialDistribution::TwoPoint { low, high, p_high } => {
                if z <= 1.0 - p_high {
                    *low
                } else {
                    *high
                }
            }
            RadialDistribution::Pareto { shape, scale } => {
                *scale * T::of_f64((1.0 - z).powf(-1.0 / shape))
            }
            RadialDistribution::Truncated { inner, cap } => inner.quantile(z).min(*cap),
        }
    }

    /// Upper tail `P(R > t)`.
    pub fn tail(&self, t: T) -> f64 {
        if t < T::zero() {
            return 1.0;
        }
        match self {
            RadialDistribution::PointMass { value } => {
                if t < *value {
                    1.0
                } else {
                    0.0
                }
            }
            RadialDistribution::TwoPoint { low, high, p_high } => {
                if t < *low {
                    1.0
                } else if t < *high {
                    *p_high
                } else {
                    0.0
                }
            }
            RadialDistribution::Pareto { shape, scale } => {
                if t < *scale {
                    1.0
                } else {
                    (scale.as_f64() / t.as_f64()).powf(*shape)
                }
            }
            RadialDistribution::Truncated { inner, cap } => {
                if t < *cap {
                    inner.tail(t)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            RadialDistribution::PointMass { value } => value.as_f64(),
            RadialDistribution::TwoPoint { low, high, p_high } => {
                (1.0 - p_high) * low.as_f64() + p_high * high.as_f64()
            }
            RadialDistribution::Pareto { shape, scale } => {
                scale.as_f64() * shape / (shape - 1.0)
            }
            RadialDistribution::Truncated { inner, cap } => {
                inner.truncated_moment(cap.as_f64(), 1)
            }
        }
    }

    /// `E[R^2]`, or `None` when infinite.
    pub fn second_moment(&self) -> Option<f64> {
        match self {
            RadialDistribution::PointMass { value } => Some(value.as_f64().powi(2)),
            RadialDistribution::TwoPoint { low, high, p_high } => {
                Some((1.0 - p_high) * low.as_f64().powi(2) + p_high * high.as_f64().powi(2))
            }
            RadialDistribution::Pareto { shape, scale } => {
                if *shape > 2.0 {
                    Some(scale.as_f64().powi(2) * shape / (shape - 2.0))
                } else {
                    None
                }
            }
            RadialDistribution::Truncated { inner, cap } => {
                Some(inner.truncated_moment(cap.as_f64(), 2))
            }
        }
    }

    /// `E[min(R, cap)^k]` for `k` in `{1, 2}`, closed form per family.
    fn truncated_moment(&self, cap: f64, k: u32) -> f64 {
        let clamp = |v: f64| v.min(cap);
        match self {
            RadialDistribution::PointMass { value } => clamp(value.as_f64()).powi(k as i32),
            RadialDistribution::TwoPoint { low, high, p_high } => {
                (1.0 - p_high) * clamp(low.as_f64()).powi(k as i32)
                    + p_high * clamp(high.as_f64()).powi(k as i32)
            }
            RadialDistribution::Pareto { shape, scale } => {
                let s = scale.as_f64();
                let b = *shape;
                let m = cap;
                if m <= s {
                    return m.powi(k as i32);
                }
                // E[(R ∧ M)^k] = k ∫_0^M t^{k-1} P(R > t) dt
                //             = s^k + k s^b ∫_s^M t^{k-1-b} dt.
                let kf = k as f64;
                let tail_part = if (b - kf).abs() < 1e-12 {
                    s.powf(b) * kf * (m / s).ln()
                } else {
                    kf * s.powf(b) * (m.powf(kf - b) - s.powf(kf - b)) / (kf - b)
                };
                s.powf(kf) + tail_part
            }
            RadialDistribution::Truncated { inner, cap: c } => {
                inner.truncated_moment(cap.min(c.as_f64()), k)
            }
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            RadialDistribution::PointMass { .. } => "point_mass",
            RadialDistribution::TwoPoint { .. } => "two_point",
            RadialDistribution::Pareto { .. } => "pareto",
            RadialDistribution::Truncated { .. } => "truncated",
        }
    }

    /// Essential supremum; `None` for unbounded support.
    pub fn max_radius(&self) -> Option<T> {
        match self {
            RadialDistribution::PointMass { value } => Some(*value),
            RadialDistribution::TwoPoint { low, high, p_high } => {
                if *p_high == 0.0 {
                    Some(*low)
                } else {
                    Some(*high)
                }
            }
            RadialDistribution::Pareto { .. } => None,
            RadialDistribution::Truncated { inner, cap } => {
                Some(inner.max_radius().map_or(*cap, |m| m.min(*cap)))
            }
        }
    }

    /// Structural equality up to floating-point noise in the parameters; used
    /// to validate that an explicitly supplied marginal matches the field.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |a: T, b: T| (a.as_f64() - b.as_f64()).abs() <= tol;
        match (self, other) {
            (
                RadialDistribution::PointMass { value: a },
                RadialDistribution::PointMass { value: b },
            ) => close(*a, *b),
            (
                RadialDistribution::TwoPoint { low: l1, high: h1, p_high: p1 },
                RadialDistribution::TwoPoint { low: l2, high: h2, p_high: p2 },
            ) => close(*l1, *l2) && close(*h1, *h2) && (p1 - p2).abs() <= tol,
            (
                RadialDistribution::Pareto { shape: s1, scale: c1 },
                RadialDistribution::Pareto { shape: s2, scale: c2 },
            ) => (s1 - s2).abs() <= tol && close(*c1, *c2),
            (
                RadialDistribution::Truncated { inner: i1, cap: c1 },
                RadialDistribution::Truncated { inner: i2, cap: c2 },
            ) => close(*c1, *c2) && i1.approx_eq(i2, tol),
            _ => false,
        }
    }
}
