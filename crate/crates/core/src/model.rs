//! Declarative model specifications and the pipeline that realizes them.
//!
//! A [`ModelSpec`] is the serializable description of one Boolean model:
//! which field supplies the radii and whether points read the field at their
//! own location (geostatistical) or draw an independent copy of its
//! pointwise law (iid). [`ModelSpec::prepare`] turns the spec into a
//! [`CoupledSampler`] holding one point sample and, if needed, one field
//! realization, both sized so that every intensity up to `lambda_max` can be
//! realized from them. Realizations at different intensities share the
//! sample, so they are pathwise nested.

use serde::{Deserialize, Serialize};

use crate::boolean::{realize_occupied, required_pad, MarkingMode, OccupiedRealization};
use crate::error::{param_err, Result};
use crate::fields::{
    build_constant_field, build_cylinder_field, build_voronoi_field, truncate_field,
    CylinderParams, FieldRealization, RadialDistribution, VoronoiParams,
};
use crate::geom::Rect;
use crate::sampling::{sample_marked_points, MarkedPointSet};
use crate::scalar::Scalar;

/// A random radius field, before realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FieldSpec<T> {
    Constant {
        value: T,
    },
    Cylinder {
        #[serde(flatten)]
        params: CylinderParams<T>,
        /// Optional pointwise cap applied after construction. Required for
        /// realizing occupied sets when the value law is unbounded.
        #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
        truncate: Option<T>,
    },
    Voronoi {
        #[serde(flatten)]
        params: VoronoiParams<T>,
    },
}

impl<T: Scalar> FieldSpec<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            FieldSpec::Constant { value } => {
                if !(*value >= T::zero()) || !value.is_finite() {
                    return param_err("constant field value must be finite and >= 0");
                }
                Ok(())
            }
            FieldSpec::Cylinder { params, truncate } => {
                params.validate()?;
                if let Some(cap) = truncate {
                    if !(*cap > T::zero()) || !cap.is_finite() {
                        return param_err("field truncation cap must be positive and finite");
                    }
                }
                Ok(())
            }
            FieldSpec::Voronoi { params } => params.validate(),
        }
    }

    /// The pointwise law of the field value at a fixed location.
    pub fn marginal(&self) -> Result<RadialDistribution<T>> {
        match self {
            FieldSpec::Constant { value } => RadialDistribution::point_mass(*value),
            FieldSpec::Cylinder { params, truncate } => {
                let law = params.marginal()?;
                match truncate {
                    Some(cap) => law.truncated(*cap),
                    None => Ok(law),
                }
            }
            FieldSpec::Voronoi { params } => {
                RadialDistribution::two_point(params.low, params.high, params.p_high)
            }
        }
    }

    /// Essential supremum of the field, if finite.
    pub fn bound(&self) -> Option<T> {
        match self {
            FieldSpec::Constant { value } => Some(*value),
            FieldSpec::Cylinder { params, truncate } => match (params.values.max_radius(), truncate) {
                (Some(m), Some(cap)) => Some(m.min(*cap)),
                (Some(m), None) => Some(m),
                (None, Some(cap)) => Some(*cap),
                (None, None) => None,
            },
            FieldSpec::Voronoi { params } => Some(params.high),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            FieldSpec::Constant { .. } => "constant",
            FieldSpec::Cylinder { .. } => "cylinder",
            FieldSpec::Voronoi { .. } => "voronoi",
        }
    }

    /// Realize the field on `window`.
    pub fn build(&self, window: Rect<T>, eps_pad: f64, seed: u64) -> Result<FieldRealization<T>> {
        match self {
            FieldSpec::Constant { value } => build_constant_field(*value, window),
            FieldSpec::Cylinder { params, truncate } => {
                let field = build_cylinder_field(params.clone(), window, seed)?;
                match truncate {
                    Some(cap) => truncate_field(field, *cap),
                    None => Ok(field),
                }
            }
            FieldSpec::Voronoi { params } => build_voronoi_field(*params, window, eps_pad, seed),
        }
    }
}

/// How points acquire radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MarkingSpec<T> {
    /// All points read one shared field realization at their own location.
    Geostatistical { field: FieldSpec<T> },
    /// Each point draws an independent radius from a fixed law.
    Iid { law: RadialDistribution<T> },
}

fn default_eps_pad() -> f64 {
    1e-6
}

fn default_eps_leak() -> f64 {
    1e-6
}

/// One Boolean model, ready to be realized at any intensity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec<T> {
    pub marking: MarkingSpec<T>,
    /// Total-variation budget allowed for conditioning away field
    /// constructions that fail their window certificate.
    #[serde(default = "default_eps_pad")]
    pub eps_pad: f64,
    /// Expected number of discs allowed to be missing from a realization
    /// because their centers fall beyond the sampled region.
    #[serde(default = "default_eps_leak")]
    pub eps_leak: f64,
}

impl<T: Scalar> ModelSpec<T> {
    pub fn geostatistical(field: FieldSpec<T>) -> Self {
        ModelSpec {
            marking: MarkingSpec::Geostatistical { field },
            eps_pad: default_eps_pad(),
            eps_leak: default_eps_leak(),
        }
    }

    pub fn iid(law: RadialDistribution<T>) -> Self {
        ModelSpec {
            marking: MarkingSpec::Iid { law },
            eps_pad: default_eps_pad(),
            eps_leak: default_eps_leak(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_pad > 0.0 && self.eps_pad < 1.0) {
            return param_err(format!("eps_pad must be in (0, 1), got {}", self.eps_pad));
        }
        if !(self.eps_leak > 0.0 && self.eps_leak < 1.0) {
            return param_err(format!("eps_leak must be in (0, 1), got {}", self.eps_leak));
        }
        match &self.marking {
            MarkingSpec::Geostatistical { field } => field.validate(),
            MarkingSpec::Iid { law: _ } => Ok(()),
        }
    }

    /// The pointwise radius law induced at a fixed location.
    pub fn marginal_law(&self) -> Result<RadialDistribution<T>> {
        match &self.marking {
            MarkingSpec::Geostatistical { field } => field.marginal(),
            MarkingSpec::Iid { law } => Ok(law.clone()),
        }
    }

    /// The iid model with the same pointwise law: the natural comparison
    /// partner of a geostatistical model.
    pub fn iid_counterpart(&self) -> Result<ModelSpec<T>> {
        Ok(ModelSpec {
            marking: MarkingSpec::Iid { law: self.marginal_law()? },
            eps_pad: self.eps_pad,
            eps_leak: self.eps_leak,
        })
    }

    pub fn marking_name(&self) -> &'static str {
        match &self.marking {
            MarkingSpec::Geostatistical { .. } => "geostatistical",
            MarkingSpec::Iid { .. } => "iid",
        }
    }

    pub fn family_name(&self) -> &'static str {
        match &self.marking {
            MarkingSpec::Geostatistical { field } => field.family_name(),
            MarkingSpec::Iid { law } => law.family_name(),
        }
    }

    /// Pad distance and leakage budget for realizing this model at
    /// intensity `lambda` on `window`.
    pub fn pad_for(&self, lambda: f64, window: &Rect<T>) -> Result<(T, f64)> {
        match &self.marking {
            MarkingSpec::Geostatistical { field } => match field.bound() {
                Some(b) => Ok((b, 0.0)),
                None => param_err(
                    "field values are unbounded; set a truncation cap on the field spec",
                ),
            },
            MarkingSpec::Iid { law } => {
                required_pad(MarkingMode::Iid(law), lambda, window, self.eps_leak)
            }
        }
    }

    /// Sample everything needed to realize this model on `window` at any
    /// intensity up to `lambda_max`: points on the padded region and, for
    /// geostatistical marking, one shared field realization covering it.
    pub fn prepare(&self, lambda_max: f64, window: Rect<T>, seed: u64) -> Result<CoupledSampler<T>> {
        self.validate()?;
        let (pad, _) = self.pad_for(lambda_max, &window)?;
        let region = window.dilate(pad)?;
        let points = sample_marked_points(lambda_max, region, seed)?;
        let field = match &self.marking {
            MarkingSpec::Geostatistical { field } => Some(field.build(region, self.eps_pad, seed)?),
            MarkingSpec::Iid { .. } => None,
        };
        Ok(CoupledSampler { spec: self.clone(), window, points, field })
    }
}

/// One point sample plus (for geostatistical marking) one field realization,
/// from which occupied sets at any intensity up to the preparation maximum
/// can be realized; realizations at increasing intensity are nested.
#[derive(Debug)]
pub struct CoupledSampler<T> {
    spec: ModelSpec<T>,
    window: Rect<T>,
    points: MarkedPointSet<T>,
    field: Option<FieldRealization<T>>,
}

impl<T: Scalar> CoupledSampler<T> {
    pub fn occupied_at(&self, lambda: f64) -> Result<OccupiedRealization<T>> {
        let mode = match (&self.spec.marking, &self.field) {
            (MarkingSpec::Geostatistical { .. }, Some(f)) => MarkingMode::Geostatistical(f),
            (MarkingSpec::Iid { law }, None) => MarkingMode::Iid(law),
            _ => unreachable!("field presence is fixed by the marking mode"),
        };
        realize_occupied(&self.points, lambda, mode, self.window, self.spec.eps_leak)
    }

    pub fn window(&self) -> Rect<T> {
        self.window
    }

    pub fn points(&self) -> &MarkedPointSet<T> {
        &self.points
    }

    pub fn field(&self) -> Option<&FieldRealization<T>> {
        self.field.as_ref()
    }

    /// Probability mass conceded to field constructions that were rejected
    /// and rebuilt (zero for fields with exact construction).
    pub fn field_budget(&self) -> f64 {
        self.field.as_ref().map_or(0.0, |f| f.failure_probability_budget())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point2;

    fn window(half: f64) -> Rect<f64> {
        Rect::centered_square(Point2::origin(), half).unwrap()
    }

    fn cylinder_spec() -> FieldSpec<f64> {
        FieldSpec::Cylinder {
            params: CylinderParams {
                intensity: 0.1,
                base_radius: 0.5,
                values: RadialDistribution::point_mass(1.0).unwrap(),
            },
            truncate: None,
        }
    }

    #[test]
    fn specs_round_trip_through_json() {
        let specs: Vec<ModelSpec<f64>> = vec![
            ModelSpec::geostatistical(FieldSpec::Constant { value: 1.0 }),
            ModelSpec::geostatistical(cylinder_spec()),
            ModelSpec::geostatistical(FieldSpec::Voronoi {
                params: VoronoiParams { intensity: 0.5, p_high: 0.3, low: 0.2, high: 1.0 },
            }),
            ModelSpec::iid(RadialDistribution::pareto(3.0, 0.5).unwrap().truncated(2.0).unwrap()),
        ];
        for spec in specs {
            let json = serde_json::to_string(&spec).unwrap();
            let back: ModelSpec<f64> = serde_json::from_str(&json).unwrap();
            assert_eq!(spec, back, "{json}");
        }
    }

    #[test]
    fn frozen_config_shape_still_parses() {
        let json = r#"{
            "marking": {
                "mode": "geostatistical",
                "field": {
                    "family": "voronoi",
                    "intensity": 1.0, "p_high": 0.5, "low": 0.25, "high": 1.0
                }
            }
        }"#;
        let spec: ModelSpec<f64> = serde_json::from_str(json).unwrap();
        assert_eq!(spec.eps_pad, 1e-6);
        assert_eq!(spec.family_name(), "voronoi");
        assert_eq!(
            spec.marginal_law().unwrap(),
            RadialDistribution::two_point(0.25, 1.0, 0.5).unwrap()
        );
    }

    #[test]
    fn marginals_and_bounds() {
        let constant = ModelSpec::geostatistical(FieldSpec::Constant { value: 2.0 });
        assert_eq!(constant.marginal_law().unwrap(), RadialDistribution::point_mass(2.0).unwrap());
        let voro = FieldSpec::Voronoi {
            params: VoronoiParams { intensity: 0.5, p_high: 0.3, low: 0.2, high: 1.0 },
        };
        assert_eq!(voro.bound(), Some(1.0));
        let (pad, budget) =
            ModelSpec::geostatistical(voro).pad_for(0.7, &window(4.0)).unwrap();
        assert_eq!(pad, 1.0);
        assert_eq!(budget, 0.0);
        let unbounded = FieldSpec::Cylinder {
            params: CylinderParams {
                intensity: 0.1,
                base_radius: 0.5,
                values: RadialDistribution::pareto(1.5, 0.5).unwrap(),
            },
            truncate: None,
        };
        assert_eq!(unbounded.bound(), None);
        let err = ModelSpec::geostatistical(unbounded.clone()).pad_for(1.0, &window(4.0));
        assert!(err.is_err());
        let capped = match unbounded {
            FieldSpec::Cylinder { params, .. } => FieldSpec::Cylinder { params, truncate: Some(3.0) },
            _ => unreachable!(),
        };
        assert_eq!(capped.bound(), Some(3.0));
        // The pointwise law of a cylinder field is only closed-form for
        // point-mass values; a Pareto value law reports that.
        assert!(capped.marginal().is_err());
        let capped_point_mass = FieldSpec::Cylinder {
            params: CylinderParams {
                intensity: 0.1,
                base_radius: 0.5,
                values: RadialDistribution::point_mass(5.0).unwrap(),
            },
            truncate: Some(3.0),
        };
        assert_eq!(capped_point_mass.marginal().unwrap().max_radius(), Some(3.0));
    }

    #[test]
    fn iid_counterpart_matches_marginal() {
        let spec = ModelSpec::geostatistical(cylinder_spec());
        let iid = spec.iid_counterpart().unwrap();
        assert_eq!(iid.marking_name(), "iid");
        assert_eq!(iid.marginal_law().unwrap(), spec.marginal_law().unwrap());
    }

    #[test]
    fn sampler_reuse_nests_realizations() {
        let spec = ModelSpec::iid(RadialDistribution::point_mass(0.8).unwrap());
        let sampler = spec.prepare(1.0, window(5.0), 17).unwrap();
        let lo = sampler.occupied_at(0.2).unwrap();
        let hi = sampler.occupied_at(0.9).unwrap();
        assert!(lo.discs().len() <= hi.discs().len());
        for d in lo.discs() {
            assert!(hi.discs().contains(d));
        }
        let again = sampler.occupied_at(0.2).unwrap();
        assert_eq!(lo.discs(), again.discs());
    }

    #[test]
    fn geostatistical_prepare_builds_field_on_padded_region() {
        let spec = ModelSpec::geostatistical(FieldSpec::Voronoi {
            params: VoronoiParams { intensity: 1.0, p_high: 0.5, low: 0.25, high: 1.0 },
        });
        let sampler = spec.prepare(0.5, window(4.0), 23).unwrap();
        let occ = sampler.occupied_at(0.5).unwrap();
        assert_eq!(occ.leakage_budget(), 0.0);
        assert!(sampler.field_budget() > 0.0); // rejection certificate budget
        // Every disc radius is one of the two cell values.
        for d in occ.discs() {
            assert!(d.radius == 0.25 || d.radius == 1.0);
        }
    }
}
