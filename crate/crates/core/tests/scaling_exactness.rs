//! Doubling every length and quartering the intensity maps the model onto
//! itself. Powers of two keep that map exact in floating point, so paired
//! runs must agree bit for bit, not just statistically.

use geoperc_core::boolean::SetPhase;
use geoperc_core::estimators::estimate_crossing;
use geoperc_core::fields::RadialDistribution;
use geoperc_core::geom::Rect;
use geoperc_core::model::{FieldSpec, ModelSpec};
use geoperc_core::threshold::estimate_lambda_c;
use geoperc_core::FloodAxis;

#[test]
fn crossing_estimates_are_scale_exact() {
    let small_rect = Rect::new(0.0, 0.0, 6.0, 2.0).unwrap();
    let big_rect = Rect::new(0.0, 0.0, 12.0, 4.0).unwrap();
    let cases: [(ModelSpec<f64>, ModelSpec<f64>); 2] = [
        (
            ModelSpec::geostatistical(FieldSpec::Constant { value: 1.0 }),
            ModelSpec::geostatistical(FieldSpec::Constant { value: 2.0 }),
        ),
        (
            ModelSpec::iid(RadialDistribution::point_mass(1.0).unwrap()),
            ModelSpec::iid(RadialDistribution::point_mass(2.0).unwrap()),
        ),
    ];
    for (unit, doubled) in &cases {
        for (phase, axis) in [
            (SetPhase::Occupied, FloodAxis::LeftRight),
            (SetPhase::Vacant, FloodAxis::BottomTop),
        ] {
            let a = estimate_crossing(unit, 0.36, small_rect, phase, axis, 400, 31).unwrap();
            let b = estimate_crossing(doubled, 0.09, big_rect, phase, axis, 400, 31).unwrap();
            assert_eq!(a.value, b.value, "{phase:?} {axis:?}");
            assert_eq!(a.ci_low, b.ci_low);
            assert_eq!(a.ci_high, b.ci_high);
            assert_eq!(a.replications, b.replications);
        }
    }
}

#[test]
fn threshold_brackets_are_scale_exact() {
    let unit = ModelSpec::geostatistical(FieldSpec::Constant { value: 1.0 });
    let half = ModelSpec::geostatistical(FieldSpec::Constant { value: 0.5 });
    let at_unit = estimate_lambda_c(&unit, 10.0, (0.1, 1.2), 0.05, 800, 77).unwrap();
    let at_half = estimate_lambda_c(&half, 5.0, (0.4, 4.8), 0.2, 800, 77).unwrap();
    assert_eq!(at_half.lambda_low, 4.0 * at_unit.lambda_low);
    assert_eq!(at_half.lambda_high, 4.0 * at_unit.lambda_high);
    assert_eq!(at_half.stop, at_unit.stop);
    assert_eq!(at_half.points.len(), at_unit.points.len());
    for (p4, p1) in at_half.points.iter().zip(&at_unit.points) {
        assert_eq!(p4.lambda, 4.0 * p1.lambda);
        assert_eq!(p4.phase, p1.phase);
        assert_eq!(
            p4.hard.map(|e| (e.value, e.ci_low, e.ci_high)),
            p1.hard.map(|e| (e.value, e.ci_low, e.ci_high)),
        );
        assert_eq!(
            p4.easy.map(|e| (e.value, e.ci_low, e.ci_high)),
            p1.easy.map(|e| (e.value, e.ci_low, e.ci_high)),
        );
    }
}
