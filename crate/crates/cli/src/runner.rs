//! Executes a validated config and flattens the results into rows.
//!
//! Row seeds are derived from the config master seed by row-group index, in
//! a fixed traversal order, so a config plus a seed pins every number in
//! the output. Rows with `reps = 0` are closed-form values, not estimates.

use geoperc_core::boolean::{iid_coverage_probability, SetPhase};
use geoperc_core::estimators::{
    compare_models, default_levels, estimate_area_fraction, estimate_crossing,
    estimate_crossing_correlation, estimate_field_mixing_proxy, estimate_influence_proxy,
    estimate_point_coverage, estimate_segment_coverage, CompareQuantity, CovarianceEstimate,
    Estimate, Z_95,
};
use geoperc_core::geom::Rect;
use geoperc_core::model::{FieldSpec, MarkingSpec, ModelSpec};
use geoperc_core::sampling::replication_seed;
use geoperc_core::threshold::{
    check_contraction, crossing_curve, estimate_lambda_c, voronoi_threshold_scan, BracketOrder,
    StopReason, ThresholdResult,
};
use geoperc_core::{FloodAxis, Result};

use crate::config::{CommandName, ExperimentConfig, QuantitySpec};
use crate::output::ResultRow;

pub fn run(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    if let Some(model) = &config.model {
        model.validate()?;
    }
    match config.command {
        CommandName::Estimate => run_estimate(config),
        CommandName::ScanLambda => run_scan_lambda(config),
        CommandName::LambdaC => run_lambda_c(config),
        CommandName::Compare => run_compare(config),
        CommandName::VoronoiScan => run_voronoi_scan(config),
        CommandName::CheckContraction => run_contraction(config),
    }
}

/// Hands out one seed per row group, in traversal order.
struct SeedSequence {
    master: u64,
    counter: u64,
}

impl SeedSequence {
    fn new(master: u64) -> Self {
        SeedSequence { master, counter: 0 }
    }

    fn next(&mut self) -> u64 {
        let seed = replication_seed(self.master, self.counter);
        self.counter += 1;
        seed
    }
}

struct Labels {
    family: String,
    marking: String,
}

impl Labels {
    fn of(model: &ModelSpec<f64>) -> Labels {
        Labels { family: model.family_name().into(), marking: model.marking_name().into() }
    }

    fn estimate_row(&self, experiment: &str, e: &Estimate) -> ResultRow {
        ResultRow {
            experiment: experiment.into(),
            field_family: self.family.clone(),
            marking: self.marking.clone(),
            lambda: None,
            n: None,
            s: None,
            mu: None,
            p: None,
            value: e.value,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            reps: e.replications,
            seed: e.master_seed,
            leakage_budget: e.leakage_budget,
        }
    }

    fn covariance_row(&self, experiment: &str, c: &CovarianceEstimate) -> ResultRow {
        ResultRow {
            experiment: experiment.into(),
            field_family: self.family.clone(),
            marking: self.marking.clone(),
            lambda: None,
            n: None,
            s: None,
            mu: None,
            p: None,
            value: c.value,
            ci_low: c.value - Z_95 * c.std_error,
            ci_high: c.value + Z_95 * c.std_error,
            reps: c.replications,
            seed: c.master_seed,
            leakage_budget: c.budget,
        }
    }

    /// A derived (non-sampled) value; `reps` is zero and the interval is
    /// degenerate.
    fn closed_form_row(&self, experiment: &str, value: f64, seed: u64) -> ResultRow {
        ResultRow {
            experiment: experiment.into(),
            field_family: self.family.clone(),
            marking: self.marking.clone(),
            lambda: None,
            n: None,
            s: None,
            mu: None,
            p: None,
            value,
            ci_low: value,
            ci_high: value,
            reps: 0,
            seed,
            leakage_budget: 0.0,
        }
    }

    fn bracket_row(&self, experiment: &str, b: &ThresholdResult<f64>, seed: u64) -> ResultRow {
        let mut row = self.closed_form_row(experiment, 0.5 * (b.lambda_low + b.lambda_high), seed);
        row.ci_low = b.lambda_low;
        row.ci_high = b.lambda_high;
        row.n = Some(b.scale);
        row.reps = b
            .points
            .iter()
            .flat_map(|p| [p.hard, p.easy])
            .flatten()
            .map(|e| e.replications)
            .max()
            .unwrap_or(0);
        row
    }
}

fn hard_box(n: f64) -> Result<Rect<f64>> {
    Rect::new(0.0, 0.0, 3.0 * n, n)
}

fn mixing_field(model: &ModelSpec<f64>) -> Result<&FieldSpec<f64>> {
    match &model.marking {
        MarkingSpec::Geostatistical { field } => Ok(field),
        MarkingSpec::Iid { .. } => Err(geoperc_core::Error::Parameter(
            "field mixing is defined for geostatistical marking only".into(),
        )),
    }
}

fn run_estimate(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let model = config.model.as_ref().expect("validated");
    let labels = Labels::of(model);
    let mut seeds = SeedSequence::new(config.master_seed);
    let reps = config.replications;
    let mut rows = Vec::new();
    for quantity in &config.quantities {
        match quantity {
            QuantitySpec::PointCoverage => {
                for &lambda in &config.lambda_grid {
                    let e = estimate_point_coverage(model, lambda, reps, seeds.next())?;
                    let mut row = labels.estimate_row("point_coverage", &e);
                    row.lambda = Some(lambda);
                    rows.push(row);
                    if let MarkingSpec::Iid { law } = &model.marking {
                        if law.second_moment().is_some() {
                            let truth = iid_coverage_probability(lambda, law);
                            let mut row = labels.closed_form_row(
                                "point_coverage_closed_form",
                                truth,
                                config.master_seed,
                            );
                            row.lambda = Some(lambda);
                            rows.push(row);
                        }
                    }
                }
                // The dilated-cover bound caps coverage at every intensity.
                if let MarkingSpec::Geostatistical { field: FieldSpec::Cylinder { params, .. } } =
                    &model.marking
                {
                    rows.push(labels.closed_form_row(
                        "coverage_upper_bound",
                        params.plane_cover_probability(),
                        config.master_seed,
                    ));
                }
            }
            QuantitySpec::SegmentCoverage { lengths } => {
                for &lambda in &config.lambda_grid {
                    for &s in lengths {
                        let e =
                            estimate_segment_coverage(model, lambda, s, reps, seeds.next())?;
                        let mut row = labels.estimate_row("segment_coverage", &e);
                        row.lambda = Some(lambda);
                        row.s = Some(s);
                        rows.push(row);
                    }
                }
            }
            QuantitySpec::BoxCrossing { scales }
            | QuantitySpec::EasyCrossing { scales }
            | QuantitySpec::VacantCrossing { scales } => {
                let (name, easy, phase, axis) = match quantity {
                    QuantitySpec::BoxCrossing { .. } => {
                        ("box_crossing", false, SetPhase::Occupied, FloodAxis::LeftRight)
                    }
                    QuantitySpec::EasyCrossing { .. } => {
                        ("easy_crossing", true, SetPhase::Occupied, FloodAxis::LeftRight)
                    }
                    _ => ("vacant_crossing", false, SetPhase::Vacant, FloodAxis::BottomTop),
                };
                for &lambda in &config.lambda_grid {
                    for &n in scales {
                        let rect =
                            if easy { Rect::new(0.0, 0.0, n, 3.0 * n)? } else { hard_box(n)? };
                        let e = estimate_crossing(
                            model,
                            lambda,
                            rect,
                            phase,
                            axis,
                            reps,
                            seeds.next(),
                        )?;
                        let mut row = labels.estimate_row(name, &e);
                        row.lambda = Some(lambda);
                        row.n = Some(n);
                        rows.push(row);
                    }
                }
            }
            QuantitySpec::AreaFraction { scales, probes } => {
                for &lambda in &config.lambda_grid {
                    for &n in scales {
                        let rect = Rect::new(0.0, 0.0, n, n)?;
                        let e = estimate_area_fraction(
                            model,
                            lambda,
                            rect,
                            *probes,
                            reps,
                            seeds.next(),
                        )?;
                        let mut row = labels.estimate_row("area_fraction", &e);
                        row.lambda = Some(lambda);
                        row.n = Some(n);
                        rows.push(row);
                    }
                }
            }
            QuantitySpec::InfluenceProxy { scales } => {
                for &lambda in &config.lambda_grid {
                    for &n in scales {
                        let e = estimate_influence_proxy(
                            model,
                            lambda,
                            n,
                            config.eps0,
                            reps,
                            seeds.next(),
                        )?;
                        let mut row = labels.estimate_row("influence_proxy", &e);
                        row.lambda = Some(lambda);
                        row.n = Some(n);
                        rows.push(row);
                    }
                }
            }
            QuantitySpec::FieldMixing { scales, levels } => {
                // A field functional: no dependence on the disc intensity.
                let field = mixing_field(model)?;
                let levels = match levels {
                    Some(l) => l.clone(),
                    None => default_levels(&model.marginal_law()?),
                };
                for &n in scales {
                    let c = estimate_field_mixing_proxy(
                        field,
                        model.eps_pad,
                        n,
                        config.eps0,
                        &levels,
                        reps,
                        seeds.next(),
                    )?;
                    let mut row = labels.covariance_row("field_mixing", &c);
                    row.n = Some(n);
                    rows.push(row);
                }
            }
            QuantitySpec::CrossingCorrelation { scales, levels } => {
                for &lambda in &config.lambda_grid {
                    for &n in scales {
                        let c = estimate_crossing_correlation(
                            model,
                            lambda,
                            n,
                            config.eps0,
                            levels.as_deref(),
                            reps,
                            seeds.next(),
                        )?;
                        let with_pos = |mut row: ResultRow| {
                            row.lambda = Some(lambda);
                            row.n = Some(n);
                            row
                        };
                        rows.push(with_pos(
                            labels.covariance_row("crossing_covariance", &c.crossing_covariance),
                        ));
                        rows.push(with_pos(
                            labels.estimate_row("crossing_influence", &c.influence),
                        ));
                        if let Some(m) = &c.field_mixing {
                            rows.push(with_pos(
                                labels.covariance_row("crossing_field_mixing", m),
                            ));
                        }
                        let mut bound = labels.closed_form_row(
                            "crossing_bound",
                            c.bound_value,
                            c.influence.master_seed,
                        );
                        bound.ci_high = c.bound_high;
                        bound.reps = reps;
                        rows.push(with_pos(bound));
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn run_scan_lambda(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let model = config.model.as_ref().expect("validated");
    let labels = Labels::of(model);
    let n = config.scale.expect("validated");
    let curve = crossing_curve(
        model,
        n,
        &config.lambda_grid,
        config.replications,
        config.master_seed,
    )?;
    Ok(curve
        .lambda_grid
        .iter()
        .zip(&curve.estimates)
        .map(|(&lambda, e)| {
            let mut row = labels.estimate_row("crossing_curve", e);
            row.lambda = Some(lambda);
            row.n = Some(n);
            row
        })
        .collect())
}

fn run_lambda_c(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let model = config.model.as_ref().expect("validated");
    let labels = Labels::of(model);
    let n = config.scale.expect("validated");
    let result = estimate_lambda_c(
        model,
        n,
        config.bracket.expect("validated"),
        config.tolerance.expect("validated"),
        config.replications,
        config.master_seed,
    )?;
    let mut rows = vec![labels.bracket_row("lambda_c_bracket", &result, config.master_seed)];
    if result.stop == StopReason::UndeterminedMidpoint {
        rows.push(labels.closed_form_row("lambda_c_undetermined", 1.0, config.master_seed));
    }
    for point in &result.points {
        if let Some(h) = &point.hard {
            let mut hard = labels.estimate_row("lambda_c_hard", h);
            hard.lambda = Some(point.lambda);
            hard.n = Some(n);
            rows.push(hard);
        }
        if let Some(e) = &point.easy {
            let mut easy = labels.estimate_row("lambda_c_easy", e);
            easy.lambda = Some(point.lambda);
            easy.n = Some(n);
            rows.push(easy);
        }
    }
    Ok(rows)
}

fn expand_compare(quantities: &[QuantitySpec]) -> Vec<CompareQuantity<f64>> {
    let mut out = Vec::new();
    for q in quantities {
        match q {
            QuantitySpec::PointCoverage => out.push(CompareQuantity::PointCoverage),
            QuantitySpec::SegmentCoverage { lengths } => out.extend(
                lengths.iter().map(|&length| CompareQuantity::SegmentCoverage { length }),
            ),
            QuantitySpec::BoxCrossing { scales } => {
                out.extend(scales.iter().map(|&n| CompareQuantity::BoxCrossing { n }))
            }
            _ => unreachable!("rejected by config validation"),
        }
    }
    out
}

fn run_compare(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let geo = config.model.as_ref().expect("validated");
    let iid = geo.iid_counterpart()?;
    let geo_labels = Labels::of(geo);
    let iid_labels = Labels::of(&iid);
    let quantities = expand_compare(&config.quantities);
    let mut seeds = SeedSequence::new(config.master_seed);
    let mut rows = Vec::new();
    for &lambda in &config.lambda_grid {
        let comparison =
            compare_models(geo, &iid, lambda, &quantities, config.replications, seeds.next())?;
        for r in &comparison {
            let (s, n) = match r.quantity {
                CompareQuantity::PointCoverage => (None, None),
                CompareQuantity::SegmentCoverage { length } => (Some(length), None),
                CompareQuantity::BoxCrossing { n } => (None, Some(n)),
            };
            let name = format!("compare_{}", r.quantity.label());
            for (labels, e) in
                [(&geo_labels, &r.geostatistical), (&iid_labels, &r.iid)]
            {
                let mut row = labels.estimate_row(&name, e);
                row.lambda = Some(lambda);
                row.s = s;
                row.n = n;
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

fn run_voronoi_scan(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let n = config.scale.expect("validated");
    let scan = voronoi_threshold_scan(
        &config.mu_grid,
        &config.p_grid,
        config.radius_low.expect("validated"),
        config.radius_high.expect("validated"),
        n,
        config.tolerance.expect("validated"),
        config.replications,
        config.master_seed,
    )?;
    let geo_labels = Labels { family: "voronoi".into(), marking: "geostatistical".into() };
    let iid_labels = Labels { family: "two_point".into(), marking: "iid".into() };
    let mut rows = Vec::new();
    for cell in &scan {
        let with_cell = |mut row: ResultRow| {
            row.mu = Some(cell.cell_intensity);
            row.p = Some(cell.p_high);
            row
        };
        rows.push(with_cell(geo_labels.bracket_row(
            "threshold_bracket",
            &cell.geostatistical,
            config.master_seed,
        )));
        rows.push(with_cell(iid_labels.bracket_row(
            "threshold_bracket",
            &cell.iid,
            config.master_seed,
        )));
        if let Some(order) = cell.ordering {
            // -1: the cell-field bracket sits strictly below the iid one.
            let sign = match order {
                BracketOrder::GeostatisticalBelow => -1.0,
                BracketOrder::GeostatisticalAbove => 1.0,
            };
            let mut row =
                geo_labels.closed_form_row("bracket_order", sign, config.master_seed);
            row.n = Some(n);
            rows.push(with_cell(row));
        }
    }
    Ok(rows)
}

fn run_contraction(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let model = config.model.as_ref().expect("validated");
    let labels = Labels::of(model);
    let n = config.scale.expect("validated");
    let mut seeds = SeedSequence::new(config.master_seed);
    let mut rows = Vec::new();
    for &lambda in &config.lambda_grid {
        let report =
            check_contraction(model, lambda, n, config.eps0, config.replications, seeds.next())?;
        let with_lambda = |mut row: ResultRow, scale: f64| {
            row.lambda = Some(lambda);
            row.n = Some(scale);
            row
        };
        rows.push(with_lambda(labels.estimate_row("contraction_hard_n", &report.hard_n), n));
        rows.push(with_lambda(
            labels.estimate_row("contraction_hard_3n", &report.hard_3n),
            3.0 * n,
        ));
        rows.push(with_lambda(
            labels.estimate_row("contraction_influence", &report.influence_9n),
            9.0 * n,
        ));
        if let Some(m) = &report.field_mixing_9n {
            rows.push(with_lambda(labels.covariance_row("contraction_field_mixing", m), 9.0 * n));
        }
        // The inequality under test: q(3n) <= rhs, within slack.
        let mut rhs =
            labels.closed_form_row("contraction_rhs", report.rhs, config.master_seed);
        rhs.ci_high = report.rhs + report.slack;
        rows.push(with_lambda(rhs, n));
        let holds = if report.holds_within_slack { 1.0 } else { 0.0 };
        rows.push(with_lambda(
            labels.closed_form_row("contraction_holds", holds, config.master_seed),
            n,
        ));
    }
    Ok(rows)
}
