//! Monte Carlo estimators over model realizations.
//!
//! Replications are parallel but deterministic: replication `i` always runs
//! on `replication_seed(master_seed, i)` and results are reduced in index
//! order, so output is byte-identical regardless of thread count. Every
//! estimate carries its 95% interval and the mean per-replication failure
//! budget (field construction + disc leakage), which bounds how far the
//! estimated probability can sit from its infinite-window counterpart.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolean::{OccupiedRealization, SetPhase};
use crate::error::{param_err, Result};
use crate::fields::{FieldRealization, RadialDistribution};
use crate::geom::{Point2, Rect};
use crate::model::{CoupledSampler, FieldSpec, MarkingSpec, ModelSpec};
use crate::raster::FloodAxis;
use crate::sampling::replication_seed;
use crate::scalar::Scalar;

/// Two-sided 95% normal quantile, pinned so intervals are reproducible.
pub const Z_95: f64 = 1.959963984540054;

/// Half-width of the tiny window used when a query only concerns the origin
/// or a segment on the x-axis; the realization pad extends it as needed.
const QUERY_MARGIN: f64 = 1e-3;

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0, "Wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// A Monte Carlo estimate with its 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replications: u64,
    pub master_seed: u64,
    /// Mean per-replication failure budget: an additive bound on the bias
    /// introduced by finite sampling regions and conditioned constructions.
    pub leakage_budget: f64,
}

impl Estimate {
    /// Wilson interval for a Bernoulli mean.
    pub fn from_binomial(successes: u64, replications: u64, master_seed: u64, budget: f64) -> Estimate {
        let (ci_low, ci_high) = wilson_interval(successes, replications, Z_95);
        Estimate {
            value: successes as f64 / replications as f64,
            ci_low,
            ci_high,
            replications,
            master_seed,
            leakage_budget: budget,
        }
    }

    /// Normal interval for a mean of bounded per-replication values.
    pub fn from_mean(values: &[f64], master_seed: u64, budget: f64) -> Estimate {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let half = Z_95 * (var / n).sqrt();
        Estimate {
            value: mean,
            ci_low: mean - half,
            ci_high: mean + half,
            replications: values.len() as u64,
            master_seed,
            leakage_budget: budget,
        }
    }

    /// Whether the intervals of two estimates do not overlap.
    pub fn ci_disjoint_from(&self, other: &Estimate) -> bool {
        self.ci_high < other.ci_low || other.ci_high < self.ci_low
    }
}

/// Runs `replications` independent jobs and collects their outputs in index
/// order. Errors are reported for the lowest failing index, regardless of
/// which thread hit one first.
pub fn run_replications<O, F>(replications: u64, master_seed: u64, job: F) -> Result<Vec<O>>
where
    O: Send,
    F: Fn(u64, u64) -> Result<O> + Sync,
{
    if replications == 0 {
        return param_err("replication count must be positive");
    }
    let raw: Vec<Result<O>> = (0..replications)
        .into_par_iter()
        .map(|i| job(i, replication_seed(master_seed, i)))
        .collect();
    let mut out = Vec::with_capacity(raw.len());
    for r in raw {
        out.push(r?);
    }
    Ok(out)
}

/// Estimates the probability of an event of one realization at intensity
/// `lambda` on `window`.
pub fn estimate_event<T, F>(
    model: &ModelSpec<T>,
    lambda: f64,
    window: Rect<T>,
    replications: u64,
    master_seed: u64,
    event: F,
) -> Result<Estimate>
where
    T: Scalar,
    F: Fn(&OccupiedRealization<T>, &CoupledSampler<T>) -> Result<bool> + Sync,
{
    let outcomes = run_replications(replications, master_seed, |_, seed| {
        let sampler = model.prepare(lambda, window, seed)?;
        let occ = sampler.occupied_at(lambda)?;
        let hit = event(&occ, &sampler)?;
        Ok((hit, occ.leakage_budget() + sampler.field_budget()))
    })?;
    let successes = outcomes.iter().filter(|(hit, _)| *hit).count() as u64;
    let budget = outcomes.iter().map(|(_, b)| b).sum::<f64>() / replications as f64;
    Ok(Estimate::from_binomial(successes, replications, master_seed, budget))
}

/// P(origin covered).
pub fn estimate_point_coverage<T: Scalar>(
    model: &ModelSpec<T>,
    lambda: f64,
    replications: u64,
    master_seed: u64,
) -> Result<Estimate> {
    let window = Rect::centered_square(Point2::origin(), T::of_f64(QUERY_MARGIN))?;
    estimate_event(model, lambda, window, replications, master_seed, |occ, _| {
        occ.covers_point(Point2::origin())
    })
}

/// P(the segment from the origin to `(length, 0)` is fully covered).
pub fn estimate_segment_coverage<T: Scalar>(
    model: &ModelSpec<T>,
    lambda: f64,
    length: T,
    replications: u64,
    master_seed: u64,
) -> Result<Estimate> {
    if !(length >= T::zero()) || !length.is_finite() {
        return param_err("segment length must be nonnegative and finite");
    }
    let m = T::of_f64(QUERY_MARGIN);
    let window = Rect::new(T::zero() - m, T::zero() - m, length + m, m)?;
    estimate_event(model, lambda, window, replications, master_seed, move |occ, _| {
        occ.covers_segment(length)
    })
}

/// P(`rect` is crossed by the chosen set along `axis`).
pub fn estimate_crossing<T: Scalar>(
    model: &ModelSpec<T>,
    lambda: f64,
    rect: Rect<T>,
    phase: SetPhase,
    axis: FloodAxis,
    replications: u64,
    master_seed: u64,
) -> Result<Estimate> {
    estimate_event(model, lambda, rect, replications, master_seed, move |occ, _| {
        occ.has_crossing(&rect, phase, axis)
    })
}

/// Mean covered area fraction of `rect`, with `probes` strata per
/// replication.
pub fn estimate_area_fraction<T: Scalar>(
    model: &ModelSpec<T>,
    lambda: f64,
    rect: Rect<T>,
    probes: u64,
    replications: u64,
    master_seed: u64,
) -> Result<Estimate> {
    let outcomes = run_replications(replications, master_seed, |_, seed| {
        let sampler = model.prepare(lambda, rect, seed)?;
        let occ = sampler.occupied_at(lambda)?;
        let est = occ.covered_area_fraction(&rect, probes, seed)?;
        Ok((est.fraction, occ.leakage_budget() + sampler.field_budget()))
    })?;
    let values: Vec<f64> = outcomes.iter().map(|(f, _)| *f).collect();
    let budget = outcomes.iter().map(|(_, b)| b).sum::<f64>() / replications as f64;
    Ok(Estimate::from_mean(&values, master_seed, budget))
}

/// Probe lattice side for field functionals; fixed so proxy values are
/// comparable across runs.
pub const PROBE_GRID: usize = 33;

fn validate_scale_eps0<T: Scalar>(n: T, eps0: f64) -> Result<()> {
    if !(n > T::zero()) || !n.is_finite() {
        return param_err("scale n must be positive and finite");
    }
    if !(eps0 > 0.0 && eps0 <= 0.2) {
        return param_err(format!("eps0 must lie in (0, 1/5], got {eps0}"));
    }
    Ok(())
}

/// The two test boxes at scale `n`: centered at the origin and at
/// `((2 + eps0) n, 0)`, of half-width `n`, or `(1 + eps0/4) n` for the
/// enlarged version. The enlarged boxes stay disjoint by a gap of
/// `eps0 n / 2`.
fn proxy_boxes<T: Scalar>(n: T, eps0: f64, enlarged: bool) -> Result<(Rect<T>, Rect<T>)> {
    let half = if enlarged { n * T::of_f64(1.0 + eps0 / 4.0) } else { n };
    let shift = n * T::of_f64(2.0 + eps0);
    Ok((
        Rect::centered_square(Point2::origin(), half)?,
        Rect::centered_square(Point2::new(shift, T::zero()), half)?,
    ))
}

/// Long-range influence proxy at scale `n`: the probability that some point
/// outside the enlarged box `B(0, (1 + eps0/4) n)` carries a disc reaching
/// the box `B(0, n)`. Decays to zero in `n` exactly when single discs stop
/// mattering at scale `eps0 * n`; it is a lower bound for the full
/// dependence range, not an upper one. The probability of such a disc
/// arriving from beyond the sampling pad is covered by the leakage budget.
pub fn estimate_influence_proxy<T: Scalar>(
    model: &ModelSpec<T>,
    lambda: f64,
    n: T,
    eps0: f64,
    replications: u64,
    master_seed: u64,
) -> Result<Estimate> {
    validate_scale_eps0(n, eps0)?;
    let window = Rect::centered_square(Point2::origin(), n)?;
    let enlarged = Rect::centered_square(Point2::origin(), n * T::of_f64(1.0 + eps0 / 4.0))?;
    estimate_event(model, lambda, window, replications, master_seed, move |occ, _| {
        // Realized discs are exactly those meeting the window, so the event
        // is that one of them is centered outside the enlarged box.
        Ok(occ.discs().iter().any(|d| !enlarged.contains(d.center)))
    })
}

/// A covariance magnitude plus its influence-function standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    /// Largest absolute sample covariance over the tested event pairs.
    pub value: f64,
    pub std_error: f64,
    pub replications: u64,
    pub master_seed: u64,
    pub budget: f64,
}

/// Sample covariance of two indicator streams and the standard error of the
/// estimate via its influence function.
fn covariance_with_se(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n;
    let var_infl = x
        .iter()
        .zip(y)
        .map(|(a, b)| ((a - mx) * (b - my) - cov).powi(2))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    (cov, (var_infl / n).sqrt())
}

/// Largest |covariance| over all feature pairs, with the standard error of
/// the selected pair. Features are columns of `a` (first box) and `b`
/// (second box); rows are replications.
fn max_abs_covariance(a: &[Vec<f64>], b: &[Vec<f64>]) -> (f64, f64) {
    let cols_a = a[0].len();
    let cols_b = b[0].len();
    let column = |m: &[Vec<f64>], j: usize| -> Vec<f64> { m.iter().map(|r| r[j]).collect() };
    let mut best = (0.0f64, 0.0f64);
    for i in 0..cols_a {
        let x = column(a, i);
        for j in 0..cols_b {
            let y = column(b, j);
            let (cov, se) = covariance_with_se(&x, &y);
            if cov.abs() > best.0 {
                best = (cov.abs(), se);
            }
        }
    }
    best
}

/// Level-set indicators of one box: for each level, whether the field at the
/// box center exceeds it and whether the minimum over a fixed probe grid
/// exceeds it.
fn box_features<T: Scalar>(
    field: &FieldRealization<T>,
    boxr: &Rect<T>,
    levels: &[T],
    grid: usize,
) -> Vec<f64> {
    let center_value = field.evaluate(boxr.center());
    let mut min_value = center_value;
    for iy in 0..grid {
        for ix in 0..grid {
            let fx = (ix as f64 + 0.5) / grid as f64;
            let fy = (iy as f64 + 0.5) / grid as f64;
            let p = Point2::new(
                boxr.x_min + boxr.width() * T::of_f64(fx),
                boxr.y_min + boxr.height() * T::of_f64(fy),
            );
            min_value = min_value.min(field.evaluate(p));
        }
    }
    let mut features = Vec::with_capacity(2 * levels.len());
    for &alpha in levels {
        features.push(if center_value > alpha { 1.0 } else { 0.0 });
        features.push(if min_value > alpha { 1.0 } else { 0.0 });
    }
    features
}

/// Field mixing proxy at scale `n`: the largest absolute covariance between
/// level-set indicators of the field on the two enlarged test boxes, over a
/// fixed finite family (center and min-over-lattice indicators at each
/// level). A lower bound on the dependence between the two box
/// sigma-algebras, not an estimate of the supremum.
pub fn estimate_field_mixing_proxy<T: Scalar>(
    field: &FieldSpec<T>,
    eps_pad: f64,
    n: T,
    eps0: f64,
    levels: &[T],
    replications: u64,
    master_seed: u64,
) -> Result<CovarianceEstimate> {
    validate_scale_eps0(n, eps0)?;
    if levels.is_empty() {
        return param_err("mixing proxy needs at least one level");
    }
    if replications < 2 {
        return param_err("covariance estimation needs at least two replications");
    }
    field.validate()?;
    let (box1, box2) = proxy_boxes(n, eps0, true)?;
    let window = box1.hull(&box2);
    let outcomes = run_replications(replications, master_seed, |_, seed| {
        let realization = field.build(window, eps_pad, seed)?;
        let f1 = box_features(&realization, &box1, levels, PROBE_GRID);
        let f2 = box_features(&realization, &box2, levels, PROBE_GRID);
        let budget = realization.failure_probability_budget();
        Ok((f1, f2, budget))
    })?;
    let a: Vec<Vec<f64>> = outcomes.iter().map(|(f1, _, _)| f1.clone()).collect();
    let b: Vec<Vec<f64>> = outcomes.iter().map(|(_, f2, _)| f2.clone()).collect();
    let budget = outcomes.iter().map(|(_, _, g)| g).sum::<f64>() / replications as f64;
    let (value, std_error) = max_abs_covariance(&a, &b);
    Ok(CovarianceEstimate { value, std_error, replications, master_seed, budget })
}

/// Dependence between the crossing events of the two test boxes at scale
/// `n`, with the decomposition bound accounting for it: the covariance is a
/// lower bound on the true dependence coefficient, while
/// `4 * influence + field_mixing` upper-bounds it (up to the field term
/// itself being a finite-family lower bound, so a violation of the sandwich
/// is only ever reported as inconclusive by callers).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingCorrelation {
    /// |covariance| of the two left-right crossing indicators.
    pub crossing_covariance: CovarianceEstimate,
    /// Influence proxy at scale n (single discs bridging distance).
    pub influence: Estimate,
    /// Field mixing proxy between the enlarged boxes; None for iid marking,
    /// where the radii attach independently and contribute no field term.
    pub field_mixing: Option<CovarianceEstimate>,
    /// Point version of the bound: 4 * influence + field mixing.
    pub bound_value: f64,
    /// Conservative version from the upper interval endpoints.
    pub bound_high: f64,
}

/// Measures how correlated left-right crossings of the two test boxes are
/// at scale `n`, and the decomposition bound accounting for it.
pub fn estimate_crossing_correlation<T: Scalar>(
    model: &ModelSpec<T>,
    lambda: f64,
    n: T,
    eps0: f64,
    levels: Option<&[T]>,
    replications: u64,
    master_seed: u64,
) -> Result<CrossingCorrelation> {
    validate_scale_eps0(n, eps0)?;
    if replications < 2 {
        return param_err("covariance estimation needs at least two replications");
    }
    let (box1, box2) = proxy_boxes(n, eps0, false)?;
    let window = box1.hull(&box2);
    let outcomes = run_replications(replications, master_seed, |_, seed| {
        let sampler = model.prepare(lambda, window, seed)?;
        let occ = sampler.occupied_at(lambda)?;
        let c1 = occ.has_crossing(&box1, SetPhase::Occupied, FloodAxis::LeftRight)?;
        let c2 = occ.has_crossing(&box2, SetPhase::Occupied, FloodAxis::LeftRight)?;
        Ok((c1, c2, occ.leakage_budget() + sampler.field_budget()))
    })?;
    let as_f = |b: bool| if b { 1.0 } else { 0.0 };
    let x: Vec<f64> = outcomes.iter().map(|(c1, _, _)| as_f(*c1)).collect();
    let y: Vec<f64> = outcomes.iter().map(|(_, c2, _)| as_f(*c2)).collect();
    let budget = outcomes.iter().map(|(_, _, g)| g).sum::<f64>() / replications as f64;
    let (cov, std_error) = covariance_with_se(&x, &y);
    let crossing_covariance = CovarianceEstimate {
        value: cov.abs(),
        std_error,
        replications,
        master_seed,
        budget,
    };

    let influence = estimate_influence_proxy(model, lambda, n, eps0, replications, master_seed)?;

    let field_mixing = match &model.marking {
        MarkingSpec::Iid { .. } => None,
        MarkingSpec::Geostatistical { field } => {
            let owned_levels: Vec<T> = match levels {
                Some(l) => l.to_vec(),
                None => default_levels(&model.marginal_law().map_err(|_| {
                    crate::Error::Parameter(
                        "field marginal has no closed form; pass explicit levels".into(),
                    )
                })?),
            };
            Some(estimate_field_mixing_proxy(
                field,
                model.eps_pad,
                n,
                eps0,
                &owned_levels,
                replications,
                master_seed,
            )?)
        }
    };

    let mixing_value = field_mixing.as_ref().map_or(0.0, |m| m.value);
    let mixing_high = field_mixing.as_ref().map_or(0.0, |m| m.value + Z_95 * m.std_error);
    let bound_value = 4.0 * influence.value + mixing_value;
    let bound_high = 4.0 * influence.ci_high + mixing_high;
    Ok(CrossingCorrelation {
        crossing_covariance,
        influence,
        field_mixing,
        bound_value,
        bound_high,
    })
}

/// Quantile levels spanning the marginal law, deduplicated.
pub fn default_levels<T: Scalar>(marginal: &RadialDistribution<T>) -> Vec<T> {
    let mut levels: Vec<T> =
        [0.25, 0.5, 0.75].iter().map(|&z| marginal.quantile(z)).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).expect("finite levels"));
    levels.dedup();
    levels
}

/// One comparison quantity evaluated under both marking modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompareQuantity<T> {
    /// P(origin covered).
    PointCoverage,
    /// P(segment of this length covered).
    SegmentCoverage { length: T },
    /// P(occupied crossing of a 3n-by-n rectangle the long way).
    BoxCrossing { n: T },
}

impl<T: Scalar> CompareQuantity<T> {
    pub fn label(&self) -> &'static str {
        match self {
            CompareQuantity::PointCoverage => "point_coverage",
            CompareQuantity::SegmentCoverage { .. } => "segment_coverage",
            CompareQuantity::BoxCrossing { .. } => "box_crossing",
        }
    }

    fn estimate(
        &self,
        model: &ModelSpec<T>,
        lambda: f64,
        replications: u64,
        master_seed: u64,
    ) -> Result<Estimate> {
        match *self {
            CompareQuantity::PointCoverage => {
                estimate_point_coverage(model, lambda, replications, master_seed)
            }
            CompareQuantity::SegmentCoverage { length } => {
                estimate_segment_coverage(model, lambda, length, replications, master_seed)
            }
            CompareQuantity::BoxCrossing { n } => {
                if !(n > T::zero()) || !n.is_finite() {
                    return param_err("crossing scale n must be positive and finite");
                }
                let rect = Rect::new(T::zero(), T::zero(), n * T::of_f64(3.0), n)?;
                estimate_crossing(
                    model,
                    lambda,
                    rect,
                    SetPhase::Occupied,
                    FloodAxis::LeftRight,
                    replications,
                    master_seed,
                )
            }
        }
    }
}

/// One quantity under geostatistical and iid marking, on paired seeds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow<T> {
    pub quantity: CompareQuantity<T>,
    pub geostatistical: Estimate,
    pub iid: Estimate,
    pub ci_disjoint: bool,
}

/// Runs each quantity under both models on the same replication seeds. The
/// models must have the same pointwise radius law; the point processes then
/// coincide path by path and only the marking differs.
pub fn compare_models<T: Scalar>(
    geo: &ModelSpec<T>,
    iid: &ModelSpec<T>,
    lambda: f64,
    quantities: &[CompareQuantity<T>],
    replications: u64,
    master_seed: u64,
) -> Result<Vec<ComparisonRow<T>>> {
    let m1 = geo.marginal_law()?;
    let m2 = iid.marginal_law()?;
    if !m1.approx_eq(&m2, 1e-9) {
        return param_err(format!(
            "marginal laws differ between comparison arms: {m1:?} vs {m2:?}"
        ));
    }
    let mut rows = Vec::with_capacity(quantities.len());
    for q in quantities {
        let g = q.estimate(geo, lambda, replications, master_seed)?;
        let i = q.estimate(iid, lambda, replications, master_seed)?;
        rows.push(ComparisonRow {
            quantity: *q,
            geostatistical: g,
            iid: i,
            ci_disjoint: g.ci_disjoint_from(&i),
        });
    }
    Ok(rows)
}
