//! Crossing curves, finite-size phase classification, and critical
//! intensity brackets.
//!
//! The certificate behind everything here: at scale `n`, crossing the hard
//! box (3n wide, n tall, left to right) with probability above `1 - 1/200`
//! certifies the supercritical phase, and crossing the easy box (n wide, 3n
//! tall, left to right) with probability below `1/200` certifies the
//! subcritical phase. Bisecting between a subcritical and a supercritical
//! intensity brackets the finite-size pseudo-critical point, a proxy for
//! the true critical intensity; results report the scale used, and callers
//! should check stability under doubling `n` before trusting a bracket.

use serde::{Deserialize, Serialize};

use crate::boolean::SetPhase;
use crate::error::{contract_err, param_err, Result};
use crate::estimators::{
    default_levels, estimate_crossing, estimate_field_mixing_proxy, estimate_influence_proxy,
    CovarianceEstimate, Estimate, Z_95,
};
use crate::fields::RadialDistribution;
use crate::geom::Rect;
use crate::model::{MarkingSpec, ModelSpec};
use crate::raster::FloodAxis;
use crate::sampling::replication_seed;
use crate::scalar::Scalar;

/// Margin of the finite-size certificate; crossing probabilities within
/// `(CROSSING_MARGIN, 1 - CROSSING_MARGIN)` classify neither phase.
pub const CROSSING_MARGIN: f64 = 1.0 / 200.0;

/// Pilot-calibrated pseudo-critical anchor for radius-1 discs, used only to
/// seed automatic brackets (never asserted as truth).
const UNIT_DISC_THRESHOLD: f64 = 0.36;

/// The hard-direction box at scale `n`: 3n wide, n tall, crossed
/// left-right.
fn hard_box<T: Scalar>(n: T) -> Result<Rect<T>> {
    Rect::new(T::zero(), T::zero(), n * T::of_f64(3.0), n)
}

/// The easy-direction box at scale `n`: n wide, 3n tall, crossed
/// left-right.
fn easy_box<T: Scalar>(n: T) -> Result<Rect<T>> {
    Rect::new(T::zero(), T::zero(), n, n * T::of_f64(3.0))
}

fn validate_scale<T: Scalar>(n: T) -> Result<()> {
    if !(n > T::zero()) || !n.is_finite() {
        return param_err("scale n must be positive and finite");
    }
    Ok(())
}

/// Hard-crossing probability estimates over an intensity grid, all grid
/// points evaluated on the same coupled realizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingCurve<T> {
    pub scale: T,
    pub lambda_grid: Vec<f64>,
    /// P(hard crossing) per grid intensity; exactly nondecreasing, because
    /// each replication is evaluated along its own coupled path.
    pub estimates: Vec<Estimate>,
}

/// Estimates P(hard crossing at scale `n`) at every grid intensity, reusing
/// one realization path per replication: the point process is sampled once
/// at the top intensity and thinned downward, so the crossing indicator is
/// nondecreasing along the grid within every replication.
pub fn crossing_curve<T: Scalar>(
    model: &ModelSpec<T>,
    n: T,
    lambda_grid: &[f64],
    replications: u64,
    master_seed: u64,
) -> Result<CrossingCurve<T>> {
    validate_scale(n)?;
    if lambda_grid.is_empty() {
        return param_err("lambda grid must be nonempty");
    }
    if lambda_grid.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return param_err("lambda grid entries must be finite and nonnegative");
    }
    if lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
        return param_err("lambda grid must be strictly increasing");
    }
    let lambda_max = *lambda_grid.last().expect("nonempty grid");
    let rect = hard_box(n)?;
    // Leakage at any grid intensity is bounded by the top one's budget.
    let (_, worst_leak) = model.pad_for(lambda_max, &rect)?;
    let outcomes =
        crate::estimators::run_replications(replications, master_seed, |_, seed| {
            let sampler = model.prepare(lambda_max, rect, seed)?;
            let mut hits = vec![false; lambda_grid.len()];
            for (j, &lambda) in lambda_grid.iter().enumerate() {
                let occ = sampler.occupied_at(lambda)?;
                if occ.has_crossing(&rect, SetPhase::Occupied, FloodAxis::LeftRight)? {
                    // Larger intensities keep strictly more discs.
                    for h in hits.iter_mut().skip(j) {
                        *h = true;
                    }
                    break;
                }
            }
            Ok((hits, worst_leak + sampler.field_budget()))
        })?;
    let budget = outcomes.iter().map(|(_, b)| b).sum::<f64>() / replications as f64;
    let estimates = (0..lambda_grid.len())
        .map(|j| {
            let successes = outcomes.iter().filter(|(hits, _)| hits[j]).count() as u64;
            Estimate::from_binomial(successes, replications, master_seed, budget)
        })
        .collect();
    Ok(CrossingCurve { scale: n, lambda_grid: lambda_grid.to_vec(), estimates })
}

/// Phase classification at one intensity and scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Supercritical,
    Subcritical,
    Undetermined,
}

/// One classified intensity: the crossing estimates made there and the
/// verdict they support. Bisection frontiers estimate only the box their
/// certificate needs, so a point may carry one side; a missing side never
/// certifies its phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub lambda: f64,
    /// P(crossing the hard box: 3n wide, n tall, left-right).
    pub hard: Option<Estimate>,
    /// P(crossing the easy box: n wide, 3n tall, left-right).
    pub easy: Option<Estimate>,
    pub phase: Phase,
}

/// Applies the finite-size certificate to the available crossing estimates.
/// Certifying either phase needs the whole confidence interval beyond the
/// margin, which a Wilson interval cannot do with fewer than 765
/// replications even at 0 or 100% observed successes.
pub fn classify_estimates(hard: Option<&Estimate>, easy: Option<&Estimate>) -> Phase {
    if hard.is_some_and(|h| h.ci_low > 1.0 - CROSSING_MARGIN) {
        Phase::Supercritical
    } else if easy.is_some_and(|e| e.ci_high < CROSSING_MARGIN) {
        Phase::Subcritical
    } else {
        Phase::Undetermined
    }
}

/// Which certificate a one-sided classification targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Sub,
    Super,
}

fn estimate_side<T: Scalar>(
    model: &ModelSpec<T>,
    lambda: f64,
    n: T,
    side: Side,
    replications: u64,
    seed: u64,
) -> Result<Estimate> {
    let rect = match side {
        Side::Sub => easy_box(n)?,
        Side::Super => hard_box(n)?,
    };
    estimate_crossing(
        model,
        lambda,
        rect,
        SetPhase::Occupied,
        FloodAxis::LeftRight,
        replications,
        seed,
    )
}

/// Estimates both crossing probabilities at `lambda` and classifies the
/// phase at scale `n`.
pub fn finite_size_classify<T: Scalar>(
    model: &ModelSpec<T>,
    lambda: f64,
    n: T,
    replications: u64,
    master_seed: u64,
) -> Result<PhasePoint> {
    validate_scale(n)?;
    let hard = estimate_side(
        model,
        lambda,
        n,
        Side::Super,
        replications,
        replication_seed(master_seed, 0),
    )?;
    let easy = estimate_side(
        model,
        lambda,
        n,
        Side::Sub,
        replications,
        replication_seed(master_seed, 1),
    )?;
    Ok(PhasePoint {
        lambda,
        hard: Some(hard),
        easy: Some(easy),
        phase: classify_estimates(Some(&hard), Some(&easy)),
    })
}

/// Why a bisection stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The bracket shrank below the requested tolerance.
    BracketWidth,
    /// Both frontiers converged but the interior between them stayed
    /// undetermined at the maximum replication budget; the bracket width
    /// reflects the certificate gap at this scale, not the tolerance.
    UndeterminedMidpoint,
}

/// A bracket around the finite-size pseudo-critical intensity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult<T> {
    /// Largest intensity classified subcritical.
    pub lambda_low: f64,
    /// Smallest intensity classified supercritical.
    pub lambda_high: f64,
    pub scale: T,
    pub stop: StopReason,
    /// Every intensity classified along the way, in evaluation order.
    pub points: Vec<PhasePoint>,
}

impl<T: Scalar> ThresholdResult<T> {
    /// The hard-crossing curve assembled from the intensities that carry a
    /// hard estimate (independent seeds per point, so monotone within CI
    /// slack only).
    pub fn curve(&self) -> CrossingCurve<T> {
        let mut points: Vec<(f64, Estimate)> = self
            .points
            .iter()
            .filter_map(|p| p.hard.map(|h| (p.lambda, h)))
            .collect();
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite lambda"));
        points.dedup_by_key(|p| p.0);
        CrossingCurve {
            scale: self.scale,
            lambda_grid: points.iter().map(|p| p.0).collect(),
            estimates: points.iter().map(|p| p.1).collect(),
        }
    }

    /// Whether two brackets overlap.
    pub fn overlaps(&self, other: &ThresholdResult<T>) -> bool {
        self.lambda_low <= other.lambda_high && other.lambda_low <= self.lambda_high
    }
}

/// Whether more replications could still certify `side` at this point:
/// true while the relevant interval straddles its certificate margin, so
/// the point estimate may lie beyond the margin and a tighter interval
/// could clear it.
fn margin_in_reach(point: &PhasePoint, side: Side) -> bool {
    match side {
        Side::Sub => point.easy.is_some_and(|e| e.ci_low < CROSSING_MARGIN),
        Side::Super => point.hard.is_some_and(|h| h.ci_high > 1.0 - CROSSING_MARGIN),
    }
}

/// Estimates the box that certifies `side` at one intensity, doubling the
/// replication budget up to twice while the verdict stays short of the
/// certificate but within noise of its margin. Deep inside the undetermined
/// window no budget helps, so escalation stops as soon as the interval sits
/// clear of the margin. An `existing` point from the other frontier is
/// upgraded in place with this side's estimate.
fn classify_escalating<T: Scalar>(
    model: &ModelSpec<T>,
    existing: Option<PhasePoint>,
    lambda: f64,
    n: T,
    side: Side,
    replications: u64,
    master_seed: u64,
    step: &mut u64,
) -> Result<PhasePoint> {
    let mut point = existing.unwrap_or(PhasePoint {
        lambda,
        hard: None,
        easy: None,
        phase: Phase::Undetermined,
    });
    for escalation in 0..3u32 {
        let seed = replication_seed(master_seed, *step);
        *step += 1;
        let estimate = estimate_side(model, lambda, n, side, replications << escalation, seed)?;
        match side {
            Side::Sub => point.easy = Some(estimate),
            Side::Super => point.hard = Some(estimate),
        }
        point.phase = classify_estimates(point.hard.as_ref(), point.easy.as_ref());
        let certified = match side {
            Side::Sub => point.phase == Phase::Subcritical,
            Side::Super => point.phase == Phase::Supercritical,
        };
        if certified || !margin_in_reach(&point, side) {
            break;
        }
    }
    Ok(point)
}

/// Brackets the pseudo-critical intensity at scale `n` by bisecting two
/// frontiers: the largest intensity the certificate calls subcritical and
/// the smallest it calls supercritical.
///
/// The bracket endpoints must classify subcritical and supercritical
/// respectively. Each frontier bisects until its own interval is narrower
/// than `tolerance`, treating an undetermined verdict as "not certified",
/// so the search never stalls on the undetermined window between the two
/// certificates; the reported bracket converges to that window instead.
/// When the final bracket is still wider than the tolerance the stop reason
/// records that the interior stayed undetermined at the maximum budget.
pub fn estimate_lambda_c<T: Scalar>(
    model: &ModelSpec<T>,
    n: T,
    bracket: (f64, f64),
    tolerance: f64,
    replications: u64,
    master_seed: u64,
) -> Result<ThresholdResult<T>> {
    validate_scale(n)?;
    let (lo, hi) = bracket;
    if !(lo >= 0.0 && lo < hi) || !hi.is_finite() {
        return param_err(format!("bracket must satisfy 0 <= low < high, got ({lo}, {hi})"));
    }
    if !(tolerance > 0.0) || !tolerance.is_finite() {
        return param_err(format!("tolerance must be positive and finite, got {tolerance}"));
    }
    let mut step = 0u64;
    let mut points: Vec<PhasePoint> = Vec::new();
    // Bisection midpoints are exact f64 expressions, so the shared first
    // midpoint memoizes by equality. A point revisited by the other
    // frontier is settled if it already certifies either phase (the phases
    // exclude each other) or already carries this side's estimate;
    // otherwise it gains this side's estimate in place.
    let classify_for =
        |side: Side, lambda: f64, points: &mut Vec<PhasePoint>, step: &mut u64| {
            if let Some(index) = points.iter().position(|p| p.lambda == lambda) {
                let seen = points[index];
                let settled = seen.phase != Phase::Undetermined
                    || match side {
                        Side::Sub => seen.easy.is_some(),
                        Side::Super => seen.hard.is_some(),
                    };
                if settled {
                    return Ok(seen.phase);
                }
                let upgraded = classify_escalating(
                    model,
                    Some(seen),
                    lambda,
                    n,
                    side,
                    replications,
                    master_seed,
                    step,
                )?;
                points[index] = upgraded;
                return Ok(upgraded.phase);
            }
            let point =
                classify_escalating(model, None, lambda, n, side, replications, master_seed, step)?;
            points.push(point);
            Ok(point.phase)
        };

    let low_phase = classify_for(Side::Sub, lo, &mut points, &mut step)?;
    if low_phase != Phase::Subcritical {
        let e = points[0].easy.expect("sub check estimates the easy box");
        return param_err(format!(
            "bracket low end {} did not classify subcritical: easy crossing {:.4} \
             (CI [{:.4}, {:.4}]) not below {}",
            lo, e.value, e.ci_low, e.ci_high, CROSSING_MARGIN
        ));
    }
    let high_phase = classify_for(Side::Super, hi, &mut points, &mut step)?;
    if high_phase != Phase::Supercritical {
        let h = points[1].hard.expect("super check estimates the hard box");
        return param_err(format!(
            "bracket high end {} did not classify supercritical: hard crossing {:.4} \
             (CI [{:.4}, {:.4}]) not above {}",
            hi, h.value, h.ci_low, h.ci_high,
            1.0 - CROSSING_MARGIN
        ));
    }

    // Subcritical frontier: invariant sub_lo certified, sub_hi not.
    let (mut sub_lo, mut sub_hi) = (lo, hi);
    while sub_hi - sub_lo > tolerance {
        let mid = 0.5 * (sub_lo + sub_hi);
        match classify_for(Side::Sub, mid, &mut points, &mut step)? {
            Phase::Subcritical => sub_lo = mid,
            _ => sub_hi = mid,
        }
    }
    // Supercritical frontier: invariant sup_hi certified, sup_lo not.
    let (mut sup_lo, mut sup_hi) = (lo, hi);
    while sup_hi - sup_lo > tolerance {
        let mid = 0.5 * (sup_lo + sup_hi);
        match classify_for(Side::Super, mid, &mut points, &mut step)? {
            Phase::Supercritical => sup_hi = mid,
            _ => sup_lo = mid,
        }
    }
    if sub_lo > sup_hi {
        return contract_err(format!(
            "certificates crossed: subcritical at {sub_lo} above supercritical at {sup_hi}; \
             replication budget {replications} too small for this scale"
        ));
    }
    let stop = if sup_hi - sub_lo <= tolerance {
        StopReason::BracketWidth
    } else {
        StopReason::UndeterminedMidpoint
    };
    Ok(ThresholdResult { lambda_low: sub_lo, lambda_high: sup_hi, scale: n, stop, points })
}

/// Empirical check of the renormalization inequality
/// `q(3n) <= 49 q(n)^2 + rho(9n)` at one intensity, where `q(m)` is the
/// probability of NOT crossing the hard box at scale `m` and the dependence
/// term is replaced by its decomposition surrogate
/// `4 * influence(9n) + field_mixing(9n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport<T> {
    pub lambda: f64,
    pub scale: T,
    /// P(hard crossing) at scale n.
    pub hard_n: Estimate,
    /// P(hard crossing) at scale 3n.
    pub hard_3n: Estimate,
    /// q(n) = 1 - hard_n.
    pub q_n: f64,
    /// q(3n) = 1 - hard_3n.
    pub q_3n: f64,
    pub influence_9n: Estimate,
    pub field_mixing_9n: Option<CovarianceEstimate>,
    /// 49 q(n)^2 + 4 influence + field mixing.
    pub rhs: f64,
    /// Three standard errors of the comparison, delta-method propagated.
    pub slack: f64,
    /// Whether q(3n) <= rhs + slack. Since the field mixing surrogate is a
    /// finite-family LOWER bound on the true mixing coefficient, `false`
    /// means inconclusive, never a counterexample.
    pub holds_within_slack: bool,
}

fn interval_se(e: &Estimate) -> f64 {
    (e.ci_high - e.ci_low) / (2.0 * Z_95)
}

/// Runs the contraction check at intensity `lambda` and scale `n`.
pub fn check_contraction<T: Scalar>(
    model: &ModelSpec<T>,
    lambda: f64,
    n: T,
    eps0: f64,
    replications: u64,
    master_seed: u64,
) -> Result<ContractionReport<T>> {
    validate_scale(n)?;
    let three_n = n * T::of_f64(3.0);
    let nine_n = n * T::of_f64(9.0);
    let hard_n = estimate_crossing(
        model,
        lambda,
        hard_box(n)?,
        SetPhase::Occupied,
        FloodAxis::LeftRight,
        replications,
        replication_seed(master_seed, 0),
    )?;
    let hard_3n = estimate_crossing(
        model,
        lambda,
        hard_box(three_n)?,
        SetPhase::Occupied,
        FloodAxis::LeftRight,
        replications,
        replication_seed(master_seed, 1),
    )?;
    let influence_9n = estimate_influence_proxy(
        model,
        lambda,
        nine_n,
        eps0,
        replications,
        replication_seed(master_seed, 2),
    )?;
    let field_mixing_9n = match &model.marking {
        MarkingSpec::Iid { .. } => None,
        MarkingSpec::Geostatistical { field } => {
            let levels = default_levels(&model.marginal_law()?);
            Some(estimate_field_mixing_proxy(
                field,
                model.eps_pad,
                nine_n,
                eps0,
                &levels,
                replications,
                replication_seed(master_seed, 3),
            )?)
        }
    };
    let q_n = 1.0 - hard_n.value;
    let q_3n = 1.0 - hard_3n.value;
    let mixing = field_mixing_9n.as_ref().map_or(0.0, |m| m.value);
    let mixing_se = field_mixing_9n.as_ref().map_or(0.0, |m| m.std_error);
    let rhs = 49.0 * q_n * q_n + 4.0 * influence_9n.value + mixing;
    let var = interval_se(&hard_3n).powi(2)
        + (98.0 * q_n * interval_se(&hard_n)).powi(2)
        + (4.0 * interval_se(&influence_9n)).powi(2)
        + mixing_se.powi(2);
    let slack = 3.0 * var.sqrt();
    Ok(ContractionReport {
        lambda,
        scale: n,
        hard_n,
        hard_3n,
        q_n,
        q_3n,
        influence_9n,
        field_mixing_9n,
        rhs,
        slack,
        holds_within_slack: q_3n <= rhs + slack,
    })
}

/// Which side of the iid threshold a geostatistical bracket landed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketOrder {
    GeostatisticalBelow,
    GeostatisticalAbove,
}

/// One cell of the threshold scan: brackets for the cell-field model and
/// the marginal-matched iid model, plus their ordering when separated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow<T> {
    pub cell_intensity: f64,
    pub p_high: f64,
    pub geostatistical: ThresholdResult<T>,
    pub iid: ThresholdResult<T>,
    /// Set only when the two brackets are disjoint.
    pub ordering: Option<BracketOrder>,
}

/// Interval that usually straddles the pseudo-critical intensity of a
/// model whose marginal radius has the given second moment; the scaling
/// `lambda r^2 = const` makes the unit-disc anchor transferable.
fn heuristic_start(second_moment: f64) -> (f64, f64) {
    let center = UNIT_DISC_THRESHOLD / second_moment;
    (0.5 * center, 1.5 * center)
}

/// How many times each bracket end may halve or double while hunting for
/// certified endpoints.
const EXPAND_ROUNDS: u32 = 4;

/// Expands a starting interval geometrically, halving the low end until it
/// certifies subcritical and doubling the high end until it certifies
/// supercritical, so bisection can start from a valid bracket without
/// paying for a worst-case conservative one.
fn expand_bracket<T: Scalar>(
    model: &ModelSpec<T>,
    n: T,
    start: (f64, f64),
    replications: u64,
    master_seed: u64,
) -> Result<(f64, f64)> {
    let mut step = 0u64;
    let (mut lo, mut hi) = start;
    let mut certified = false;
    for _ in 0..=EXPAND_ROUNDS {
        let point =
            classify_escalating(model, None, lo, n, Side::Sub, replications, master_seed, &mut step)?;
        if point.phase == Phase::Subcritical {
            certified = true;
            break;
        }
        lo *= 0.5;
    }
    if !certified {
        return contract_err(format!(
            "no certified subcritical intensity found down to {} at scale {}",
            lo * 2.0,
            n.as_f64()
        ));
    }
    certified = false;
    for _ in 0..=EXPAND_ROUNDS {
        let point = classify_escalating(
            model, None, hi, n, Side::Super, replications, master_seed, &mut step,
        )?;
        if point.phase == Phase::Supercritical {
            certified = true;
            break;
        }
        hi *= 2.0;
    }
    if !certified {
        return contract_err(format!(
            "no certified supercritical intensity found up to {} at scale {}",
            hi * 0.5,
            n.as_f64()
        ));
    }
    Ok((lo, hi))
}

/// Scans cell intensities and high-value probabilities of the mosaic field
/// with values in `{low, high}`, bracketing the pseudo-critical intensity
/// of the geostatistical model and of the iid model with the same marginal.
///
/// Each arm's bisection bracket is found by geometric expansion around the
/// second-moment scaling heuristic, so scan cost tracks the actual
/// transition region instead of the conservative bounds from the all-low
/// and all-high constant models.
#[allow(clippy::too_many_arguments)]
pub fn voronoi_threshold_scan<T: Scalar>(
    mu_grid: &[f64],
    p_grid: &[f64],
    low: T,
    high: T,
    n: T,
    tolerance: f64,
    replications: u64,
    master_seed: u64,
) -> Result<Vec<ScanRow<T>>> {
    validate_scale(n)?;
    if mu_grid.is_empty() || p_grid.is_empty() {
        return param_err("scan grids must be nonempty");
    }
    if !(high > low) || !(low > T::zero()) {
        return param_err("scan requires 0 < low < high");
    }
    if !(high < n * T::of_f64(0.05)) {
        return param_err(
            "scale n must exceed 20x the largest radius so the finite-size certificate \
             is meaningful",
        );
    }
    let mut rows = Vec::with_capacity(mu_grid.len() * p_grid.len());
    // The iid arm depends on p only, so scanning a mu grid reuses it.
    let mut iid_memo: std::collections::HashMap<u64, ThresholdResult<T>> =
        std::collections::HashMap::new();
    let mut cell = 0u64;
    for &mu in mu_grid {
        for &p in p_grid {
            let geo = ModelSpec::geostatistical(crate::model::FieldSpec::Voronoi {
                params: crate::fields::VoronoiParams { intensity: mu, p_high: p, low, high },
            });
            geo.validate()?;
            let marginal = RadialDistribution::two_point(low, high, p)?;
            let m2 = marginal.second_moment().expect("two-point law has a finite second moment");
            let start = heuristic_start(m2);
            let iid = ModelSpec::iid(marginal);
            let seed = replication_seed(master_seed, cell);
            cell += 1;
            let geo_bracket =
                expand_bracket(&geo, n, start, replications, replication_seed(seed, 2))?;
            let geo_result = estimate_lambda_c(
                &geo,
                n,
                geo_bracket,
                tolerance,
                replications,
                replication_seed(seed, 0),
            )?;
            let iid_result = match iid_memo.get(&p.to_bits()) {
                Some(done) => done.clone(),
                None => {
                    let iid_bracket =
                        expand_bracket(&iid, n, start, replications, replication_seed(seed, 3))?;
                    let result = estimate_lambda_c(
                        &iid,
                        n,
                        iid_bracket,
                        tolerance,
                        replications,
                        replication_seed(seed, 1),
                    )?;
                    iid_memo.insert(p.to_bits(), result.clone());
                    result
                }
            };
            let ordering = if geo_result.lambda_high < iid_result.lambda_low {
                Some(BracketOrder::GeostatisticalBelow)
            } else if geo_result.lambda_low > iid_result.lambda_high {
                Some(BracketOrder::GeostatisticalAbove)
            } else {
                None
            };
            rows.push(ScanRow {
                cell_intensity: mu,
                p_high: p,
                geostatistical: geo_result,
                iid: iid_result,
                ordering,
            });
        }
    }
    Ok(rows)
}
