//! Grid crossing oracle for occupied-set queries.
//!
//! Rasterizes the discs twice per resolution: a core raster marks cells
//! whose center lies at least one resolution inside some disc, a hull
//! raster marks cells within one resolution of being covered. A core flood
//! crossing certifies a continuum occupied crossing (adjacent core centers
//! are one cell apart, and the margin covers the connecting segment); a
//! hull-complement flood across the perpendicular direction certifies a
//! continuum vacant blocker. Occupied paths use 4-connectivity and vacant
//! paths 8-connectivity, mirroring the continuum duality. When neither
//! certificate exists the oracle retries at half the resolution and
//! otherwise answers `Uncertain` instead of guessing.

use super::SetPhase;
use crate::error::{param_err, Result};
use crate::geom::{Disc, Rect};
use crate::raster::{raster_shape, Connectivity, FloodAxis, Raster};
use crate::scalar::Scalar;
use crate::CrossingAnswer;

struct DiscRaster {
    core: Raster,
    hull: Raster,
}

fn rasterize<T: Scalar>(discs: &[Disc<T>], rect: &Rect<T>, resolution: f64) -> DiscRaster {
    let (nx, ny) = raster_shape(rect.width().as_f64(), rect.height().as_f64(), resolution);
    let cw = rect.width().as_f64() / nx as f64;
    let ch = rect.height().as_f64() / ny as f64;
    let x0 = rect.x_min.as_f64();
    let y0 = rect.y_min.as_f64();
    let mut core = Raster::new(nx, ny);
    let mut hull = Raster::new(nx, ny);
    for d in discs {
        let cx = d.center.x.as_f64();
        let cy = d.center.y.as_f64();
        let r = d.radius.as_f64();
        let reach = r + resolution;
        let ix_lo = (((cx - reach - x0) / cw - 0.5).floor().max(0.0)) as usize;
        let ix_hi = ((((cx + reach - x0) / cw - 0.5).ceil()).max(0.0) as usize).min(nx.saturating_sub(1));
        let iy_lo = (((cy - reach - y0) / ch - 0.5).floor().max(0.0)) as usize;
        let iy_hi = ((((cy + reach - y0) / ch - 0.5).ceil()).max(0.0) as usize).min(ny.saturating_sub(1));
        if ix_lo > ix_hi || iy_lo > iy_hi {
            continue;
        }
        for iy in iy_lo..=iy_hi {
            let py = y0 + (iy as f64 + 0.5) * ch;
            for ix in ix_lo..=ix_hi {
                let px = x0 + (ix as f64 + 0.5) * cw;
                let dist = ((px - cx).powi(2) + (py - cy).powi(2)).sqrt();
                if dist <= r - resolution {
                    core.mark(ix, iy);
                }
                if dist <= r + resolution {
                    hull.mark(ix, iy);
                }
            }
        }
    }
    DiscRaster { core, hull }
}

fn decide(dr: &DiscRaster, phase: SetPhase, axis: FloodAxis) -> CrossingAnswer {
    let occupied_crosses = dr.core.flood(axis_for(phase, axis), Connectivity::Four).0;
    let vacant_crosses = dr
        .hull
        .complement()
        .flood(axis_for(phase, axis).perpendicular(), Connectivity::Eight)
        .0;
    match phase {
        SetPhase::Occupied => {
            if occupied_crosses {
                CrossingAnswer::Yes
            } else if vacant_crosses {
                CrossingAnswer::No
            } else {
                CrossingAnswer::Uncertain
            }
        }
        SetPhase::Vacant => {
            // The vacant query floods its own axis; its blocker is an
            // occupied crossing the perpendicular way.
            if vacant_crosses {
                CrossingAnswer::Yes
            } else if occupied_crosses {
                CrossingAnswer::No
            } else {
                CrossingAnswer::Uncertain
            }
        }
    }
}

/// The axis the occupied phase floods: a vacant query along `axis` is
/// blocked exactly by an occupied crossing of the perpendicular axis.
fn axis_for(phase: SetPhase, axis: FloodAxis) -> FloodAxis {
    match phase {
        SetPhase::Occupied => axis,
        SetPhase::Vacant => axis.perpendicular(),
    }
}

pub(crate) fn grid_crossing<T: Scalar>(
    discs: &[Disc<T>],
    rect: &Rect<T>,
    phase: SetPhase,
    axis: FloodAxis,
    resolution: f64,
) -> Result<CrossingAnswer> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return param_err(format!("grid resolution must be positive, got {resolution}"));
    }
    let coarse = decide(&rasterize(discs, rect, resolution), phase, axis);
    if coarse != CrossingAnswer::Uncertain {
        return Ok(coarse);
    }
    Ok(decide(&rasterize(discs, rect, resolution / 2.0), phase, axis))
}
