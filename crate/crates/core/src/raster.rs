//! Shared raster flood-fill used by the grid oracles.
//!
//! A raster samples a predicate at cell centers of a rectangle and reports
//! side-to-side connectivity of marked cells. Oracles built on it answer
//! `Uncertain` when halving the resolution flips the answer, so a definite
//! answer is one that is stable under refinement.

use serde::{Deserialize, Serialize};

/// Answer of a discretized crossing test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingAnswer {
    Yes,
    No,
    Uncertain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloodAxis {
    /// Left column to right column.
    LeftRight,
    /// Bottom row to top row.
    BottomTop,
}

impl FloodAxis {
    pub fn perpendicular(self) -> FloodAxis {
        match self {
            FloodAxis::LeftRight => FloodAxis::BottomTop,
            FloodAxis::BottomTop => FloodAxis::LeftRight,
        }
    }
}

pub(crate) struct Raster {
    pub nx: usize,
    pub ny: usize,
    pub marked: Vec<bool>,
}

impl Raster {
    pub fn new(nx: usize, ny: usize) -> Raster {
        Raster { nx, ny, marked: vec![false; nx * ny] }
    }

    pub fn mark(&mut self, ix: usize, iy: usize) {
        let i = self.idx(ix, iy);
        self.marked[i] = true;
    }

    pub fn complement(&self) -> Raster {
        Raster {
            nx: self.nx,
            ny: self.ny,
            marked: self.marked.iter().map(|&m| !m).collect(),
        }
    }

    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// BFS over marked cells from one side; returns (connected, reached).
    pub fn flood(&self, axis: FloodAxis, conn: Connectivity) -> (bool, Vec<bool>) {
        let mut reached = vec![false; self.nx * self.ny];
        let mut queue = std::collections::VecDeque::new();
        match axis {
            FloodAxis::LeftRight => {
                for iy in 0..self.ny {
                    let i = self.idx(0, iy);
                    if self.marked[i] {
                        reached[i] = true;
                        queue.push_back((0usize, iy));
                    }
                }
            }
            FloodAxis::BottomTop => {
                for ix in 0..self.nx {
                    let i = self.idx(ix, 0);
                    if self.marked[i] {
                        reached[i] = true;
                        queue.push_back((ix, 0usize));
                    }
                }
            }
        }
        let mut hit = false;
        while let Some((ix, iy)) = queue.pop_front() {
            match axis {
                FloodAxis::LeftRight if ix == self.nx - 1 => hit = true,
                FloodAxis::BottomTop if iy == self.ny - 1 => hit = true,
                _ => {}
            }
            let neighbors: &[(i64, i64)] = match conn {
                Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
                Connectivity::Eight => {
                    &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
                }
            };
            for (dx, dy) in neighbors {
                let jx = ix as i64 + dx;
                let jy = iy as i64 + dy;
                if jx < 0 || jy < 0 || jx >= self.nx as i64 || jy >= self.ny as i64 {
                    continue;
                }
                let j = self.idx(jx as usize, jy as usize);
                if self.marked[j] && !reached[j] {
                    reached[j] = true;
                    queue.push_back((jx as usize, jy as usize));
                }
            }
        }
        (hit, reached)
    }
}

/// Cell layout for rasterizing a rectangle at a target cell size: the number
/// of cells per axis, each of width close to `resolution` (exact division so
/// halving the resolution exactly doubles the counts).
pub(crate) fn raster_shape(width: f64, height: f64, resolution: f64) -> (usize, usize) {
    let nx = (width / resolution).ceil().max(1.0) as usize;
    let ny = (height / resolution).ceil().max(1.0) as usize;
    (nx, ny)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raster(nx: usize, ny: usize, rows: &[&str]) -> Raster {
        // rows given top-to-bottom for readability; stored bottom-up.
        let mut marked = vec![false; nx * ny];
        for (r, row) in rows.iter().enumerate() {
            let iy = ny - 1 - r;
            for (ix, ch) in row.chars().enumerate() {
                marked[iy * nx + ix] = ch == '#';
            }
        }
        Raster { nx, ny, marked }
    }

    #[test]
    fn straight_band_crosses() {
        let r = raster(4, 3, &["....", "####", "...."]);
        assert!(r.flood(FloodAxis::LeftRight, Connectivity::Four).0);
        assert!(!r.flood(FloodAxis::BottomTop, Connectivity::Four).0);
    }

    #[test]
    fn diagonal_needs_eight_connectivity() {
        let r = raster(3, 3, &["..#", ".#.", "#.."]);
        assert!(!r.flood(FloodAxis::LeftRight, Connectivity::Four).0);
        assert!(r.flood(FloodAxis::LeftRight, Connectivity::Eight).0);
        assert!(r.flood(FloodAxis::BottomTop, Connectivity::Eight).0);
    }

    #[test]
    fn reached_mask_is_the_component() {
        let r = raster(4, 2, &["##.#", "...."]);
        let (hit, reached) = r.flood(FloodAxis::LeftRight, Connectivity::Four);
        assert!(!hit);
        assert_eq!(reached.iter().filter(|&&b| b).count(), 2);
    }
}
