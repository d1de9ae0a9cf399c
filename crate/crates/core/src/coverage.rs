//! Raster coverage oracle: sweeps the boom footprint along ON intervals and
//! counts passes per cell.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Layout;
use crate::geometry::{Point, Segment};
use crate::path::PlannedPath;
use crate::switching::SprayProgram;

/// Pass counts on a regular grid. Cell `(i, j)` has its center at
/// `origin + ((i + 0.5) * cell, (j + 0.5) * cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid {
    pub origin: Point,
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    counts: Vec<u16>,
}

impl CoverageGrid {
    /// Zeroed grid covering `[min, max]`, with the origin snapped to a multiple of `cell`.
    pub fn new(min: Point, max: Point, cell: f64) -> Self {
        let ox = (min.x / cell).floor() * cell;
        let oy = (min.y / cell).floor() * cell;
        let nx = ((max.x - ox) / cell).ceil().max(0.0) as usize;
        let ny = ((max.y - oy) / cell).ceil().max(0.0) as usize;
        Self {
            origin: Point::new(ox, oy),
            cell,
            nx,
            ny,
            counts: vec![0; nx * ny],
        }
    }

    pub fn empty(cell: f64) -> Self {
        Self::new(Point::new(0.0, 0.0), Point::new(0.0, 0.0), cell)
    }

    pub fn counts(&self) -> &[u16] {
        &self.counts
    }

    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.counts[j * self.nx + i]
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + (i as f64 + 0.5) * self.cell,
            self.origin.y + (j as f64 + 0.5) * self.cell,
        )
    }

    /// Count of the cell containing `p`; zero outside the grid.
    pub fn count_at(&self, p: Point) -> u16 {
        let i = ((p.x - self.origin.x) / self.cell).floor();
        let j = ((p.y - self.origin.y) / self.cell).floor();
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            return 0;
        }
        self.get(i as usize, j as usize)
    }

    /// Like `get`, but zero for lattice indices outside the grid.
    fn count_at_index(&self, i: i64, j: i64) -> u16 {
        if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
            return 0;
        }
        self.get(i as usize, j as usize)
    }

    pub fn cell_area(&self) -> f64 {
        self.cell * self.cell
    }
}

/// Sweeps the boom of width `width` along every ON interval of `program`.
/// A cell is counted at most once per interval.
pub fn rasterize(
    path: &PlannedPath,
    program: &SprayProgram,
    width: f64,
    cell: f64,
) -> Result<CoverageGrid> {
    if !(cell.is_finite() && cell > 0.0) || cell > width / 8.0 + 1e-12 {
        return Err(Error::CellTooCoarse {
            cell,
            max: width / 8.0,
        });
    }
    let Some((lo, hi)) = path_bounds(path) else {
        return Ok(CoverageGrid::empty(cell));
    };
    let pad = 1.5 * width;
    let mut grid = CoverageGrid::new(
        Point::new(lo.x - pad, lo.y - pad),
        Point::new(hi.x + pad, hi.y + pad),
        cell,
    );
    let mut stamps = vec![0u32; grid.counts.len()];
    for (id, iv) in program.intervals().iter().enumerate() {
        let tag = id as u32 + 1;
        for (_, piece, _) in path.pieces(iv.s_on, iv.s_off) {
            for quad in swept_quads(&piece, width / 2.0, cell) {
                fill_polygon(&mut grid, &mut stamps, tag, &quad);
            }
        }
    }
    Ok(grid)
}

fn path_bounds(path: &PlannedPath) -> Option<(Point, Point)> {
    path.segments().iter().map(Segment::bounds).reduce(|a, b| {
        (
            Point::new(a.0.x.min(b.0.x), a.0.y.min(b.0.y)),
            Point::new(a.1.x.max(b.1.x), a.1.y.max(b.1.y)),
        )
    })
}

/// Quadrilaterals between consecutive boom lines. On arcs with a short radius the
/// boom crosses the turn center and the quad becomes a bow-tie; even-odd filling
/// then yields exactly the two swept sectors.
fn swept_quads(seg: &Segment, half: f64, cell: f64) -> Vec<[Point; 4]> {
    let steps = match *seg {
        Segment::Line { .. } => 1,
        Segment::Arc { radius, sweep, .. } => {
            // Keep the outer chord sagitta below a fraction of a cell.
            let outer = radius + half;
            let max_step = 2.0 * (1.0 - (cell / 20.0) / outer).clamp(-1.0, 1.0).acos();
            (sweep.abs() / max_step.max(1e-6)).ceil().max(1.0) as usize
        }
    };
    let len = seg.length();
    let boom = |t: f64| {
        let pose = seg.pose_at(len * t);
        let n = pose.left_normal();
        (pose.position + n * half, pose.position - n * half)
    };
    let mut prev = boom(0.0);
    (1..=steps)
        .map(|k| {
            let next = boom(k as f64 / steps as f64);
            let quad = [prev.0, prev.1, next.1, next.0];
            prev = next;
            quad
        })
        .collect()
}

fn fill_polygon(grid: &mut CoverageGrid, stamps: &mut [u32], tag: u32, poly: &[Point; 4]) {
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for p in &poly[1..] {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let c = grid.cell;
    let i0 = (((lo.x - grid.origin.x) / c - 0.5).ceil().max(0.0)) as usize;
    let j0 = (((lo.y - grid.origin.y) / c - 0.5).ceil().max(0.0)) as usize;
    let i1 = (((hi.x - grid.origin.x) / c - 0.5).floor()).min(grid.nx as f64 - 1.0);
    let j1 = (((hi.y - grid.origin.y) / c - 0.5).floor()).min(grid.ny as f64 - 1.0);
    if i1 < 0.0 || j1 < 0.0 {
        return;
    }
    for j in j0..=j1 as usize {
        for i in i0..=i1 as usize {
            if point_in_polygon(grid.center(i, j), poly) {
                let idx = j * grid.nx + i;
                if stamps[idx] != tag {
                    stamps[idx] = tag;
                    grid.counts[idx] = grid.counts[idx].saturating_add(1);
                }
            }
        }
    }
}

/// Even-odd rule.
fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    #[serde(rename = "target_area_m2")]
    pub target_area: f64,
    #[serde(rename = "covered_area_m2")]
    pub covered_area: f64,
    #[serde(rename = "overlap_area_m2")]
    pub overlap_area: f64,
    #[serde(rename = "missed_area_m2")]
    pub missed_area: f64,
    #[serde(rename = "spray_outside_target_m2")]
    pub spray_outside_target: f64,
    /// Outer-corner slivers of the field rectangle that lie outside the target region.
    #[serde(rename = "corner_sliver_area_m2")]
    pub corner_sliver_area: f64,
    pub coverage_ratio: f64,
    pub overlap_ratio: f64,
    #[serde(rename = "cell_m")]
    pub cell: f64,
}

/// Compares pass counts with the layout's target region. Cells are classified by their centers.
pub fn coverage_report(grid: &CoverageGrid, layout: &Layout) -> CoverageReport {
    let target = &layout.target;
    let c = grid.cell;
    let lo = Point::new(
        target.outer.min.x.min(grid.origin.x),
        target.outer.min.y.min(grid.origin.y),
    );
    let hi = Point::new(
        target.outer.max.x.max(grid.origin.x + grid.nx as f64 * c),
        target.outer.max.y.max(grid.origin.y + grid.ny as f64 * c),
    );
    // Walk the grid lattice extended to cover the target.
    let i_lo = ((lo.x - grid.origin.x) / c).floor() as i64;
    let j_lo = ((lo.y - grid.origin.y) / c).floor() as i64;
    let i_hi = ((hi.x - grid.origin.x) / c).ceil() as i64;
    let j_hi = ((hi.y - grid.origin.y) / c).ceil() as i64;

    let (mut covered, mut missed, mut overlap, mut outside) = (0u64, 0u64, 0u64, 0u64);
    for j in j_lo..j_hi {
        for i in i_lo..i_hi {
            let count = grid.count_at_index(i, j);
            let center = Point::new(
                grid.origin.x + (i as f64 + 0.5) * c,
                grid.origin.y + (j as f64 + 0.5) * c,
            );
            let inside = target.contains(center, 0.0);
            match (inside, count) {
                (true, 0) => missed += 1,
                (true, _) => covered += 1,
                (false, 0) => {}
                (false, _) => outside += 1,
            }
            if count >= 2 {
                overlap += 1;
            }
        }
    }
    let cell_area = grid.cell_area();
    let target_area = layout.target_area();
    let covered_area = covered as f64 * cell_area;
    let overlap_area = overlap as f64 * cell_area;
    CoverageReport {
        target_area,
        covered_area,
        overlap_area,
        missed_area: missed as f64 * cell_area,
        spray_outside_target: outside as f64 * cell_area,
        corner_sliver_area: target.corner_sliver_area(),
        coverage_ratio: (covered_area / target_area).clamp(0.0, 1.0),
        overlap_ratio: (overlap_area / target_area).clamp(0.0, 1.0),
        cell: c,
    }
}

/// Binary PGM, north up: 0 passes black, 1 pass mid gray, 2+ white.
pub fn write_pgm<W: Write>(grid: &CoverageGrid, mut out: W) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", grid.nx, grid.ny)?;
    let mut row = vec![0u8; grid.nx];
    for j in (0..grid.ny).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            *px = match grid.get(i, j) {
                0 => 0,
                1 => 128,
                _ => 255,
            };
        }
        out.write_all(&row)?;
    }
    Ok(())
}
