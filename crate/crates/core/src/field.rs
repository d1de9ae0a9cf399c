//! Field layout: mainfield lanes, the headland ring and the target region.
//!
//! Canonical frame: the mainfield's lower-left corner is the origin and lanes
//! run along +y. The headland centerline is a rounded rectangle offset `W/2`
//! outward from the mainfield; its corners are quarter arcs of the turning
//! radius. `lane_length` is the lane path length between the bottom and top
//! headland centerlines, so the mainfield spans `[0, N·W] × [0, H − W]`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Mirror, Point, Pose, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Entrance {
    #[default]
    SW,
    SE,
    NW,
    NE,
}

impl Entrance {
    pub const ALL: [Entrance; 4] = [Entrance::SW, Entrance::SE, Entrance::NW, Entrance::NE];

    fn flips(self) -> (bool, bool) {
        match self {
            Entrance::SW => (false, false),
            Entrance::SE => (true, false),
            Entrance::NW => (false, true),
            Entrance::NE => (true, true),
        }
    }
}

impl fmt::Display for Entrance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Entrance::SW => "SW",
            Entrance::SE => "SE",
            Entrance::NW => "NW",
            Entrance::NE => "NE",
        };
        f.write_str(s)
    }
}

/// Parameters of one rectangular field instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    #[serde(rename = "working_width_m")]
    pub working_width: f64,
    #[serde(rename = "lane_length_m")]
    pub lane_length: f64,
    pub lane_count: usize,
    #[serde(rename = "turn_radius_m")]
    pub turn_radius: f64,
    #[serde(default)]
    pub entrance: Entrance,
}

impl FieldSpec {
    pub fn new(working_width: f64, lane_length: f64, lane_count: usize, turn_radius: f64) -> Self {
        Self {
            working_width,
            lane_length,
            lane_count,
            turn_radius,
            entrance: Entrance::SW,
        }
    }

    pub fn with_entrance(mut self, entrance: Entrance) -> Self {
        self.entrance = entrance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &'static str, reason: String| Err(Error::InvalidSpec { field, reason });
        let (w, h, r, n) = (
            self.working_width,
            self.lane_length,
            self.turn_radius,
            self.lane_count,
        );
        if !(w.is_finite() && w > 0.0) {
            return invalid("working_width_m", format!("must be positive and finite, got {w}"));
        }
        if !(r.is_finite() && r > 0.0) {
            return invalid("turn_radius_m", format!("must be positive and finite, got {r}"));
        }
        if r > w / 2.0 {
            return invalid(
                "turn_radius_m",
                format!("must not exceed working_width_m / 2 ({r} > {})", w / 2.0),
            );
        }
        if !(h.is_finite() && h > 4.0 * r) {
            return invalid(
                "lane_length_m",
                format!("must exceed 4 * turn_radius_m ({h} <= {})", 4.0 * r),
            );
        }
        if h <= w {
            return invalid(
                "lane_length_m",
                format!("must exceed working_width_m so the mainfield is non-empty ({h} <= {w})"),
            );
        }
        if n < 2 {
            return invalid("lane_count", format!("must be at least 2, got {n}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingDirection {
    /// Counter-clockwise: eastward along the bottom edge.
    Ccw,
    Cw,
}

/// Closed headland centerline parameterized counter-clockwise by arc length,
/// starting at the west end of the bottom straight.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadlandRing {
    pieces: Vec<Segment>,
    cum: Vec<f64>,
    bounds: Rect,
    radius: f64,
}

impl HeadlandRing {
    pub fn new(bounds: Rect, radius: f64) -> Self {
        let (xl, xr, yb, yt, r) = (bounds.min.x, bounds.max.x, bounds.min.y, bounds.max.y, radius);
        let pieces = vec![
            Segment::line(Point::new(xl + r, yb), Point::new(xr - r, yb)),
            Segment::arc(Point::new(xr - r, yb + r), r, -FRAC_PI_2, FRAC_PI_2),
            Segment::line(Point::new(xr, yb + r), Point::new(xr, yt - r)),
            Segment::arc(Point::new(xr - r, yt - r), r, 0.0, FRAC_PI_2),
            Segment::line(Point::new(xr - r, yt), Point::new(xl + r, yt)),
            Segment::arc(Point::new(xl + r, yt - r), r, FRAC_PI_2, FRAC_PI_2),
            Segment::line(Point::new(xl, yt - r), Point::new(xl, yb + r)),
            Segment::arc(Point::new(xl + r, yb + r), r, PI, FRAC_PI_2),
        ];
        let mut cum = vec![0.0];
        for p in &pieces {
            cum.push(cum.last().unwrap() + p.length());
        }
        Self {
            pieces,
            cum,
            bounds,
            radius,
        }
    }

    pub fn pieces(&self) -> &[Segment] {
        &self.pieces
    }

    /// Bounding rectangle of the centerline (corner points of the unrounded ring).
    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn perimeter(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn wrap(&self, sigma: f64) -> f64 {
        sigma.rem_euclid(self.perimeter())
    }

    /// Counter-clockwise pose at ring parameter `sigma`.
    pub fn pose_at(&self, sigma: f64) -> Pose {
        let sigma = self.wrap(sigma);
        let k = (self.cum.partition_point(|&c| c <= sigma).max(1) - 1).min(self.pieces.len() - 1);
        self.pieces[k].pose_at(sigma - self.cum[k])
    }

    pub fn sigma_bottom(&self, x: f64) -> f64 {
        x - (self.bounds.min.x + self.radius)
    }

    pub fn sigma_right(&self, y: f64) -> f64 {
        self.cum[2] + (y - (self.bounds.min.y + self.radius))
    }

    pub fn sigma_top(&self, x: f64) -> f64 {
        self.cum[4] + (self.bounds.max.x - self.radius - x)
    }

    pub fn sigma_left(&self, y: f64) -> f64 {
        self.cum[6] + (self.bounds.max.y - self.radius - y)
    }

    /// Ring parameter of a point lying on the centerline.
    pub fn locate(&self, p: Point) -> Option<f64> {
        let (k, d) = self
            .pieces
            .iter()
            .enumerate()
            .map(|(k, seg)| (k, seg.distance_to(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        if d > 1e-6 {
            return None;
        }
        let seg = &self.pieces[k];
        let local = match *seg {
            Segment::Line { start, end } => {
                let dir = end - start;
                (p - start).dot(dir) / dir.norm()
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let delta = (p - center).angle() - start_angle;
                let delta = delta.rem_euclid(2.0 * PI);
                radius * delta.min(sweep.abs())
            }
        };
        Some(self.wrap(self.cum[k] + local.clamp(0.0, seg.length())))
    }

    /// Distance travelled along the ring from `from` to `to` in `dir`.
    pub fn route_length(&self, from: f64, to: f64, dir: RingDirection) -> f64 {
        let p = self.perimeter();
        match dir {
            RingDirection::Ccw => (to - from).rem_euclid(p),
            RingDirection::Cw => (from - to).rem_euclid(p),
        }
    }

    /// Segments along the ring from `from` to `to` in direction `dir`.
    pub fn route(&self, from: f64, to: f64, dir: RingDirection) -> Vec<Segment> {
        match dir {
            RingDirection::Ccw => {
                let from = self.wrap(from);
                self.walk_ccw(from, from + self.route_length(from, to, dir))
            }
            RingDirection::Cw => {
                let mut segs = self.route(to, from, RingDirection::Ccw);
                segs.reverse();
                segs.iter().map(Segment::reversed).collect()
            }
        }
    }

    /// One complete counter-clockwise traversal starting and ending at `from`.
    pub fn full_loop(&self, from: f64) -> Vec<Segment> {
        let from = self.wrap(from);
        self.walk_ccw(from, from + self.perimeter())
    }

    fn walk_ccw(&self, from: f64, to: f64) -> Vec<Segment> {
        let p = self.perimeter();
        let mut out = Vec::new();
        for lap in 0..3 {
            let base = lap as f64 * p;
            for (k, seg) in self.pieces.iter().enumerate() {
                let lo = (base + self.cum[k]).max(from);
                let hi = (base + self.cum[k + 1]).min(to);
                if hi - lo > 1e-12 {
                    let start = lo - base - self.cum[k];
                    out.push(seg.sub_segment(start, start + hi - lo));
                }
            }
        }
        out
    }

    /// Minimum Euclidean distance from `p` to the centerline.
    pub fn distance(&self, p: Point) -> f64 {
        self.pieces
            .iter()
            .map(|s| s.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Region to be sprayed: everything enclosed by the headland centerline plus
/// the band within `W/2` of it. Outer corners are rounded with radius `R + W/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetRegion {
    pub outer: Rect,
    pub corner_radius: f64,
    corner_centers: [(Point, f64, f64); 4],
}

impl TargetRegion {
    fn new(ring: &HeadlandRing, half_width: f64) -> Self {
        let b = ring.bounds();
        let r = ring.radius();
        let outer = Rect {
            min: Point::new(b.min.x - half_width, b.min.y - half_width),
            max: Point::new(b.max.x + half_width, b.max.y + half_width),
        };
        let corner_centers = [
            (Point::new(b.min.x + r, b.min.y + r), -1.0, -1.0),
            (Point::new(b.max.x - r, b.min.y + r), 1.0, -1.0),
            (Point::new(b.max.x - r, b.max.y - r), 1.0, 1.0),
            (Point::new(b.min.x + r, b.max.y - r), -1.0, 1.0),
        ];
        Self {
            outer,
            corner_radius: r + half_width,
            corner_centers,
        }
    }

    /// Membership test; a positive `margin` shrinks the region.
    pub fn contains(&self, p: Point, margin: f64) -> bool {
        let o = &self.outer;
        if p.x < o.min.x + margin || p.x > o.max.x - margin || p.y < o.min.y + margin || p.y > o.max.y - margin {
            return false;
        }
        for (c, sx, sy) in &self.corner_centers {
            if (p.x - c.x) * sx > 0.0 && (p.y - c.y) * sy > 0.0 {
                return p.distance(*c) <= self.corner_radius - margin;
            }
        }
        true
    }

    pub fn area(&self) -> f64 {
        self.outer.area() - self.corner_sliver_area()
    }

    /// Area of the four outer-corner slivers of the bounding rectangle left outside the region.
    pub fn corner_sliver_area(&self) -> f64 {
        (4.0 - PI) * self.corner_radius * self.corner_radius
    }

    /// Closed boundary polygon (counter-clockwise) with `per_corner` points per rounded corner.
    pub fn boundary(&self, per_corner: usize) -> Vec<Point> {
        let n = per_corner.max(2);
        let starts = [PI, 1.5 * PI, 0.0, FRAC_PI_2];
        let order = [0usize, 1, 2, 3];
        let mut pts = Vec::new();
        for (idx, start) in order.iter().zip(starts) {
            let (c, _, _) = self.corner_centers[*idx];
            for j in 0..n {
                let a = start + FRAC_PI_2 * j as f64 / (n - 1) as f64;
                pts.push(c + Point::from_polar(self.corner_radius, a));
            }
        }
        pts.push(pts[0]);
        pts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub spec: FieldSpec,
    pub mainfield: Rect,
    /// Lane centerlines between the bottom and top headland centerlines, west to east.
    pub lane_centerlines: Vec<Segment>,
    pub ring: HeadlandRing,
    pub target: TargetRegion,
    /// Reflection from the canonical (SW) plan frame to the entrance's frame.
    pub mirror: Mirror,
}

impl Layout {
    pub fn half_width(&self) -> f64 {
        self.spec.working_width / 2.0
    }

    pub fn lane_x(&self, lane: usize) -> f64 {
        (lane as f64 - 0.5) * self.spec.working_width
    }

    /// Entrance/exit pose in the canonical frame: midpoint of the west headland edge, heading south.
    pub fn canonical_entry_pose(&self) -> Pose {
        let b = self.ring.bounds();
        Pose::new(
            Point::new(b.min.x, b.min.y + self.spec.lane_length / 2.0),
            -FRAC_PI_2,
        )
    }

    /// Entrance/exit pose in the field frame.
    pub fn entry_pose(&self) -> Pose {
        let p = self.canonical_entry_pose();
        Pose::new(self.mirror.point(p.position), self.mirror.angle(p.heading))
    }

    /// Maps a canonical lane index to the field's lane index for this entrance.
    pub fn lane_index(&self, canonical: usize) -> usize {
        if self.mirror.flip_x {
            self.spec.lane_count + 1 - canonical
        } else {
            canonical
        }
    }

    pub fn target_area(&self) -> f64 {
        self.target.area()
    }
}

pub fn build_layout(spec: FieldSpec) -> Result<Layout> {
    spec.validate()?;
    let w = spec.working_width;
    let h = spec.lane_length;
    let n = spec.lane_count as f64;
    let half = w / 2.0;
    let mainfield = Rect {
        min: Point::new(0.0, 0.0),
        max: Point::new(n * w, h - w),
    };
    let ring_bounds = Rect {
        min: Point::new(-half, -half),
        max: Point::new(n * w + half, h - half),
    };
    let ring = HeadlandRing::new(ring_bounds, spec.turn_radius);
    let lane_centerlines = (1..=spec.lane_count)
        .map(|i| {
            let x = (i as f64 - 0.5) * w;
            Segment::line(Point::new(x, ring_bounds.min.y), Point::new(x, ring_bounds.max.y))
        })
        .collect();
    let target = TargetRegion::new(&ring, half);
    let (flip_x, flip_y) = spec.entrance.flips();
    let mirror = Mirror {
        flip_x,
        flip_y,
        axis_x: n * w / 2.0,
        axis_y: (h - w) / 2.0,
    };
    Ok(Layout {
        spec,
        mainfield,
        lane_centerlines,
        ring,
        target,
        mirror,
    })
}

/// Minimum distance from `p` to the headland centerline.
pub fn headland_projection_distance(p: Point, layout: &Layout) -> f64 {
    layout.ring.distance(p)
}
