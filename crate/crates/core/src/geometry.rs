//! Planar primitives: points, poses and tangent-continuous line/arc segments.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// Position tolerance used for joint continuity checks (meters).
pub const POSITION_TOL: f64 = 1e-6;
/// Heading tolerance used for joint continuity checks (radians).
pub const HEADING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Wraps an angle into (-π, π].
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Smallest absolute difference between two headings.
pub fn heading_difference(a: f64, b: f64) -> f64 {
    normalize_angle(a - b).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point,
    /// Heading in (-π, π].
    pub heading: f64,
}

impl Pose {
    pub fn new(position: Point, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
        }
    }

    pub fn direction(&self) -> Point {
        Point::from_polar(1.0, self.heading)
    }

    /// Unit normal pointing to the left of the heading.
    pub fn left_normal(&self) -> Point {
        Point::from_polar(1.0, self.heading + FRAC_PI_2)
    }

    pub fn approx_eq(&self, other: &Pose) -> bool {
        self.position.distance(other.position) <= POSITION_TOL
            && heading_difference(self.heading, other.heading) <= HEADING_TOL
    }
}

/// A path primitive. Arcs sweep counter-clockwise for positive `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Segment {
    Line {
        start: Point,
        end: Point,
    },
    Arc {
        center: Point,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl Segment {
    pub fn line(start: Point, end: Point) -> Self {
        Segment::Line { start, end }
    }

    pub fn arc(center: Point, radius: f64, start_angle: f64, sweep: f64) -> Self {
        Segment::Arc {
            center,
            radius,
            start_angle,
            sweep,
        }
    }

    /// Arc leaving `pose` and turning by `sweep` radians (positive = left).
    pub fn turn_from(pose: Pose, radius: f64, sweep: f64) -> Self {
        let side = if sweep >= 0.0 { 1.0 } else { -1.0 };
        let center = pose.position + pose.left_normal() * (side * radius);
        let start_angle = (pose.position - center).angle();
        Segment::arc(center, radius, start_angle, sweep)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { start, end } => start.distance(end),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Pose at arc length `s` measured from the segment start; `s` is clamped.
    pub fn pose_at(&self, s: f64) -> Pose {
        let s = s.clamp(0.0, self.length());
        match *self {
            Segment::Line { start, end } => {
                let len = start.distance(end);
                let dir = (end - start) * (1.0 / len);
                Pose::new(start + dir * s, dir.angle())
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let sign = sweep.signum();
                let angle = start_angle + sign * s / radius;
                let position = center + Point::from_polar(radius, angle);
                Pose::new(position, angle + sign * FRAC_PI_2)
            }
        }
    }

    pub fn start_pose(&self) -> Pose {
        self.pose_at(0.0)
    }

    pub fn end_pose(&self) -> Pose {
        match *self {
            Segment::Line { start, end } => Pose::new(end, (end - start).angle()),
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let angle = start_angle + sweep;
                Pose::new(
                    center + Point::from_polar(radius, angle),
                    angle + sweep.signum() * FRAC_PI_2,
                )
            }
        }
    }

    /// Portion of the segment between local arc lengths `from` and `to`.
    pub fn sub_segment(&self, from: f64, to: f64) -> Segment {
        let len = self.length();
        let from = from.clamp(0.0, len);
        let to = to.clamp(from, len);
        match *self {
            Segment::Line { .. } => {
                Segment::line(self.pose_at(from).position, self.pose_at(to).position)
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let sign = sweep.signum();
                Segment::arc(
                    center,
                    radius,
                    start_angle + sign * from / radius,
                    sign * (to - from) / radius,
                )
            }
        }
    }

    /// Same geometry traversed in the opposite direction.
    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { start, end } => Segment::line(end, start),
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => Segment::arc(center, radius, start_angle + sweep, -sweep),
        }
    }

    /// Euclidean distance from `p` to the segment's point set.
    pub fn distance_to(&self, p: Point) -> f64 {
        match *self {
            Segment::Line { start, end } => {
                let d = end - start;
                let t = ((p - start).dot(d) / d.dot(d)).clamp(0.0, 1.0);
                p.distance(start + d * t)
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let rel = p - center;
                if rel.norm() > 0.0 && angle_in_sweep(rel.angle(), start_angle, sweep) {
                    (rel.norm() - radius).abs()
                } else {
                    let a = self.start_pose().position.distance(p);
                    let b = self.end_pose().position.distance(p);
                    a.min(b)
                }
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        match *self {
            Segment::Line { start, end } => (
                Point::new(start.x.min(end.x), start.y.min(end.y)),
                Point::new(start.x.max(end.x), start.y.max(end.y)),
            ),
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let a = self.start_pose().position;
                let b = self.end_pose().position;
                let mut lo = Point::new(a.x.min(b.x), a.y.min(b.y));
                let mut hi = Point::new(a.x.max(b.x), a.y.max(b.y));
                for k in 0..4 {
                    let axis = f64::from(k) * FRAC_PI_2;
                    if angle_in_sweep(axis, start_angle, sweep) {
                        let q = center + Point::from_polar(radius, axis);
                        lo = Point::new(lo.x.min(q.x), lo.y.min(q.y));
                        hi = Point::new(hi.x.max(q.x), hi.y.max(q.y));
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Applies an axis reflection. Reflections reverse arc orientation.
    pub fn mirrored(&self, mirror: &Mirror) -> Segment {
        match *self {
            Segment::Line { start, end } => Segment::line(mirror.point(start), mirror.point(end)),
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let flips = usize::from(mirror.flip_x) + usize::from(mirror.flip_y);
                let sweep = if flips % 2 == 1 { -sweep } else { sweep };
                Segment::arc(
                    mirror.point(center),
                    radius,
                    mirror.angle(start_angle),
                    sweep,
                )
            }
        }
    }
}

/// True when `angle` lies on the arc swept from `start` by `sweep` (either sign).
pub fn angle_in_sweep(angle: f64, start: f64, sweep: f64) -> bool {
    let (lo, span) = if sweep >= 0.0 {
        (start, sweep)
    } else {
        (start + sweep, -sweep)
    };
    let offset = (angle - lo).rem_euclid(TAU);
    offset <= span + 1e-12 || TAU - offset <= 1e-12
}

/// Reflection across the vertical line `x = axis_x` and/or horizontal line `y = axis_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mirror {
    pub flip_x: bool,
    pub flip_y: bool,
    pub axis_x: f64,
    pub axis_y: f64,
}

impl Mirror {
    pub fn point(&self, p: Point) -> Point {
        Point::new(
            if self.flip_x { 2.0 * self.axis_x - p.x } else { p.x },
            if self.flip_y { 2.0 * self.axis_y - p.y } else { p.y },
        )
    }

    pub fn angle(&self, a: f64) -> f64 {
        let mut a = a;
        if self.flip_x {
            a = PI - a;
        }
        if self.flip_y {
            a = -a;
        }
        normalize_angle(a)
    }

    pub fn is_identity(&self) -> bool {
        !self.flip_x && !self.flip_y
    }
}
