//! Planned paths: ordered segments with prefix arc lengths and role tags.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{heading_difference, Mirror, Pose, Segment, HEADING_TOL, POSITION_TOL};

/// Segments shorter than this are dropped when building paths.
pub const MIN_SEGMENT_LENGTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Headland,
    Lane,
    Turn,
    Transfer,
}

impl Role {
    /// Headland and transfer segments both run on the headland centerline.
    pub fn on_headland(self) -> bool {
        matches!(self, Role::Headland | Role::Transfer)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Headland => "headland",
            Role::Lane => "lane",
            Role::Turn => "turn",
            Role::Transfer => "transfer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub segment: usize,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lane: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub s_start: f64,
    pub s_end: f64,
}

impl Window {
    pub fn new(s_start: f64, s_end: f64) -> Self {
        Self { s_start, s_end }
    }

    pub fn length(&self) -> f64 {
        self.s_end - self.s_start
    }

    /// Length of the overlap with `[a, b]`.
    pub fn overlap(&self, a: f64, b: f64) -> f64 {
        (self.s_end.min(b) - self.s_start.max(a)).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPath")]
pub struct PlannedPath {
    segments: Vec<Segment>,
    cum_length: Vec<f64>,
    annotations: Vec<Annotation>,
}

#[derive(Deserialize)]
struct RawPath {
    segments: Vec<Segment>,
    cum_length: Vec<f64>,
    annotations: Vec<Annotation>,
}

impl TryFrom<RawPath> for PlannedPath {
    type Error = Error;

    fn try_from(raw: RawPath) -> Result<Self> {
        let path = PlannedPath::from_parts(raw.segments, raw.annotations)?;
        if path.cum_length.len() != raw.cum_length.len()
            || path
                .cum_length
                .iter()
                .zip(&raw.cum_length)
                .any(|(a, b)| (a - b).abs() > 1e-9)
        {
            return Err(Error::Discontinuity {
                index: 0,
                detail: "stored cum_length does not match segment lengths".into(),
            });
        }
        Ok(PlannedPath {
            cum_length: raw.cum_length,
            ..path
        })
    }
}

impl Default for PlannedPath {
    fn default() -> Self {
        Self {
            segments: Vec::new(),
            cum_length: vec![0.0],
            annotations: Vec::new(),
        }
    }
}

impl PlannedPath {
    /// Validates continuity and tagging, then computes prefix lengths.
    pub fn from_parts(segments: Vec<Segment>, annotations: Vec<Annotation>) -> Result<Self> {
        if annotations.len() != segments.len() {
            return Err(Error::Discontinuity {
                index: 0,
                detail: format!(
                    "{} annotations for {} segments",
                    annotations.len(),
                    segments.len()
                ),
            });
        }
        for (k, (seg, ann)) in segments.iter().zip(&annotations).enumerate() {
            if ann.segment != k {
                return Err(Error::Discontinuity {
                    index: k,
                    detail: format!("annotation refers to segment {}", ann.segment),
                });
            }
            validate_segment(k, seg)?;
        }
        for k in 1..segments.len() {
            check_joint(k, &segments[k - 1], &segments[k])?;
        }
        let mut cum_length = Vec::with_capacity(segments.len() + 1);
        cum_length.push(0.0);
        let mut total = 0.0;
        for seg in &segments {
            total += seg.length();
            cum_length.push(total);
        }
        Ok(Self {
            segments,
            cum_length,
            annotations,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Prefix sums; `cum_length()[k]` is the arc length at the start of segment `k`.
    pub fn cum_length(&self) -> &[f64] {
        &self.cum_length
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn length(&self) -> f64 {
        *self.cum_length.last().unwrap_or(&0.0)
    }

    pub fn window(&self, index: usize) -> Window {
        Window::new(self.cum_length[index], self.cum_length[index + 1])
    }

    pub fn role(&self, index: usize) -> Role {
        self.annotations[index].role
    }

    /// Index of the segment containing `s` (the later one at joints).
    pub fn segment_index_at(&self, s: f64) -> Option<usize> {
        if self.segments.is_empty() {
            return None;
        }
        let s = s.clamp(0.0, self.length());
        let idx = self.cum_length.partition_point(|&c| c <= s);
        Some(idx.saturating_sub(1).min(self.segments.len() - 1))
    }

    pub fn pose_at(&self, s: f64) -> Option<Pose> {
        let k = self.segment_index_at(s)?;
        Some(self.segments[k].pose_at(s - self.cum_length[k]))
    }

    pub fn start_pose(&self) -> Option<Pose> {
        self.segments.first().map(Segment::start_pose)
    }

    pub fn end_pose(&self) -> Option<Pose> {
        self.segments.last().map(Segment::end_pose)
    }

    /// Appends `other`; the joint must be continuous.
    pub fn concat(&self, other: &PlannedPath) -> Result<PlannedPath> {
        let offset = self.segments.len();
        let segments: Vec<Segment> = self
            .segments
            .iter()
            .chain(&other.segments)
            .copied()
            .collect();
        let annotations = self
            .annotations
            .iter()
            .copied()
            .chain(other.annotations.iter().map(|a| Annotation {
                segment: a.segment + offset,
                ..*a
            }))
            .collect();
        PlannedPath::from_parts(segments, annotations)
    }

    /// Reflected copy; lengths and annotations are unchanged.
    pub fn mirrored(&self, mirror: &Mirror) -> PlannedPath {
        if mirror.is_identity() {
            return self.clone();
        }
        PlannedPath {
            segments: self.segments.iter().map(|s| s.mirrored(mirror)).collect(),
            cum_length: self.cum_length.clone(),
            annotations: self.annotations.clone(),
        }
    }

    /// Pieces of the path inside `[a, b]` as `(segment index, local sub-segment, global start s)`.
    pub fn pieces(&self, a: f64, b: f64) -> Vec<(usize, Segment, f64)> {
        let mut out = Vec::new();
        for (k, seg) in self.segments.iter().enumerate() {
            let w = self.window(k);
            let lo = w.s_start.max(a);
            let hi = w.s_end.min(b);
            if hi - lo > MIN_SEGMENT_LENGTH {
                out.push((k, seg.sub_segment(lo - w.s_start, hi - w.s_start), lo));
            }
        }
        out
    }
}

fn validate_segment(index: usize, seg: &Segment) -> Result<()> {
    let bad = |detail: String| Err(Error::Discontinuity { index, detail });
    match *seg {
        Segment::Line { start, end } => {
            if !start.is_finite() || !end.is_finite() {
                return bad("non-finite line endpoint".into());
            }
            if start.distance(end) <= 0.0 {
                return bad("zero-length line".into());
            }
        }
        Segment::Arc {
            center,
            radius,
            start_angle,
            sweep,
        } => {
            if !center.is_finite() || !start_angle.is_finite() || !sweep.is_finite() {
                return bad("non-finite arc parameter".into());
            }
            if radius <= 0.0 || sweep == 0.0 {
                return bad(format!("degenerate arc (radius {radius}, sweep {sweep})"));
            }
        }
    }
    Ok(())
}

fn check_joint(index: usize, prev: &Segment, next: &Segment) -> Result<()> {
    let a = prev.end_pose();
    let b = next.start_pose();
    let gap = a.position.distance(b.position);
    let turn = heading_difference(a.heading, b.heading);
    if gap > POSITION_TOL || turn > HEADING_TOL {
        return Err(Error::Discontinuity {
            index,
            detail: format!("position gap {gap:.3e} m, heading gap {turn:.3e} rad"),
        });
    }
    Ok(())
}

/// Sum of segment lengths.
pub fn path_length(path: &PlannedPath) -> f64 {
    path.segments().iter().map(Segment::length).sum()
}

/// Samples the path at arc-length steps of at most `ds`, including every segment endpoint.
pub fn discretize(path: &PlannedPath, ds: f64) -> Vec<(f64, Pose)> {
    assert!(ds > 0.0, "discretization step must be positive");
    let mut out = Vec::new();
    for (k, seg) in path.segments().iter().enumerate() {
        let len = seg.length();
        let s0 = path.cum_length()[k];
        let n = (len / ds).ceil().max(1.0) as usize;
        let first = if k == 0 { 0 } else { 1 };
        for j in first..=n {
            let local = len * j as f64 / n as f64;
            out.push((s0 + local, seg.pose_at(local)));
        }
    }
    out
}

/// Incrementally builds a path from the current pose, tracking arc length.
#[derive(Debug, Clone)]
pub struct PathBuilder {
    segments: Vec<Segment>,
    annotations: Vec<Annotation>,
    pose: Pose,
    s: f64,
}

impl PathBuilder {
    pub fn new(start: Pose) -> Self {
        Self {
            segments: Vec::new(),
            annotations: Vec::new(),
            pose: start,
            s: 0.0,
        }
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Appends a segment that starts at the current pose. Near-zero segments are skipped.
    pub fn push(&mut self, seg: Segment, role: Role, lane: Option<usize>) {
        if seg.length() <= MIN_SEGMENT_LENGTH {
            return;
        }
        debug_assert!(
            seg.start_pose().approx_eq(&self.pose),
            "segment does not start at builder pose: {:?} vs {:?}",
            seg.start_pose(),
            self.pose
        );
        self.annotations.push(Annotation {
            segment: self.segments.len(),
            role,
            lane,
        });
        self.s += seg.length();
        self.pose = seg.end_pose();
        self.segments.push(seg);
    }

    pub fn straight(&mut self, length: f64, role: Role, lane: Option<usize>) {
        let start = self.pose.position;
        let end = start + self.pose.direction() * length;
        self.push(Segment::line(start, end), role, lane);
    }

    pub fn turn(&mut self, radius: f64, sweep: f64, role: Role) {
        self.push(Segment::turn_from(self.pose, radius, sweep), role, None);
    }

    pub fn extend(&mut self, segments: impl IntoIterator<Item = Segment>, role: Role) {
        for seg in segments {
            self.push(seg, role, None);
        }
    }

    pub fn finish(self) -> Result<PlannedPath> {
        PlannedPath::from_parts(self.segments, self.annotations)
    }
}
