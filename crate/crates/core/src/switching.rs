//! Spray programs: ON intervals along path arc length, built either
//! predictively from pattern waypoints or reactively from what is still unsprayed.

use serde::{Deserialize, Serialize};

use crate::alternative::{AlternativePlan, Waypoint};
use crate::coverage::CoverageGrid;
use crate::error::{Error, Result};
use crate::field::Layout;
use crate::geometry::{angle_in_sweep, Point, Segment};
use crate::path::{PlannedPath, Window};

/// Gaps narrower than this between ON intervals are closed.
pub const MERGE_GAP: f64 = 1e-9;

const BOOM_SAMPLES: usize = 33;
/// Swaths are inflated and the target shrunk by this much, so shared edges count as covered.
const COVER_TOL: f64 = 1e-7;
/// The open pass's own swath trails the boom by this much.
const OWN_LAG: f64 = 1e-4;
const BISECT_TOL: f64 = 1e-7;
const SNAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub s_on: f64,
    pub s_off: f64,
}

impl Interval {
    pub fn new(s_on: f64, s_off: f64) -> Self {
        Self { s_on, s_off }
    }

    pub fn length(&self) -> f64 {
        self.s_off - self.s_on
    }
}

/// Sorted, pairwise disjoint ON intervals within `[0, path_length]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProgram")]
pub struct SprayProgram {
    intervals: Vec<Interval>,
    #[serde(rename = "path_length_m")]
    path_length: f64,
}

#[derive(Deserialize)]
struct RawProgram {
    intervals: Vec<Interval>,
    path_length_m: f64,
}

impl TryFrom<RawProgram> for SprayProgram {
    type Error = Error;

    fn try_from(raw: RawProgram) -> Result<Self> {
        SprayProgram::new(raw.intervals, raw.path_length_m)
    }
}

impl SprayProgram {
    pub fn new(intervals: Vec<Interval>, path_length: f64) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidProgram(msg));
        if !(path_length >= 0.0 && path_length.is_finite()) {
            return bad(format!("path length {path_length} is not a finite non-negative value"));
        }
        for (k, iv) in intervals.iter().enumerate() {
            if !(iv.s_on.is_finite() && iv.s_off.is_finite()) {
                return bad(format!("interval {k} has a non-finite bound"));
            }
            if iv.s_on < 0.0 || iv.s_on >= iv.s_off || iv.s_off > path_length + 1e-9 {
                return bad(format!(
                    "interval {k} [{}, {}] is empty or outside [0, {path_length}]",
                    iv.s_on, iv.s_off
                ));
            }
            if k > 0 && intervals[k - 1].s_off >= iv.s_on {
                return bad(format!("interval {k} overlaps or precedes interval {}", k - 1));
            }
        }
        Ok(Self {
            intervals,
            path_length,
        })
    }

    pub fn empty(path_length: f64) -> Self {
        Self {
            intervals: Vec::new(),
            path_length,
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn path_length(&self) -> f64 {
        self.path_length
    }

    pub fn is_on(&self, s: f64) -> bool {
        self.intervals.iter().any(|iv| iv.s_on <= s && s <= iv.s_off)
    }

    pub fn events(&self) -> Vec<SwitchEvent> {
        self.intervals
            .iter()
            .flat_map(|iv| {
                [
                    SwitchEvent {
                        s: iv.s_on,
                        new_state: true,
                    },
                    SwitchEvent {
                        s: iv.s_off,
                        new_state: false,
                    },
                ]
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub s: f64,
    pub new_state: bool,
}

pub fn count_on_states(program: &SprayProgram) -> usize {
    program.intervals.len()
}

/// Sorts and joins intervals that overlap or are separated by less than [`MERGE_GAP`].
pub fn merge(mut intervals: Vec<Interval>) -> Vec<Interval> {
    intervals.retain(|iv| iv.s_off > iv.s_on);
    intervals.sort_by(|a, b| a.s_on.total_cmp(&b.s_on));
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match out.last_mut() {
            Some(last) if iv.s_on - last.s_off < MERGE_GAP => last.s_off = last.s_off.max(iv.s_off),
            _ => out.push(iv),
        }
    }
    out
}

/// Pattern lanes and the closing headland run are switched on from stored waypoints;
/// the entrance and exit legs are scheduled reactively.
pub fn predictive_schedule(plan: &AlternativePlan, layout: &Layout) -> SprayProgram {
    let path = &plan.path;
    let none = CoverageGrid::empty(layout.spec.working_width / 8.0);
    let mut intervals = reactive_schedule_window(path, layout, &none, plan.entrance_leg, &[]);
    for p in &plan.patterns {
        let span = |a: Waypoint, b: Waypoint| Some(Interval::new(p.stamp(a)?, p.stamp(b)?));
        intervals.extend(
            [
                span(Waypoint::D, Waypoint::E),
                span(Waypoint::J, Waypoint::K),
                span(Waypoint::APrime, Waypoint::M),
            ]
            .into_iter()
            .flatten(),
        );
    }
    if plan.exit_leg.length() > 0.0 {
        let sprayed = merge(intervals.clone());
        intervals.extend(reactive_schedule_window(path, layout, &none, plan.exit_leg, &sprayed));
    }
    SprayProgram::new(merge(intervals), path.length())
        .expect("predictive intervals lie on the path")
}

/// Boom ON exactly while it passes over target area that is neither in `prior`
/// nor already sprayed earlier on this path.
pub fn reactive_schedule(path: &PlannedPath, layout: &Layout, prior: &CoverageGrid) -> SprayProgram {
    let whole = Window::new(0.0, path.length());
    let intervals = reactive_schedule_window(path, layout, prior, whole, &[]);
    SprayProgram::new(merge(intervals), path.length()).expect("reactive intervals lie on the path")
}

/// Reactive switching restricted to `window`; `sprayed` are earlier ON intervals on the same path.
pub fn reactive_schedule_window(
    path: &PlannedPath,
    layout: &Layout,
    prior: &CoverageGrid,
    window: Window,
    sprayed: &[Interval],
) -> Vec<Interval> {
    if path.is_empty() || window.length() <= 0.0 {
        return Vec::new();
    }
    let half = layout.half_width();
    let mut state = Reactive {
        path,
        layout,
        prior,
        half,
        closed: Vec::new(),
    };
    for iv in sprayed {
        state.close(iv.s_on, iv.s_off);
    }
    let ds = (layout.spec.working_width / 8.0).min(0.5);
    let samples = sample_positions(path, window, ds);

    let mut out = Vec::new();
    let mut open: Option<f64> = state.uncovered_at(window.s_start, None).then_some(window.s_start);
    for pair in samples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let now = state.uncovered_at(b, open);
        match open {
            Some(s_on) if !now => {
                let t = snap(path, bisect(a, b, |x| !state.uncovered_at(x, Some(s_on))));
                if t > s_on {
                    out.push(Interval::new(s_on, t));
                    state.close(s_on, t);
                }
                open = None;
            }
            None if now => {
                open = Some(snap(path, bisect(a, b, |x| state.uncovered_at(x, None))));
            }
            _ => {}
        }
    }
    if let Some(s_on) = open {
        if window.s_end > s_on {
            out.push(Interval::new(s_on, window.s_end));
        }
    }
    out
}

/// Sample positions in `window` no farther apart than `ds`, including every segment joint.
fn sample_positions(path: &PlannedPath, window: Window, ds: f64) -> Vec<f64> {
    let mut breaks = vec![window.s_start];
    breaks.extend(
        path.cum_length()
            .iter()
            .copied()
            .filter(|&s| s > window.s_start && s < window.s_end),
    );
    breaks.push(window.s_end);
    let mut out = vec![window.s_start];
    for pair in breaks.windows(2) {
        let n = ((pair[1] - pair[0]) / ds).ceil().max(1.0) as usize;
        out.extend((1..=n).map(|k| pair[0] + (pair[1] - pair[0]) * k as f64 / n as f64));
    }
    out
}

/// Smallest `x` in `(a, b]` where `pred` holds, to within [`BISECT_TOL`]; assumes `pred(b)`.
fn bisect(mut a: f64, mut b: f64, pred: impl Fn(f64) -> bool) -> f64 {
    while b - a > BISECT_TOL {
        let mid = 0.5 * (a + b);
        if pred(mid) {
            b = mid;
        } else {
            a = mid;
        }
    }
    b
}

fn snap(path: &PlannedPath, s: f64) -> f64 {
    path.cum_length()
        .iter()
        .copied()
        .find(|c| (c - s).abs() < SNAP_TOL)
        .unwrap_or(s)
}

/// Exact swept footprint of the boom along one path piece.
struct Swath {
    seg: Segment,
    lo: Point,
    hi: Point,
}

impl Swath {
    fn new(seg: Segment, half: f64) -> Self {
        let (lo, hi) = seg.bounds();
        let pad = half + COVER_TOL;
        Self {
            seg,
            lo: Point::new(lo.x - pad, lo.y - pad),
            hi: Point::new(hi.x + pad, hi.y + pad),
        }
    }

    fn covers(&self, p: Point, half: f64) -> bool {
        if p.x < self.lo.x || p.x > self.hi.x || p.y < self.lo.y || p.y > self.hi.y {
            return false;
        }
        let reach = half + COVER_TOL;
        match self.seg {
            Segment::Line { start, end } => {
                let d = end - start;
                let len = d.norm();
                let u = d * (1.0 / len);
                let rel = p - start;
                let along = rel.dot(u);
                along >= -COVER_TOL && along <= len + COVER_TOL && rel.cross(u).abs() <= reach
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let rel = p - center;
                let r = rel.norm();
                if r <= COVER_TOL {
                    return radius <= reach;
                }
                // Angular slack equivalent to COVER_TOL of arc length at this radius.
                let slack = COVER_TOL / r;
                let (a0, span) = if sweep >= 0.0 {
                    (start_angle - slack, sweep + 2.0 * slack)
                } else {
                    (start_angle + slack, sweep - 2.0 * slack)
                };
                let angle = rel.angle();
                if (r - radius).abs() <= reach && angle_in_sweep(angle, a0, span) {
                    return true;
                }
                // The boom reaches past the center when the radius is short.
                r <= half - radius + COVER_TOL
                    && angle_in_sweep(angle + std::f64::consts::PI, a0, span)
            }
        }
    }
}

struct Reactive<'a> {
    path: &'a PlannedPath,
    layout: &'a Layout,
    prior: &'a CoverageGrid,
    half: f64,
    closed: Vec<Swath>,
}

impl Reactive<'_> {
    fn close(&mut self, a: f64, b: f64) {
        let half = self.half;
        self.closed.extend(
            self.path
                .pieces(a, b)
                .into_iter()
                .map(|(_, seg, _)| Swath::new(seg, half)),
        );
    }

    /// True when some boom point at `s` lies on target area not yet sprayed.
    /// `open` is the start of the pass in progress, whose swath trails the boom.
    fn uncovered_at(&self, s: f64, open: Option<f64>) -> bool {
        let Some(pose) = self.path.pose_at(s) else {
            return false;
        };
        let own: Vec<Swath> = match open {
            Some(s_on) if s - OWN_LAG > s_on => self
                .path
                .pieces(s_on, s - OWN_LAG)
                .into_iter()
                .map(|(_, seg, _)| Swath::new(seg, self.half))
                .collect(),
            _ => Vec::new(),
        };
        let normal = pose.left_normal();
        (0..BOOM_SAMPLES).any(|k| {
            let offset = self.half * (2.0 * k as f64 / (BOOM_SAMPLES - 1) as f64 - 1.0);
            let p = pose.position + normal * offset;
            self.layout.target.contains(p, COVER_TOL)
                && self.prior.count_at(p) == 0
                && !self.closed.iter().any(|w| w.covers(p, self.half))
                && !own.iter().any(|w| w.covers(p, self.half))
        })
    }
}
