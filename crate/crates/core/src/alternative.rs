//! Pattern-based plan. Each pattern sprays two adjacent lanes and the
//! bottom headland strip between them; turns are always driven with the boom off.
//!
//! Lanes are paired as `(2k, 2k-1)`: the pattern starts on the bottom headland
//! just east of lane `2k-1`, drives north up lane `2k`, crosses the top headland
//! westward and comes back south on lane `2k-1`. For odd lane counts the last
//! pattern replaces its missing first lane with the east headland edge.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{build_layout, FieldSpec, Layout, RingDirection};
use crate::geometry::{Point, Pose, Segment};
use crate::path::{PathBuilder, PlannedPath, Role, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Waypoint {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
    L,
    /// Second visit to A's position, at the end of the L-A turn.
    #[serde(rename = "A'")]
    APrime,
    M,
}

impl Waypoint {
    pub const ORDER: [Waypoint; 14] = [
        Waypoint::A,
        Waypoint::B,
        Waypoint::C,
        Waypoint::D,
        Waypoint::E,
        Waypoint::F,
        Waypoint::G,
        Waypoint::H,
        Waypoint::I,
        Waypoint::J,
        Waypoint::K,
        Waypoint::L,
        Waypoint::APrime,
        Waypoint::M,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialCase {
    #[default]
    None,
    /// Last pattern for even lane counts: A-M continues around the headland to the exit.
    ProlongedHeadland,
    /// Last pattern for odd lane counts: the east headland edge stands in for the first lane.
    ProlongedReplacingLane,
}

/// Lanes of one pattern in field indices. `first` is `None` when the east
/// headland edge replaces it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanePair {
    pub first: Option<usize>,
    pub second: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternInstance {
    /// Arc-length stamps; D and E are absent for the replacing-lane case.
    pub waypoint_s: BTreeMap<Waypoint, f64>,
    pub lane_pair: LanePair,
    pub special_case: SpecialCase,
    /// G-H length.
    pub transfer_length: f64,
    /// A'-M length.
    pub closing_length: f64,
}

impl PatternInstance {
    pub fn stamp(&self, waypoint: Waypoint) -> Option<f64> {
        self.waypoint_s.get(&waypoint).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativePlan {
    pub path: PlannedPath,
    pub patterns: Vec<PatternInstance>,
    pub entrance_leg: Window,
    pub exit_leg: Window,
}

pub fn plan_alternative(spec: FieldSpec) -> Result<AlternativePlan> {
    let layout = build_layout(spec)?;
    Ok(plan_alternative_on(&layout))
}

pub fn plan_alternative_on(layout: &Layout) -> AlternativePlan {
    let n = layout.spec.lane_count;
    let ring = &layout.ring;
    let entry = layout.canonical_entry_pose();
    let sigma_entry = ring.sigma_left(entry.position.y);

    let mut b = PathBuilder::new(entry);
    b.extend(
        ring.route(sigma_entry, ring.sigma_bottom(start_x(layout, 1)), RingDirection::Ccw),
        Role::Headland,
    );
    let entrance_leg = Window::new(0.0, b.s());

    let mut patterns = Vec::with_capacity(n.div_ceil(2));
    for k in 1..=n / 2 {
        patterns.push(emit_pattern(&mut b, layout, Some(2 * k), 2 * k - 1));
    }
    if n % 2 == 1 {
        patterns.push(emit_pattern(&mut b, layout, None, n));
    }
    let exit_leg = Window::new(b.s(), b.s());

    let path = b
        .finish()
        .expect("pattern construction is tangent-continuous")
        .mirrored(&layout.mirror);
    AlternativePlan {
        path,
        patterns,
        entrance_leg,
        exit_leg,
    }
}

/// Builds one pattern in the field frame starting at `start_pose`.
/// Stamps are relative to the pattern start (A = 0).
pub fn build_pattern(
    layout: &Layout,
    pair: LanePair,
    start_pose: Pose,
) -> Result<(Vec<Segment>, PatternInstance)> {
    let spec = &layout.spec;
    let n = spec.lane_count;
    if 2.0 * spec.turn_radius > spec.working_width {
        return Err(Error::GeometryInfeasible(format!(
            "lane spacing {} m is below the 2R = {} m transfer requirement",
            spec.working_width,
            2.0 * spec.turn_radius
        )));
    }
    let in_range = |lane: usize| (1..=n).contains(&lane);
    if !in_range(pair.second) || pair.first.is_some_and(|f| !in_range(f)) {
        return Err(Error::GeometryInfeasible(format!(
            "lane pair {pair:?} outside 1..={n}"
        )));
    }
    // Lane indices and mirror are both involutions.
    let second = layout.lane_index(pair.second);
    let first = pair.first.map(|f| layout.lane_index(f));
    let valid = match first {
        Some(f) => f == second + 1 && second % 2 == 1,
        None => second == n && n % 2 == 1,
    };
    if !valid {
        return Err(Error::GeometryInfeasible(format!(
            "lane pair {pair:?} is not an adjacent pattern pair"
        )));
    }
    let canonical = Pose::new(
        layout.mirror.point(start_pose.position),
        layout.mirror.angle(start_pose.heading),
    );
    let expected = Pose::new(Point::new(start_x(layout, second), layout.ring.bounds().min.y), 0.0);
    if !canonical.approx_eq(&expected) {
        return Err(Error::GeometryInfeasible(format!(
            "start pose {start_pose:?} is not waypoint A of lane pair {pair:?}"
        )));
    }

    let mut b = PathBuilder::new(expected);
    let instance = emit_pattern(&mut b, layout, first, second);
    let path = b
        .finish()
        .expect("pattern construction is tangent-continuous")
        .mirrored(&layout.mirror);
    Ok((path.segments().to_vec(), instance))
}

/// Canonical x of waypoint A for a pattern whose second lane is `lane`.
fn start_x(layout: &Layout, lane: usize) -> f64 {
    layout.lane_x(lane) + layout.spec.turn_radius
}

/// Appends one pattern in the canonical frame. Lanes are canonical indices.
fn emit_pattern(
    b: &mut PathBuilder,
    layout: &Layout,
    first: Option<usize>,
    second: usize,
) -> PatternInstance {
    let spec = &layout.spec;
    let (w, h, r, n) = (
        spec.working_width,
        spec.lane_length,
        spec.turn_radius,
        spec.lane_count,
    );
    let ring = &layout.ring;
    let sigma_exit = ring.sigma_left(layout.canonical_entry_pose().position.y);
    let lane_run = h - 2.0 * r;
    let margin = w / 2.0 - r;

    let mut stamps = BTreeMap::new();
    let mut stamp = |wp: Waypoint, s: f64| {
        stamps.insert(wp, s);
    };
    stamp(Waypoint::A, b.s());

    let special_case = match first {
        Some(f) => {
            b.straight(w - 2.0 * r, Role::Headland, None);
            stamp(Waypoint::B, b.s());
            b.turn(r, FRAC_PI_2, Role::Turn);
            stamp(Waypoint::C, b.s());
            let lane = Some(layout.lane_index(f));
            stamp(Waypoint::D, b.s() + margin);
            b.straight(lane_run, Role::Lane, lane);
            stamp(Waypoint::E, b.s() - margin);
            stamp(Waypoint::F, b.s());
            b.turn(r, FRAC_PI_2, Role::Turn);
            if second + 1 == n {
                SpecialCase::ProlongedHeadland
            } else {
                SpecialCase::None
            }
        }
        None => {
            let east = ring.bounds().max.x;
            let sigma_a = ring.sigma_bottom(start_x(layout, second));
            b.extend(
                ring.route(sigma_a, ring.sigma_bottom(east - r), RingDirection::Ccw),
                Role::Headland,
            );
            stamp(Waypoint::B, b.s());
            let corners = ring.pieces();
            b.push(corners[1], Role::Headland, None);
            stamp(Waypoint::C, b.s());
            b.push(corners[2], Role::Headland, None);
            stamp(Waypoint::F, b.s());
            b.push(corners[3], Role::Headland, None);
            SpecialCase::ProlongedReplacingLane
        }
    };
    stamp(Waypoint::G, b.s());

    let transfer_start = b.s();
    b.straight(w - 2.0 * r, Role::Transfer, None);
    let transfer_length = b.s() - transfer_start;
    stamp(Waypoint::H, b.s());
    b.turn(r, FRAC_PI_2, Role::Turn);
    stamp(Waypoint::I, b.s());
    stamp(Waypoint::J, b.s() + margin);
    b.straight(lane_run, Role::Lane, Some(layout.lane_index(second)));
    stamp(Waypoint::K, b.s() - margin);
    stamp(Waypoint::L, b.s());
    b.turn(r, FRAC_PI_2, Role::Turn);
    stamp(Waypoint::APrime, b.s());

    let closing_start = b.s();
    match special_case {
        SpecialCase::None => b.straight(2.0 * w, Role::Headland, None),
        _ => {
            let sigma_a = ring.sigma_bottom(start_x(layout, second));
            b.extend(ring.route(sigma_a, sigma_exit, RingDirection::Ccw), Role::Headland);
        }
    }
    let closing_length = b.s() - closing_start;
    stamp(Waypoint::M, b.s());

    PatternInstance {
        waypoint_s: stamps,
        lane_pair: LanePair {
            first: first.map(|f| layout.lane_index(f)),
            second: layout.lane_index(second),
        },
        special_case,
        transfer_length,
        closing_length,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{headland_projection_distance, Entrance};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec(n: usize) -> FieldSpec {
        FieldSpec::new(12.0, 100.0, n, 5.0)
    }

    fn turn_count(path: &PlannedPath, from: f64, to: f64) -> usize {
        (0..path.len())
            .filter(|&k| path.role(k) == Role::Turn)
            .filter(|&k| {
                let win = path.window(k);
                win.s_start >= from - 1e-9 && win.s_end <= to + 1e-9
            })
            .count()
    }

    #[test]
    fn unit_pattern_has_four_turns_and_closes_on_a() {
        let layout = build_layout(spec(6)).unwrap();
        let start = Pose::new(Point::new(11.0, -6.0), 0.0);
        let pair = LanePair {
            first: Some(2),
            second: 1,
        };
        let (segments, inst) = build_pattern(&layout, pair, start).unwrap();
        let path = PlannedPath::from_parts(
            segments.clone(),
            segments
                .iter()
                .enumerate()
                .map(|(k, _)| crate::path::Annotation {
                    segment: k,
                    role: Role::Headland,
                    lane: None,
                })
                .collect(),
        )
        .unwrap();
        assert_eq!(inst.special_case, SpecialCase::None);
        let a = path.pose_at(inst.stamp(Waypoint::A).unwrap()).unwrap();
        let a2 = path.pose_at(inst.stamp(Waypoint::APrime).unwrap()).unwrap();
        assert!(a.position.distance(a2.position) < 1e-6);
        assert!(inst.stamp(Waypoint::APrime) > inst.stamp(Waypoint::L));
        assert_relative_eq!(inst.closing_length, 24.0, epsilon = 1e-9);
        assert_relative_eq!(inst.transfer_length, 2.0, epsilon = 1e-9);

        let plan = plan_alternative(spec(6)).unwrap();
        let p0 = &plan.patterns[0];
        let turns = turn_count(
            &plan.path,
            p0.stamp(Waypoint::A).unwrap(),
            p0.stamp(Waypoint::M).unwrap(),
        );
        assert_eq!(turns, 4);
    }

    #[test]
    fn stamps_increase_and_sit_at_half_width() {
        let layout = build_layout(spec(5)).unwrap();
        let plan = plan_alternative_on(&layout);
        for p in &plan.patterns {
            let stamps: Vec<f64> = Waypoint::ORDER.iter().filter_map(|&w| p.stamp(w)).collect();
            assert!(stamps.windows(2).all(|s| s[0] < s[1]), "{stamps:?}");
            for wp in [Waypoint::D, Waypoint::E, Waypoint::J, Waypoint::K] {
                if let Some(s) = p.stamp(wp) {
                    let pos = plan.path.pose_at(s).unwrap().position;
                    assert_relative_eq!(headland_projection_distance(pos, &layout), 6.0, epsilon = 1e-6);
                }
            }
        }
        let last = plan.patterns.last().unwrap();
        assert_eq!(last.special_case, SpecialCase::ProlongedReplacingLane);
        assert!(last.stamp(Waypoint::D).is_none());
    }

    #[test]
    fn patterns_chain_and_cover_lanes_once() {
        for n in [4usize, 5, 8, 9] {
            let plan = plan_alternative(spec(n)).unwrap();
            assert_eq!(plan.patterns.len(), n.div_ceil(2));
            for pair in plan.patterns.windows(2) {
                let m = plan.path.pose_at(pair[0].stamp(Waypoint::M).unwrap()).unwrap();
                let a = plan.path.pose_at(pair[1].stamp(Waypoint::A).unwrap()).unwrap();
                assert!(m.position.distance(a.position) < 1e-6);
            }
            let mut lanes: Vec<usize> = plan
                .patterns
                .iter()
                .flat_map(|p| p.lane_pair.first.into_iter().chain([p.lane_pair.second]))
                .collect();
            lanes.sort_unstable();
            assert_eq!(lanes, (1..=n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn table_lengths_within_two_percent() {
        let plan = plan_alternative(spec(4)).unwrap();
        assert!((plan.path.length() - 742.0).abs() / 742.0 < 0.02);
        let plan = plan_alternative(FieldSpec::new(36.0, 100.0, 51, 5.0)).unwrap();
        assert!((plan.path.length() - 10784.0).abs() / 10784.0 < 0.02);
    }

    #[test]
    fn two_lane_step_matches_per_lane_term() {
        let term = 100.0 - 20.0 + PI * 5.0 + 36.0;
        for n in [4usize, 5] {
            let a = plan_alternative(spec(n)).unwrap().path.length();
            let b = plan_alternative(spec(n + 2)).unwrap().path.length();
            assert_relative_eq!(b - a, 2.0 * term, epsilon = 1e-9);
        }
    }

    #[test]
    fn closes_at_entrance_for_every_corner() {
        for entrance in Entrance::ALL {
            for n in [2usize, 3, 4] {
                let layout = build_layout(FieldSpec::new(10.0, 60.0, n, 4.0).with_entrance(entrance)).unwrap();
                let plan = plan_alternative_on(&layout);
                let start = plan.path.start_pose().unwrap();
                let end = plan.path.end_pose().unwrap();
                assert!(start.approx_eq(&layout.entry_pose()));
                assert!(end.approx_eq(&layout.entry_pose()), "{entrance} N={n}");
                assert_eq!(plan.exit_leg.length(), 0.0);
                assert!(plan.entrance_leg.length() > 0.0);
            }
        }
    }

    #[test]
    fn rejects_bad_pairs_and_poses() {
        let layout = build_layout(spec(6)).unwrap();
        let a1 = Pose::new(Point::new(11.0, -6.0), 0.0);
        let skip = LanePair {
            first: Some(3),
            second: 1,
        };
        assert!(matches!(
            build_pattern(&layout, skip, a1),
            Err(Error::GeometryInfeasible(_))
        ));
        let ok = LanePair {
            first: Some(2),
            second: 1,
        };
        let off = Pose::new(Point::new(12.0, -6.0), 0.0);
        assert!(build_pattern(&layout, ok, off).is_err());
        assert!(build_pattern(&layout, ok, a1).is_ok());
    }
}
