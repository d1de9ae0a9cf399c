//! Baseline plan: one full headland loop, then all lanes in adjacent order,
//! then the shorter way back along the headland.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{build_layout, FieldSpec, Layout, RingDirection};
use crate::geometry::{heading_difference, Segment};
use crate::path::{PathBuilder, PlannedPath, Role, Window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneWindow {
    pub lane: usize,
    pub s_enter: f64,
    pub s_exit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoustrophedonPlan {
    pub path: PlannedPath,
    /// In traversal order.
    pub lane_windows: Vec<LaneWindow>,
    pub headland_window: Window,
    pub exit_window: Window,
}

pub fn plan_boustrophedon(spec: FieldSpec) -> Result<BoustrophedonPlan> {
    let layout = build_layout(spec)?;
    Ok(plan_boustrophedon_on(&layout))
}

pub fn plan_boustrophedon_on(layout: &Layout) -> BoustrophedonPlan {
    let spec = &layout.spec;
    let (w, h, r, n) = (
        spec.working_width,
        spec.lane_length,
        spec.turn_radius,
        spec.lane_count,
    );
    let ring = &layout.ring;
    let entry = layout.canonical_entry_pose();
    let sigma_entry = ring.sigma_left(entry.position.y);

    let mut b = PathBuilder::new(entry);
    b.extend(ring.full_loop(sigma_entry), Role::Headland);
    let headland_window = Window::new(0.0, b.s());

    b.extend(
        ring.route(sigma_entry, ring.sigma_bottom(layout.lane_x(1) - r), RingDirection::Ccw),
        Role::Headland,
    );
    b.turn(r, FRAC_PI_2, Role::Turn);

    let mut lane_windows = Vec::with_capacity(n);
    for lane in 1..=n {
        let s_enter = b.s();
        b.straight(h - 2.0 * r, Role::Lane, Some(layout.lane_index(lane)));
        lane_windows.push(LaneWindow {
            lane: layout.lane_index(lane),
            s_enter,
            s_exit: b.s(),
        });
        if lane < n {
            // Northbound lanes turn right into the next lane, southbound turn left.
            let sweep = if lane % 2 == 1 { -FRAC_PI_2 } else { FRAC_PI_2 };
            b.turn(r, sweep, Role::Turn);
            b.straight(w - 2.0 * r, Role::Transfer, None);
            b.turn(r, sweep, Role::Turn);
        }
    }

    let exit_start = b.s();
    let (turn, route) = shortest_exit(layout, &b, sigma_entry);
    b.push(turn, Role::Turn, None);
    b.extend(route, Role::Headland);
    let exit_window = Window::new(exit_start, b.s());

    let path = b
        .finish()
        .expect("boustrophedon construction is tangent-continuous")
        .mirrored(&layout.mirror);
    BoustrophedonPlan {
        path,
        lane_windows,
        headland_window,
        exit_window,
    }
}

/// Turn off the last lane and ring route back to the entrance, whichever way is shorter.
/// Exact ties go clockwise.
fn shortest_exit(layout: &Layout, b: &PathBuilder, sigma_entry: f64) -> (Segment, Vec<Segment>) {
    let ring = &layout.ring;
    let r = layout.spec.turn_radius;
    let candidates = [-FRAC_PI_2, FRAC_PI_2].map(|sweep| {
        let turn = Segment::turn_from(b.pose(), r, sweep);
        let end = turn.end_pose();
        let sigma = ring
            .locate(end.position)
            .expect("lane turn-out lands on the headland centerline");
        let dir = if heading_difference(end.heading, ring.pose_at(sigma).heading) < 1e-6 {
            RingDirection::Ccw
        } else {
            RingDirection::Cw
        };
        let len = turn.length() + ring.route_length(sigma, sigma_entry, dir);
        (turn, sigma, dir, len)
    });
    let pick = |c: &(Segment, f64, RingDirection, f64)| (c.0, ring.route(c.1, sigma_entry, c.2));
    let (a, bb) = (&candidates[0], &candidates[1]);
    if (a.3 - bb.3).abs() <= 1e-9 {
        let cw = if a.2 == RingDirection::Cw { a } else { bb };
        pick(cw)
    } else if a.3 < bb.3 {
        pick(a)
    } else {
        pick(bb)
    }
}
