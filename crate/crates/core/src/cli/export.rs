use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::{
    output_name, read_json, write_atomic, write_json, CliError, MethodPlan, OutputFormat,
    PlanDocument, RunConfig, ScheduleDocument,
};
use crate::field::{build_layout, Layout};
use crate::geometry::{Point, Segment};
use crate::path::PlannedPath;
use crate::switching::SprayProgram;

const ARC_STEP: f64 = PI / 36.0;
const MARGIN: f64 = 5.0;

fn segment_points(seg: &Segment) -> Vec<Point> {
    match *seg {
        Segment::Line { start, end } => vec![start, end],
        Segment::Arc { sweep, .. } => {
            let n = (sweep.abs() / ARC_STEP).ceil().max(1.0) as usize;
            let len = seg.length();
            (0..=n)
                .map(|k| seg.pose_at(len * k as f64 / n as f64).position)
                .collect()
        }
    }
}

/// Polyline through the path between `a` and `b`.
fn polyline(path: &PlannedPath, a: f64, b: f64) -> Vec<Point> {
    let mut pts: Vec<Point> = Vec::new();
    for (_, piece, _) in path.pieces(a, b) {
        let mut seg_pts = segment_points(&piece);
        if !pts.is_empty() {
            seg_pts.remove(0);
        }
        pts.extend(seg_pts);
    }
    pts
}

/// Complement of the program's ON intervals within `[0, length]`.
fn off_spans(program: &SprayProgram, length: f64) -> Vec<(f64, f64)> {
    let mut spans = Vec::new();
    let mut cursor = 0.0;
    for iv in program.intervals() {
        if iv.s_on > cursor {
            spans.push((cursor, iv.s_on));
        }
        cursor = iv.s_off;
    }
    if length > cursor {
        spans.push((cursor, length));
    }
    spans
}

/// North-up SVG: target region, one `spray-on` group per ON interval and one `spray-off` group.
pub fn svg_document(path: &PlannedPath, program: &SprayProgram, layout: &Layout) -> String {
    let outer = layout.target.outer;
    let (x0, y1) = (outer.min.x - MARGIN, outer.max.y + MARGIN);
    let width = outer.width() + 2.0 * MARGIN;
    let height = outer.height() + 2.0 * MARGIN;
    let fmt_pts = |pts: &[Point]| {
        pts.iter()
            .map(|p| format!("{:.3},{:.3}", p.x - x0, y1 - p.y))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:.3} {height:.3}" width="{width:.0}" height="{height:.0}">"#
    );
    let boundary = layout.target.boundary(16);
    let _ = writeln!(
        svg,
        r##"  <polygon class="target" points="{}" fill="#eef4e4" stroke="#6b8e23" stroke-width="0.3"/>"##,
        fmt_pts(&boundary)
    );
    let w = layout.spec.working_width;
    for iv in program.intervals() {
        let pts = fmt_pts(&polyline(path, iv.s_on, iv.s_off));
        let _ = writeln!(svg, r#"  <g class="spray-on">"#);
        let _ = writeln!(
            svg,
            r##"    <polyline class="swath" points="{pts}" fill="none" stroke="#3a7bd5" stroke-opacity="0.35" stroke-width="{w}" stroke-linecap="butt"/>"##
        );
        let _ = writeln!(
            svg,
            r##"    <polyline class="centerline" points="{pts}" fill="none" stroke="#1c4e9a" stroke-width="0.4"/>"##
        );
        let _ = writeln!(svg, "  </g>");
    }
    let _ = writeln!(svg, r#"  <g class="spray-off">"#);
    for (a, b) in off_spans(program, path.length()) {
        let _ = writeln!(
            svg,
            r##"    <polyline points="{}" fill="none" stroke="#888888" stroke-width="0.4" stroke-dasharray="1.5 1"/>"##,
            fmt_pts(&polyline(path, a, b))
        );
    }
    let _ = writeln!(svg, "  </g>");
    svg.push_str("</svg>\n");
    svg
}

/// One LineString per path segment plus the target region polygon, in local field meters.
pub fn geojson_document(path: &PlannedPath, program: &SprayProgram, layout: &Layout) -> Value {
    let coords = |pts: &[Point]| pts.iter().map(|p| vec![p.x, p.y]).collect::<Vec<_>>();
    let mut features: Vec<Value> = path
        .segments()
        .iter()
        .zip(path.annotations())
        .enumerate()
        .map(|(k, (seg, ann))| {
            let win = path.window(k);
            let on_length: f64 = program
                .intervals()
                .iter()
                .map(|iv| win.overlap(iv.s_on, iv.s_off))
                .sum();
            json!({
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords(&segment_points(seg))},
                "properties": {
                    "segment": k,
                    "role": ann.role.as_str(),
                    "lane": ann.lane,
                    "on": on_length > 1e-9,
                    "on_length_m": on_length,
                    "s_start_m": win.s_start,
                    "s_end_m": win.s_end,
                }
            })
        })
        .collect();
    features.push(json!({
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [coords(&layout.target.boundary(16))]},
        "properties": {"kind": "target_region", "area_m2": layout.target_area()}
    }));
    json!({"type": "FeatureCollection", "features": features})
}

fn write_renderings(
    plan: &MethodPlan,
    program: &SprayProgram,
    layout: &Layout,
    out: &Path,
    several: bool,
    formats: &[OutputFormat],
) -> Result<Vec<PathBuf>, CliError> {
    let method = plan.method();
    let mut written = Vec::new();
    if formats.contains(&OutputFormat::Svg) {
        let file = out.join(output_name("plan", method, several, "svg"));
        write_atomic(&file, svg_document(plan.path(), program, layout).as_bytes())?;
        written.push(file);
    }
    if formats.contains(&OutputFormat::Geojson) {
        let file = out.join(output_name("plan", method, several, "geojson"));
        write_json(&file, &geojson_document(plan.path(), program, layout))?;
        written.push(file);
    }
    for f in &written {
        println!("{method}: wrote {}", f.display());
    }
    Ok(written)
}

fn load_schedule(path: Option<&Path>, plan: &MethodPlan, layout: &Layout) -> Result<SprayProgram, CliError> {
    let Some(path) = path else {
        return Ok(plan.schedule(layout));
    };
    let doc: ScheduleDocument = read_json(path, "schedule")?;
    if doc.method != plan.method() || (doc.program.path_length() - plan.path().length()).abs() > 1e-6 {
        return Err(CliError::Usage(format!(
            "schedule {} does not belong to this {} plan",
            path.display(),
            plan.method()
        )));
    }
    Ok(doc.program)
}

const RENDER_FORMATS: [OutputFormat; 2] = [OutputFormat::Svg, OutputFormat::Geojson];

pub(super) fn cmd_export(
    cfg: &RunConfig,
    out: &Path,
    schedule: Option<&Path>,
) -> Result<Vec<PathBuf>, CliError> {
    let layout = build_layout(cfg.field)?;
    let methods = cfg.method.methods();
    if schedule.is_some() && methods.len() > 1 {
        return Err(CliError::Usage("--schedule needs a single --method".into()));
    }
    let mut formats: Vec<OutputFormat> =
        cfg.outputs.iter().copied().filter(|f| RENDER_FORMATS.contains(f)).collect();
    if formats.is_empty() {
        formats = RENDER_FORMATS.to_vec();
    }
    let mut written = Vec::new();
    for &method in &methods {
        let plan = MethodPlan::build(method, &layout);
        let program = load_schedule(schedule, &plan, &layout)?;
        written.extend(write_renderings(&plan, &program, &layout, out, methods.len() > 1, &formats)?);
    }
    Ok(written)
}

pub(super) fn cmd_export_file(
    plan_file: &Path,
    schedule: Option<&Path>,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let doc: PlanDocument = read_json(plan_file, "plan")?;
    let layout = build_layout(doc.field)?;
    let program = load_schedule(schedule, &doc.plan, &layout)?;
    write_renderings(&doc.plan, &program, &layout, out, false, &RENDER_FORMATS)
}
