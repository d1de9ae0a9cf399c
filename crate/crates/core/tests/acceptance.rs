//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test --test acceptance -- --nocapture` to see them.
//!
//! Expected values come from hand-written closed forms and literal table rows,
//! never from the library's own formula functions.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::time::{Duration, Instant};

use clap::Parser;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use spraypath::alternative::{plan_alternative, AlternativePlan, Waypoint};
use spraypath::analytics::{deltas, time_savings, Method};
use spraypath::boustrophedon::plan_boustrophedon;
use spraypath::cli::{run, verify_method, Cli, MethodPlan};
use spraypath::coverage::{coverage_report, rasterize, CoverageGrid};
use spraypath::field::{build_layout, Entrance, FieldSpec};
use spraypath::geometry::Segment;
use spraypath::path::{PlannedPath, Role};
use spraypath::switching::{count_on_states, predictive_schedule, reactive_schedule, SprayProgram};

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    println!("criterion {id} ({name}): {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

const R: f64 = 5.0;

// Closed forms written out independently of the library.
fn oracle_length(method: Method, n: usize, w: f64, h: f64, r: f64) -> f64 {
    let nf = n as f64;
    let arc = PI * r / 2.0;
    match (method, n % 2 == 1) {
        (Method::Boustrophedon, true) => {
            nf * (h - 4.0 * r + 2.0 * arc + 4.0 * w) + 3.0 * h - 14.0 * r + 6.0 * arc + 2.0 * w
        }
        (Method::Boustrophedon, false) => {
            nf * (h - 4.0 * r + 2.0 * arc + 4.0 * w) + 3.0 * h - 12.0 * r + 6.0 * arc + 2.0 * w
        }
        (Method::Alternative, true) => {
            nf * (h - 4.0 * r + 2.0 * arc + 3.0 * w) + 3.0 * h - 12.0 * r + 6.0 * arc + 3.0 * w
        }
        (Method::Alternative, false) => {
            nf * (h - 4.0 * r + 2.0 * arc + 3.0 * w) + 2.0 * h - 8.0 * r + 4.0 * arc + 2.0 * w
        }
    }
}

fn oracle_per_lane(method: Method, w: f64, h: f64, r: f64) -> f64 {
    let extra = if method == Method::Boustrophedon { 4.0 } else { 3.0 };
    h - 4.0 * r + PI * r + extra * w
}

fn oracle_on_count(method: Method, n: usize) -> usize {
    match method {
        Method::Boustrophedon => n + 1,
        Method::Alternative if n % 2 == 1 => 3 * (n + 1) / 2,
        Method::Alternative => 3 * n / 2 + 1,
    }
}

fn measured(method: Method, spec: FieldSpec) -> (PlannedPath, SprayProgram) {
    let layout = build_layout(spec).unwrap();
    let plan = MethodPlan::build(method, &layout);
    let program = plan.schedule(&layout);
    (plan.path().clone(), program)
}

const TABLE_ODD: &str = "\
W,H,area_ha,N,L_b,NON_b,L_a,NON_a,dL,dNON
12,100,0.7,5,1020,6,982,9,-38,3
12,100,6.2,51,7630,52,7040,78,-590,26
12,500,3.6,5,4220,6,4182,9,-38,3
12,500,31.2,51,29230,52,28640,78,-590,26
36,100,2.2,5,1548,6,1414,9,-134,3
36,100,18.7,51,12574,52,10784,78,-1790,26
36,500,10.8,5,4748,6,4614,9,-134,3
36,500,93.6,51,34174,52,32384,78,-1790,26
";

const TABLE_EVEN: &str = "\
W,H,area_ha,N,L_b,NON_b,L_a,NON_a,dL,dNON
12,100,0.6,4,886,5,742,7,-144,2
12,100,6.1,50,7497,51,6801,76,-696,25
12,500,3.0,4,3686,5,3142,7,-544,2
12,500,30.6,50,28697,51,27601,76,-1096,25
36,100,1.8,4,1318,5,1078,7,-240,2
36,100,18.4,50,12345,51,10449,76,-1896,25
36,500,9.0,4,4118,5,3478,7,-640,2
36,500,91.8,50,33545,51,31249,76,-2296,25
";

/// The sixteen benchmark setups, read back from the literal tables.
fn table_specs() -> Vec<FieldSpec> {
    [TABLE_ODD, TABLE_EVEN]
        .iter()
        .flat_map(|t| t.lines().skip(1))
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            FieldSpec::new(f[0].parse().unwrap(), f[1].parse().unwrap(), f[3].parse().unwrap(), R)
        })
        .collect()
}

#[test]
fn criterion_1_table_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let cli = Cli::parse_from(["spraypath", "tables", "--out", dir.path().to_str().unwrap()]);
    run(&cli).unwrap();
    let elapsed = start.elapsed();

    let mut mismatches = Vec::new();
    for (file, expected) in [("table_odd.csv", TABLE_ODD), ("table_even.csv", TABLE_EVEN)] {
        let got = fs::read_to_string(dir.path().join(file)).unwrap();
        let got: Vec<&str> = got.lines().collect();
        let want: Vec<&str> = expected.lines().collect();
        if got.len() != want.len() {
            mismatches.push(format!("{file}: {} lines, expected {}", got.len(), want.len()));
        }
        for (g, w) in got.iter().zip(&want) {
            if g != w {
                mismatches.push(format!("{file}: got {g}, expected {w}"));
            }
        }
    }
    let ok = mismatches.is_empty() && elapsed < Duration::from_secs(1);
    report(
        1,
        "table reproduction",
        ok,
        &format!("16 rows, {} mismatches, {:.3} s {}", mismatches.len(), elapsed.as_secs_f64(), mismatches.join("; ")),
    );
}

#[test]
fn criterion_2_slope_consistency() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for method in Method::ALL {
        for w in [12.0, 36.0] {
            for h in [100.0, 500.0] {
                for n in [4, 6, 8, 10, 5, 7, 9, 11] {
                    let len = |n| measured(method, FieldSpec::new(w, h, n, R)).0.length();
                    let step = len(n + 2) - len(n);
                    let expected = 2.0 * oracle_per_lane(method, w, h, R);
                    worst = worst.max(((step - expected) / expected).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        2,
        "slope consistency",
        worst <= 1e-3 && elapsed < Duration::from_secs(5),
        &format!("max relative error {worst:.2e}, {:.3} s", elapsed.as_secs_f64()),
    );
}

fn population_std(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

#[test]
fn criterion_3_absolute_length() {
    let mut worst = 0.0f64;
    let mut classes: BTreeMap<(&str, bool), Vec<f64>> = BTreeMap::new();
    let mut published_ok = true;
    for spec in table_specs() {
        for method in Method::ALL {
            let n = spec.lane_count;
            let formula = oracle_length(method, n, spec.working_width, spec.lane_length, R);
            let len = measured(method, spec).0.length();
            worst = worst.max(((len - formula) / formula).abs());
            classes.entry((method.as_str(), n % 2 == 1)).or_default().push(len - formula);

            let (rep, _) = verify_method(spec, method, spec.working_width / 8.0, None).unwrap();
            published_ok &= (rep.residual_m - (len - formula)).abs() < 1e-6
                && rep.parity_class_residuals.len() == 3
                && rep.residual_spread_m < 1e-6;
        }
    }
    let spread = classes.values().map(|r| population_std(r)).fold(0.0, f64::max);
    let residuals: Vec<String> = classes
        .iter()
        .map(|((m, odd), r)| format!("{m}/{}={:+.3}", if *odd { "odd" } else { "even" }, r[0]))
        .collect();
    report(
        3,
        "absolute length",
        worst <= 0.02 && spread < 1e-6 && published_ok,
        &format!(
            "max relative deviation {:.4}%, parity std {spread:.1e} m, residuals [{}], published {published_ok}",
            100.0 * worst,
            residuals.join(", ")
        ),
    );
}

#[test]
fn criterion_4_switch_counts() {
    let mut specs: Vec<FieldSpec> = (2..=12).map(|n| FieldSpec::new(12.0, 100.0, n, R)).collect();
    specs.extend(table_specs());
    let mut bad = Vec::new();
    for spec in &specs {
        let layout = build_layout(*spec).unwrap();
        let b = plan_boustrophedon(*spec).unwrap();
        let none = CoverageGrid::empty(spec.working_width / 8.0);
        let nb = count_on_states(&reactive_schedule(&b.path, &layout, &none));
        let a = plan_alternative(*spec).unwrap();
        let na = count_on_states(&predictive_schedule(&a, &layout));
        let n = spec.lane_count;
        if nb != oracle_on_count(Method::Boustrophedon, n) || na != oracle_on_count(Method::Alternative, n) {
            bad.push(format!("W={} H={} N={n}: {nb}/{na}", spec.working_width, spec.lane_length));
        }
    }
    report(
        4,
        "switch counts",
        bad.is_empty(),
        &format!("{} configurations, mismatches [{}]", specs.len(), bad.join(", ")),
    );
}

#[test]
fn criterion_5_lossless_coverage() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for n in [4, 5] {
        let spec = FieldSpec::new(12.0, 100.0, n, R);
        let layout = build_layout(spec).unwrap();
        for method in Method::ALL {
            let (path, program) = measured(method, spec);
            let fine = coverage_report(&rasterize(&path, &program, 12.0, 0.1).unwrap(), &layout);
            let finer = coverage_report(&rasterize(&path, &program, 12.0, 0.05).unwrap(), &layout);
            let drift = (finer.covered_area - fine.covered_area).abs() / fine.covered_area;
            ok &= fine.coverage_ratio >= 0.995 && fine.overlap_ratio <= 0.01 && drift < 0.005;
            lines.push(format!(
                "{method} N={n}: coverage {:.4} overlap {:.4} drift {:.2e}",
                fine.coverage_ratio, fine.overlap_ratio, drift
            ));
        }
    }
    let elapsed = start.elapsed();
    report(
        5,
        "lossless coverage",
        ok && elapsed < Duration::from_secs(60),
        &format!("{}; {:.2} s", lines.join("; "), elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_6_delta_identities() {
    let mut worst = 0.0f64;
    let mut worst_fit = 0.0f64;
    let mut slope_err = 0.0f64;
    let mut counts_ok = true;
    for w in [12.0, 36.0] {
        for h in [100.0, 500.0] {
            for odd in [true, false] {
                let ns: Vec<usize> = (1..=1000).filter(|n| (n % 2 == 1) == odd).collect();
                let mut ys = Vec::with_capacity(ns.len());
                for &n in &ns {
                    let (dl, dn) = deltas(n, w, h, R);
                    let expected = oracle_length(Method::Alternative, n, w, h, R)
                        - oracle_length(Method::Boustrophedon, n, w, h, R);
                    worst = worst.max((dl - expected).abs());
                    let expected_n = oracle_on_count(Method::Alternative, n) as i64
                        - oracle_on_count(Method::Boustrophedon, n) as i64;
                    counts_ok &= dn == expected_n;
                    ys.push(dl);
                }
                let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
                let mx = xs.iter().sum::<f64>() / xs.len() as f64;
                let my = ys.iter().sum::<f64>() / ys.len() as f64;
                let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
                let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
                let slope = sxy / sxx;
                slope_err = slope_err.max((slope + w).abs());
                for (x, y) in xs.iter().zip(&ys) {
                    worst_fit = worst_fit.max((my + slope * (x - mx) - y).abs());
                }
            }
        }
    }
    report(
        6,
        "delta identities",
        worst <= 1e-9 && worst_fit < 1e-9 && slope_err < 1e-9 && counts_ok,
        &format!("max |dL - oracle| {worst:.1e} m, fit residual {worst_fit:.1e} m, slope error {slope_err:.1e}"),
    );
}

#[test]
fn criterion_7_time_savings() {
    let slow = time_savings(1896.0, 5.0);
    let fast = time_savings(1896.0, 10.0);
    report(
        7,
        "time savings",
        (slow - 22.8).abs() <= 0.05 && (fast - 11.4).abs() <= 0.05,
        &format!("{slow:.3} min at 5 km/h, {fast:.3} min at 10 km/h"),
    );
}

fn check_continuity(path: &PlannedPath) -> Result<(), String> {
    for pair in path.segments().windows(2) {
        let (a, b): (&Segment, &Segment) = (&pair[0], &pair[1]);
        let gap = a.end_pose().position.distance(b.start_pose().position);
        if gap > 1e-6 {
            return Err(format!("gap {gap:.2e} m between segments"));
        }
    }
    Ok(())
}

fn check_disjoint(program: &SprayProgram) -> Result<(), String> {
    let ivs = program.intervals();
    if ivs.iter().any(|iv| iv.s_on >= iv.s_off || iv.s_on < 0.0 || iv.s_off > program.path_length() + 1e-9) {
        return Err("degenerate or out-of-range interval".into());
    }
    if ivs.windows(2).any(|p| p[0].s_off >= p[1].s_on) {
        return Err("overlapping intervals".into());
    }
    Ok(())
}

fn lane_segments(path: &PlannedPath) -> Vec<usize> {
    let mut lanes: Vec<usize> = path
        .annotations()
        .iter()
        .filter(|a| a.role == Role::Lane)
        .map(|a| a.lane.expect("lane segments carry their index"))
        .collect();
    lanes.sort_unstable();
    lanes
}

fn check_alternative(plan: &AlternativePlan, program: &SprayProgram, spec: &FieldSpec) -> Result<(), String> {
    let n = spec.lane_count;
    let path = &plan.path;
    // Turn abstinence.
    for (k, ann) in path.annotations().iter().enumerate() {
        if ann.role == Role::Turn {
            let win = path.window(k);
            let on: f64 = program.intervals().iter().map(|iv| win.overlap(iv.s_on, iv.s_off)).sum();
            if on > 1e-9 {
                return Err(format!("boom on for {on:.2e} m on turn segment {k}"));
            }
        }
    }
    // Each lane is sprayed by exactly one pattern and driven exactly once.
    let mut lanes: Vec<usize> = plan
        .patterns
        .iter()
        .flat_map(|p| p.lane_pair.first.into_iter().chain([p.lane_pair.second]))
        .collect();
    lanes.sort_unstable();
    let all: Vec<usize> = (1..=n).collect();
    if lanes != all || lane_segments(path) != all {
        return Err(format!("lane assignment {lanes:?} is not a bijection onto 1..={n}"));
    }
    if plan.patterns.len() != n.div_ceil(2) {
        return Err(format!("{} patterns for {n} lanes", plan.patterns.len()));
    }
    // Chaining: each pattern starts where the previous ended, one lane pair further on.
    let w = spec.working_width;
    let first_a = plan.patterns[0].stamp(Waypoint::A).unwrap();
    if (first_a - plan.entrance_leg.s_end).abs() > 1e-6 {
        return Err("first pattern does not start at the end of the entrance leg".into());
    }
    let last_m = plan.patterns.last().unwrap().stamp(Waypoint::M).unwrap();
    if (last_m - path.length()).abs() > 1e-6 {
        return Err("last pattern does not end the path".into());
    }
    for p in &plan.patterns {
        let stamps: Vec<f64> = Waypoint::ORDER.iter().filter_map(|&wp| p.stamp(wp)).collect();
        if stamps.windows(2).any(|s| s[1] < s[0] - 1e-9) {
            return Err("waypoint stamps decrease".into());
        }
        let a = path.pose_at(p.stamp(Waypoint::A).unwrap()).unwrap();
        let a2 = path.pose_at(p.stamp(Waypoint::APrime).unwrap()).unwrap();
        if !a.approx_eq(&a2) {
            return Err("A' does not return to A".into());
        }
    }
    for pair in plan.patterns.windows(2) {
        let m = pair[0].stamp(Waypoint::M).unwrap();
        let a = pair[1].stamp(Waypoint::A).unwrap();
        if (m - a).abs() > 1e-6 {
            return Err(format!("pattern ends at {m} but the next starts at {a}"));
        }
        let pa = path.pose_at(pair[0].stamp(Waypoint::A).unwrap()).unwrap();
        let pb = path.pose_at(a).unwrap();
        let step = pa.position.distance(pb.position);
        if (step - 2.0 * w).abs() > 1e-6 || pa.direction().distance(pb.direction()) > 1e-6 {
            return Err(format!("consecutive pattern starts are {step:.6} m apart"));
        }
    }
    Ok(())
}

fn check_invariants(spec: FieldSpec) -> Result<(), String> {
    let layout = build_layout(spec).map_err(|e| e.to_string())?;
    let n = spec.lane_count;

    let b = plan_boustrophedon(spec).map_err(|e| e.to_string())?;
    check_continuity(&b.path)?;
    let none = CoverageGrid::empty(spec.working_width / 8.0);
    let reactive = reactive_schedule(&b.path, &layout, &none);
    check_disjoint(&reactive)?;
    let mut lanes: Vec<usize> = b.lane_windows.iter().map(|lw| lw.lane).collect();
    lanes.sort_unstable();
    let all: Vec<usize> = (1..=n).collect();
    if lanes != all || lane_segments(&b.path) != all {
        return Err(format!("boustrophedon lanes {lanes:?} are not a bijection onto 1..={n}"));
    }

    let a = plan_alternative(spec).map_err(|e| e.to_string())?;
    check_continuity(&a.path)?;
    let predictive = predictive_schedule(&a, &layout);
    check_disjoint(&predictive)?;
    check_alternative(&a, &predictive, &spec)
}

fn field_specs() -> impl Strategy<Value = FieldSpec> {
    (2.0f64..40.0, 0.05f64..=1.0, 2usize..=20, 0.0f64..1.0, 0usize..4).prop_map(|(w, rf, n, hf, e)| {
        let r = (w / 2.0 * rf).max(0.5).min(w / 2.0);
        let h_min = (4.0 * r).max(w) + 1.0;
        let h = h_min + hf * (300.0 - h_min).max(1.0);
        FieldSpec::new(w, h, n, r).with_entrance(Entrance::ALL[e])
    })
}

#[test]
fn criterion_8_structural_invariants() {
    let cases = 256;
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(&field_specs(), |spec| {
        spec.validate().map_err(|e| TestCaseError::reject(e.to_string()))?;
        check_invariants(spec).map_err(|e| TestCaseError::fail(format!("{spec:?}: {e}")))
    });
    let detail = match &result {
        Ok(()) => format!("{cases} random field specs"),
        Err(e) => e.to_string(),
    };
    report(8, "structural invariants", result.is_ok(), &detail);
}
