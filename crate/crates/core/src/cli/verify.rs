use serde::{Deserialize, Serialize};

use super::{CliError, MethodPlan, HEADLAND_CORNER_MODEL, VERSION};
use crate::analytics::{on_count_formula, pathlength_formula, Method};
use crate::coverage::{coverage_report, rasterize, CoverageGrid, CoverageReport};
use crate::field::{build_layout, FieldSpec};
use crate::switching::{count_on_states, SprayProgram};

pub const LENGTH_TOLERANCE: f64 = 0.02;
pub const MIN_COVERAGE_RATIO: f64 = 0.995;
pub const MAX_OVERLAP_RATIO: f64 = 0.01;
pub const MAX_RESIDUAL_SPREAD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityResidual {
    pub lane_count: usize,
    pub residual_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub version: String,
    pub method: Method,
    pub headland_corner_model: String,
    pub field: FieldSpec,
    pub path_length_measured_m: f64,
    pub path_length_formula_m: f64,
    pub residual_m: f64,
    /// Residuals at N, N+2 and N+4 for the same field dimensions.
    pub parity_class_residuals: Vec<ParityResidual>,
    pub residual_spread_m: f64,
    pub on_count_measured: usize,
    pub on_count_formula: usize,
    pub coverage: CoverageReport,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn summary(&self) -> String {
        format!(
            "{} N={}: L {:.2} m (formula {:.2}, residual {:+.2}), N_ON {} (formula {}), coverage {:.2}%, overlap {:.2}%: {}",
            self.method,
            self.field.lane_count,
            self.path_length_measured_m,
            self.path_length_formula_m,
            self.residual_m,
            self.on_count_measured,
            self.on_count_formula,
            100.0 * self.coverage.coverage_ratio,
            100.0 * self.coverage.overlap_ratio,
            if self.passed { "PASS" } else { "FAIL" },
        )
    }
}

fn residual(field: FieldSpec, method: Method) -> Result<f64, CliError> {
    let layout = build_layout(field)?;
    let measured = MethodPlan::build(method, &layout).path().length();
    let s = &layout.spec;
    Ok(measured - pathlength_formula(method, s.lane_count, s.working_width, s.lane_length, s.turn_radius))
}

/// Plans, schedules (unless `program` is supplied), rasterizes and reconciles one method.
pub fn verify_method(
    field: FieldSpec,
    method: Method,
    cell: f64,
    program: Option<SprayProgram>,
) -> Result<(VerifyReport, CoverageGrid), CliError> {
    let layout = build_layout(field)?;
    let plan = MethodPlan::build(method, &layout);
    let path = plan.path();
    let mut checks = Vec::new();
    let program = match program {
        Some(p) => {
            let matches = (p.path_length() - path.length()).abs() <= 1e-6;
            checks.push(Check::new(
                "schedule_matches_plan",
                matches,
                format!("schedule length {:.6} m, plan length {:.6} m", p.path_length(), path.length()),
            ));
            p
        }
        None => plan.schedule(&layout),
    };
    let grid = rasterize(path, &program, field.working_width, cell)?;
    let coverage = coverage_report(&grid, &layout);

    let (w, h, n, r) = (field.working_width, field.lane_length, field.lane_count, field.turn_radius);
    let measured = path.length();
    let formula = pathlength_formula(method, n, w, h, r);
    let parity_class_residuals = [n, n + 2, n + 4]
        .into_iter()
        .map(|lanes| {
            Ok(ParityResidual {
                lane_count: lanes,
                residual_m: residual(FieldSpec { lane_count: lanes, ..field }, method)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mean = parity_class_residuals.iter().map(|p| p.residual_m).sum::<f64>() / 3.0;
    let residual_spread_m = (parity_class_residuals
        .iter()
        .map(|p| (p.residual_m - mean).powi(2))
        .sum::<f64>()
        / 3.0)
        .sqrt();
    let on_count_measured = count_on_states(&program);
    let on_count = on_count_formula(method, n);

    let rel = (measured - formula).abs() / formula;
    checks.push(Check::new(
        "path_length_within_2_percent",
        rel <= LENGTH_TOLERANCE,
        format!("relative deviation {:.4}%", 100.0 * rel),
    ));
    checks.push(Check::new(
        "residual_parity_stable",
        residual_spread_m < MAX_RESIDUAL_SPREAD,
        format!("standard deviation {residual_spread_m:.3e} m"),
    ));
    checks.push(Check::new(
        "on_count_matches_formula",
        on_count_measured == on_count,
        format!("measured {on_count_measured}, formula {on_count}"),
    ));
    checks.push(Check::new(
        "coverage_ratio",
        coverage.coverage_ratio >= MIN_COVERAGE_RATIO,
        format!("{:.5} (minimum {MIN_COVERAGE_RATIO})", coverage.coverage_ratio),
    ));
    checks.push(Check::new(
        "overlap_ratio",
        coverage.overlap_ratio <= MAX_OVERLAP_RATIO,
        format!("{:.5} (maximum {MAX_OVERLAP_RATIO})", coverage.overlap_ratio),
    ));
    let passed = checks.iter().all(|c| c.passed);

    let report = VerifyReport {
        version: VERSION.to_string(),
        method,
        headland_corner_model: HEADLAND_CORNER_MODEL.to_string(),
        field,
        path_length_measured_m: measured,
        path_length_formula_m: formula,
        residual_m: measured - formula,
        parity_class_residuals,
        residual_spread_m,
        on_count_measured,
        on_count_formula: on_count,
        coverage,
        checks,
        passed,
    };
    Ok((report, grid))
}
