//! Command-line front end.

mod config;
mod export;
mod verify;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{MethodChoice, OutputFormat, RunConfig};
pub use export::{geojson_document, svg_document};
pub use verify::{verify_method, Check, VerifyReport};

use crate::alternative::{plan_alternative_on, AlternativePlan};
use crate::analytics::{build_comparison_table, table_configs, ComparisonRow, Method};
use crate::boustrophedon::{plan_boustrophedon_on, BoustrophedonPlan};
use crate::coverage::CoverageGrid;
use crate::field::{build_layout, FieldSpec, Layout};
use crate::path::PlannedPath;
use crate::switching::{count_on_states, predictive_schedule, reactive_schedule, SprayProgram};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const HEADLAND_CORNER_MODEL: &str = "arc";

#[derive(Debug, Parser)]
#[command(name = "spraypath", version, about = "Plan, schedule and verify spray coverage paths")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Field configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the configured method.
    #[arg(long, global = true, value_enum, value_name = "M")]
    pub method: Option<MethodChoice>,
    /// Raster cell size for verification, in meters.
    #[arg(long, global = true, value_name = "METERS")]
    pub cell: Option<f64>,
    /// Exit with status 1 when a verification check fails.
    #[arg(long, global = true)]
    pub strict: bool,
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Schedule document to verify or export instead of computing one.
    #[arg(long, global = true, value_name = "PATH")]
    pub schedule: Option<PathBuf>,
    /// Plan document to export instead of planning from the config.
    #[arg(long, global = true, value_name = "PATH")]
    pub plan: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write plan documents.
    Plan,
    /// Write spray schedule documents.
    Schedule,
    /// Rasterize coverage and reconcile lengths and switch counts with the closed forms.
    Verify,
    /// Write the benchmark comparison tables.
    Tables,
    /// Write SVG and GeoJSON renderings.
    Export,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Spec(#[from] crate::Error),
    #[error("{0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MethodPlan {
    Boustrophedon(BoustrophedonPlan),
    Alternative(AlternativePlan),
}

impl MethodPlan {
    pub fn build(method: Method, layout: &Layout) -> Self {
        match method {
            Method::Boustrophedon => MethodPlan::Boustrophedon(plan_boustrophedon_on(layout)),
            Method::Alternative => MethodPlan::Alternative(plan_alternative_on(layout)),
        }
    }

    pub fn method(&self) -> Method {
        match self {
            MethodPlan::Boustrophedon(_) => Method::Boustrophedon,
            MethodPlan::Alternative(_) => Method::Alternative,
        }
    }

    pub fn path(&self) -> &PlannedPath {
        match self {
            MethodPlan::Boustrophedon(p) => &p.path,
            MethodPlan::Alternative(p) => &p.path,
        }
    }

    /// Reactive switching for the baseline, predictive for the pattern plan.
    pub fn schedule(&self, layout: &Layout) -> SprayProgram {
        match self {
            MethodPlan::Boustrophedon(p) => {
                reactive_schedule(&p.path, layout, &CoverageGrid::empty(layout.half_width() / 4.0))
            }
            MethodPlan::Alternative(p) => predictive_schedule(p, layout),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub version: String,
    pub headland_corner_model: String,
    pub field: FieldSpec,
    pub path_length_m: f64,
    #[serde(flatten)]
    pub plan: MethodPlan,
}

impl PlanDocument {
    pub fn new(field: FieldSpec, plan: MethodPlan) -> Self {
        Self {
            version: VERSION.to_string(),
            headland_corner_model: HEADLAND_CORNER_MODEL.to_string(),
            field,
            path_length_m: plan.path().length(),
            plan,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub version: String,
    pub method: Method,
    pub on_count: usize,
    pub program: SprayProgram,
}

impl ScheduleDocument {
    pub fn new(method: Method, program: SprayProgram) -> Self {
        Self {
            version: VERSION.to_string(),
            method,
            on_count: count_on_states(&program),
            program,
        }
    }
}

/// Runs one invocation; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let out = &cli.out;
    match cli.command {
        Command::Tables => cmd_tables(out),
        Command::Plan => cmd_plan(&load_config(cli)?, out),
        Command::Schedule => cmd_schedule(&load_config(cli)?, out),
        Command::Verify => cmd_verify(&load_config(cli)?, out, cli.strict, cli.schedule.as_deref()),
        Command::Export => match &cli.plan {
            Some(plan) => export::cmd_export_file(plan, cli.schedule.as_deref(), out),
            None => export::cmd_export(&load_config(cli)?, out, cli.schedule.as_deref()),
        },
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("--config PATH is required for this command".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(method) = cli.method {
        cfg.method = method;
    }
    if let Some(cell) = cli.cell {
        if !(cell.is_finite() && cell > 0.0) {
            return Err(CliError::Usage(format!("--cell must be positive, got {cell}")));
        }
        cfg.raster_cell = cell;
    }
    Ok(cfg)
}

/// `stem.ext` for a single method, `stem_method.ext` when several are written.
fn output_name(stem: &str, method: Method, several: bool, ext: &str) -> String {
    if several {
        format!("{stem}_{method}.{ext}")
    } else {
        format!("{stem}.{ext}")
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid {what} {}: {e}", path.display())))
}

fn cmd_plan(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let layout = build_layout(cfg.field)?;
    let methods = cfg.method.methods();
    let mut written = Vec::new();
    for &method in &methods {
        let doc = PlanDocument::new(cfg.field, MethodPlan::build(method, &layout));
        let file = out.join(output_name("plan", method, methods.len() > 1, "json"));
        write_json(&file, &doc)?;
        println!("{method}: path length {:.2} m -> {}", doc.path_length_m, file.display());
        written.push(file);
    }
    Ok(written)
}

fn cmd_schedule(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let layout = build_layout(cfg.field)?;
    let methods = cfg.method.methods();
    let mut written = Vec::new();
    for &method in &methods {
        let program = MethodPlan::build(method, &layout).schedule(&layout);
        let doc = ScheduleDocument::new(method, program);
        let file = out.join(output_name("schedule", method, methods.len() > 1, "json"));
        write_json(&file, &doc)?;
        println!("{method}: {} ON states -> {}", doc.on_count, file.display());
        written.push(file);
    }
    Ok(written)
}

fn cmd_verify(
    cfg: &RunConfig,
    out: &Path,
    strict: bool,
    schedule: Option<&Path>,
) -> Result<Vec<PathBuf>, CliError> {
    let methods = cfg.method.methods();
    let supplied: Option<ScheduleDocument> = match schedule {
        Some(path) if methods.len() > 1 => {
            return Err(CliError::Usage(format!(
                "--schedule {} needs a single --method",
                path.display()
            )))
        }
        Some(path) => Some(read_json(path, "schedule")?),
        None => None,
    };
    let mut written = Vec::new();
    let mut failures = Vec::new();
    for &method in &methods {
        let program = supplied.as_ref().map(|doc| doc.program.clone());
        let (report, grid) = verify_method(cfg.field, method, cfg.raster_cell, program)?;
        let several = methods.len() > 1;
        let file = out.join(output_name("verify", method, several, "json"));
        write_json(&file, &report)?;
        written.push(file.clone());
        if cfg.wants(OutputFormat::Pgm) {
            let pgm = out.join(output_name("coverage", method, several, "pgm"));
            let mut bytes = Vec::new();
            crate::coverage::write_pgm(&grid, &mut bytes).expect("in-memory write");
            write_atomic(&pgm, &bytes)?;
            written.push(pgm);
        }
        println!("{}", report.summary());
        failures.extend(
            report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{method}: {} ({})", c.name, c.detail)),
        );
    }
    if strict && !failures.is_empty() {
        return Err(CliError::Verification(failures.join("; ")));
    }
    Ok(written)
}

fn format_dimension(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

pub fn table_csv(rows: &[ComparisonRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["W", "H", "area_ha", "N", "L_b", "NON_b", "L_a", "NON_a", "dL", "dNON"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            format_dimension(r.w),
            format_dimension(r.h),
            format!("{:.1}", r.area_ha),
            r.n.to_string(),
            r.l_boustrophedon.to_string(),
            r.n_on_boustrophedon.to_string(),
            r.l_alternative.to_string(),
            r.n_on_alternative.to_string(),
            r.delta_l.to_string(),
            r.delta_n_on.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

#[derive(Debug, Serialize)]
struct TablesMeta {
    version: &'static str,
    turn_radius_m: f64,
    length_rounding: &'static str,
    area_column: &'static str,
    area_is_derived_fit: bool,
}

fn cmd_tables(out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for (odd, name) in [(true, "table_odd.csv"), (false, "table_even.csv")] {
        let rows = build_comparison_table(&table_configs(odd));
        let file = out.join(name);
        write_atomic(&file, table_csv(&rows).as_bytes())?;
        written.push(file);
    }
    let meta = TablesMeta {
        version: VERSION,
        turn_radius_m: crate::analytics::TABLE_TURN_RADIUS,
        length_rounding: "nearest meter, half away from zero",
        area_column: "(N+1)*W*H/10000 rounded to 0.1 ha",
        area_is_derived_fit: true,
    };
    let file = out.join("tables_meta.json");
    write_json(&file, &meta)?;
    written.push(file);
    for f in &written {
        println!("wrote {}", f.display());
    }
    Ok(written)
}
