use std::fs;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::analytics::Method;
use crate::field::{Entrance, FieldSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Boustrophedon,
    Alternative,
    #[default]
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Boustrophedon => vec![Method::Boustrophedon],
            MethodChoice::Alternative => vec![Method::Alternative],
            MethodChoice::Both => Method::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Svg,
    Geojson,
    Pgm,
}

fn default_cell() -> f64 {
    0.25
}

fn default_outputs() -> Vec<OutputFormat> {
    vec![OutputFormat::Json, OutputFormat::Svg, OutputFormat::Geojson]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    working_width_m: f64,
    lane_length_m: f64,
    lane_count: usize,
    turn_radius_m: f64,
    #[serde(default)]
    entrance: Entrance,
    #[serde(default)]
    method: MethodChoice,
    #[serde(default = "default_cell")]
    raster_cell_m: f64,
    #[serde(default = "default_outputs")]
    outputs: Vec<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub field: FieldSpec,
    pub method: MethodChoice,
    pub raster_cell: f64,
    pub outputs: Vec<OutputFormat>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        let field = FieldSpec::new(
            raw.working_width_m,
            raw.lane_length_m,
            raw.lane_count,
            raw.turn_radius_m,
        )
        .with_entrance(raw.entrance);
        field.validate()?;
        if !(raw.raster_cell_m.is_finite() && raw.raster_cell_m > 0.0) {
            return Err(CliError::Usage(format!(
                "config: raster_cell_m must be positive, got {}",
                raw.raster_cell_m
            )));
        }
        Ok(Self {
            field,
            method: raw.method,
            raster_cell: raw.raster_cell_m,
            outputs: raw.outputs,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.outputs.contains(&format)
    }
}
