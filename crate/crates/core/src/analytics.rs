//! Closed-form path lengths and switch counts for both methods, and the
//! comparison tables built from them.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Boustrophedon,
    Alternative,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Boustrophedon, Method::Alternative];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Boustrophedon => "boustrophedon",
            Method::Alternative => "alternative",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Length of a quarter circle of radius `r`.
fn quarter(r: f64) -> f64 {
    2.0 * r * PI / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c21_tilde: f64,
    pub c43_tilde: f64,
}

impl AnalyticConstants {
    pub fn new(w: f64, h: f64, r: f64) -> Self {
        let q = quarter(r);
        let c1 = 3.0 * h - 14.0 * r + 6.0 * q + 2.0 * w;
        let c2 = 3.0 * h - 12.0 * r + 6.0 * q + 3.0 * w;
        let c3 = 3.0 * h - 12.0 * r + 6.0 * q + 2.0 * w;
        let c4 = 2.0 * h - 8.0 * r + 4.0 * q + 2.0 * w;
        Self {
            c1,
            c2,
            c3,
            c4,
            c21_tilde: c2 - c1,
            c43_tilde: c4 - c3,
        }
    }
}

/// Length added by each lane.
pub fn per_lane_length(method: Method, w: f64, h: f64, r: f64) -> f64 {
    let base = h - 4.0 * r + 2.0 * quarter(r);
    match method {
        Method::Boustrophedon => base + 4.0 * w,
        Method::Alternative => base + 3.0 * w,
    }
}

/// Offset constant for `method` at the parity of `n`.
pub fn offset_constant(method: Method, n: usize, w: f64, h: f64, r: f64) -> f64 {
    let c = AnalyticConstants::new(w, h, r);
    match (method, n % 2 == 1) {
        (Method::Boustrophedon, true) => c.c1,
        (Method::Alternative, true) => c.c2,
        (Method::Boustrophedon, false) => c.c3,
        (Method::Alternative, false) => c.c4,
    }
}

pub fn pathlength_formula(method: Method, n: usize, w: f64, h: f64, r: f64) -> f64 {
    n as f64 * per_lane_length(method, w, h, r) + offset_constant(method, n, w, h, r)
}

pub fn on_count_formula(method: Method, n: usize) -> usize {
    match method {
        Method::Boustrophedon => n + 1,
        Method::Alternative if n % 2 == 1 => 3 * (n + 1) / 2,
        Method::Alternative => 3 * n / 2 + 1,
    }
}

/// Alternative minus Boustrophedon: `(path length, ON count)`.
pub fn deltas(n: usize, w: f64, h: f64, r: f64) -> (f64, i64) {
    let c = AnalyticConstants::new(w, h, r);
    let nf = n as f64;
    if n % 2 == 1 {
        (-nf * w + c.c21_tilde, (n as i64 + 1) / 2)
    } else {
        (-nf * w + c.c43_tilde, n as i64 / 2)
    }
}

/// Relative path length change of the alternative method in percent.
pub fn percent_savings(n: usize, w: f64, h: f64, r: f64) -> f64 {
    100.0 * deltas(n, w, h, r).0 / pathlength_formula(Method::Boustrophedon, n, w, h, r)
}

/// Field area in hectares, rounded to 0.1 ha.
pub fn area_ha(n: usize, w: f64, h: f64) -> f64 {
    round_to((n as f64 + 1.0) * w * h / 10_000.0, 1)
}

/// Minutes saved by driving `|delta_l|` meters less at `speed_kmh`.
pub fn time_savings(delta_l: f64, speed_kmh: f64) -> f64 {
    delta_l.abs() / (speed_kmh * 1000.0 / 60.0)
}

/// Rounds half away from zero.
pub fn round_half_away(x: f64) -> i64 {
    x.round() as i64
}

/// Rounds half away from zero to `digits` decimals.
pub fn round_to(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    (x * scale).round() / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub w: f64,
    pub h: f64,
    pub n: usize,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub area_ha: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(skip)]
    pub r: f64,
    #[serde(rename = "L_b")]
    pub l_boustrophedon: i64,
    #[serde(rename = "NON_b")]
    pub n_on_boustrophedon: usize,
    #[serde(rename = "L_a")]
    pub l_alternative: i64,
    #[serde(rename = "NON_a")]
    pub n_on_alternative: usize,
    #[serde(rename = "dL")]
    pub delta_l: i64,
    #[serde(rename = "dNON")]
    pub delta_n_on: i64,
}

pub fn comparison_row(spec: TableSpec) -> ComparisonRow {
    let TableSpec { w, h, n, r } = spec;
    let (delta_l, delta_n_on) = deltas(n, w, h, r);
    ComparisonRow {
        w,
        h,
        area_ha: area_ha(n, w, h),
        n,
        r,
        l_boustrophedon: round_half_away(pathlength_formula(Method::Boustrophedon, n, w, h, r)),
        n_on_boustrophedon: on_count_formula(Method::Boustrophedon, n),
        l_alternative: round_half_away(pathlength_formula(Method::Alternative, n, w, h, r)),
        n_on_alternative: on_count_formula(Method::Alternative, n),
        delta_l: round_half_away(delta_l),
        delta_n_on,
    }
}

pub fn build_comparison_table(specs: &[TableSpec]) -> Vec<ComparisonRow> {
    specs.iter().copied().map(comparison_row).collect()
}

pub const TABLE_TURN_RADIUS: f64 = 5.0;

/// The eight benchmark setups for one parity, ordered by W, then H, then N.
pub fn table_configs(odd: bool) -> Vec<TableSpec> {
    let lanes = if odd { [5, 51] } else { [4, 50] };
    let mut out = Vec::with_capacity(8);
    for w in [12.0, 36.0] {
        for h in [100.0, 500.0] {
            for n in lanes {
                out.push(TableSpec {
                    w,
                    h,
                    n,
                    r: TABLE_TURN_RADIUS,
                });
            }
        }
    }
    out
}
