//! Report model and rendering. Output is byte-stable run to run unless
//! the timing columns are requested.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use polyeis_core::verify::CheckResult;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Serialize)]
pub struct CheckRow {
    pub name: String,
    pub computed: f64,
    pub oracle: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub truncation: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl CheckRow {
    pub fn from_check(c: &CheckResult) -> Self {
        CheckRow {
            name: c.name.clone(),
            computed: c.computed,
            oracle: c.oracle,
            residual: c.residual,
            tolerance: c.tolerance,
            truncation: c.truncation,
            passed: c.passed,
            note: None,
            wall_ms: None,
        }
    }
}

#[derive(Serialize)]
pub struct CheckReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<BTreeMap<String, String>>,
    pub rows: Vec<CheckRow>,
    pub all_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms_total: Option<f64>,
}

#[derive(Serialize)]
pub struct CuspRow {
    pub index: usize,
    pub representative: String,
    pub orbit_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ideal_basis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ideal_norm: Option<String>,
}

#[derive(Serialize)]
pub struct FieldReport {
    pub command: String,
    pub name: String,
    pub degree: usize,
    pub discriminant: i64,
    pub generator_relation: String,
    pub fundamental_unit: String,
    pub totally_positive_unit: String,
    pub different_basis: String,
    pub dual_basis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ray_unit_generators: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ray_unit_power: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level_group_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cusps: Option<Vec<CuspRow>>,
}

pub enum Payload {
    Checks(CheckReport),
    Field(FieldReport),
}

fn fe(v: f64, precision: usize) -> String {
    format!("{:.*e}", precision, v)
}

fn header_lines(out: &mut String, r: &CheckReport) {
    let _ = writeln!(out, "command: {}", r.command);
    if let Some(f) = &r.field {
        let _ = writeln!(out, "field: {}", f);
    }
    if let Some(l) = r.level {
        let _ = writeln!(out, "level: {}", l);
    }
    if let Some(s) = r.seed {
        let _ = writeln!(out, "seed: {}", s);
    }
    if let Some(p) = &r.params {
        for (k, v) in p {
            let _ = writeln!(out, "{}: {}", k, v);
        }
    }
}

fn checks_text(r: &CheckReport, precision: usize) -> String {
    let mut out = String::new();
    header_lines(&mut out, r);
    out.push('\n');
    let w = precision + 8;
    let name_w = r.rows.iter().map(|x| x.name.len()).max().unwrap_or(4).max(4);
    let timed = r.rows.iter().any(|x| x.wall_ms.is_some());
    let _ = write!(
        out,
        "{:<name_w$}  {:>w$}  {:>w$}  {:>12}  {:>12}  status",
        "name", "computed", "oracle", "residual", "tolerance"
    );
    if timed {
        let _ = write!(out, "  {:>10}", "wall-ms");
    }
    out.push('\n');
    for row in &r.rows {
        let status = if row.passed { "pass" } else { "FAIL" };
        let _ = write!(
            out,
            "{:<name_w$}  {:>w$}  {:>w$}  {:>12}  {:>12}  {}",
            row.name,
            fe(row.computed, precision),
            fe(row.oracle, precision),
            fe(row.residual, 3),
            fe(row.tolerance, 1),
            status
        );
        if let Some(ms) = row.wall_ms {
            let _ = write!(out, "  {:>10.2}", ms);
        }
        if let Some(n) = &row.note {
            let _ = write!(out, "  ({})", n);
        }
        out.push('\n');
    }
    out.push('\n');
    let failed = r.rows.iter().filter(|x| !x.passed).count();
    if failed == 0 {
        let _ = writeln!(out, "all {} checks passed", r.rows.len());
    } else {
        let _ = writeln!(out, "{} of {} checks FAILED", failed, r.rows.len());
    }
    if let Some(ms) = r.wall_ms_total {
        let _ = writeln!(out, "total wall-ms: {:.2}", ms);
    }
    out
}

fn checks_csv(r: &CheckReport, precision: usize) -> String {
    let mut out = String::new();
    let timed = r.rows.iter().any(|x| x.wall_ms.is_some());
    out.push_str("name,computed,oracle,residual,tolerance,truncation,passed,note");
    if timed {
        out.push_str(",wall_ms");
    }
    out.push('\n');
    for row in &r.rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.name,
            fe(row.computed, precision),
            fe(row.oracle, precision),
            fe(row.residual, 6),
            fe(row.tolerance, 1),
            row.truncation,
            row.passed,
            row.note.as_deref().unwrap_or("")
        );
        if timed {
            let _ = write!(out, ",{:.2}", row.wall_ms.unwrap_or(0.0));
        }
        out.push('\n');
    }
    out
}

fn field_text(r: &FieldReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command: {}", r.command);
    let _ = writeln!(out, "name: {}", r.name);
    let _ = writeln!(out, "degree: {}", r.degree);
    let _ = writeln!(out, "discriminant: {}", r.discriminant);
    let _ = writeln!(out, "generator-relation: {}", r.generator_relation);
    let _ = writeln!(out, "fundamental-unit: {}", r.fundamental_unit);
    let _ = writeln!(out, "totally-positive-unit: {}", r.totally_positive_unit);
    let _ = writeln!(out, "different-basis: {}", r.different_basis);
    let _ = writeln!(out, "dual-basis: {}", r.dual_basis);
    if let Some(l) = r.level {
        let _ = writeln!(out, "level: {}", l);
    }
    if let Some(g) = &r.ray_unit_generators {
        let gens = if g.is_empty() { String::from("none") } else { g.join(", ") };
        let _ = writeln!(out, "ray-unit-generators: {}", gens);
    }
    if let Some(p) = r.ray_unit_power {
        let _ = writeln!(out, "ray-unit-power: {}", p);
    }
    if let Some(o) = r.level_group_order {
        let _ = writeln!(out, "level-group-order: {}", o);
    }
    if let Some(cusps) = &r.cusps {
        out.push('\n');
        let rep_w = cusps.iter().map(|c| c.representative.len()).max().unwrap_or(14).max(14);
        let _ = writeln!(
            out,
            "{:<5}  {:<rep_w$}  {:>5}  {:<12}  {}",
            "cusp", "representative", "orbit", "ideal-basis", "ideal-norm"
        );
        for c in cusps {
            let _ = writeln!(
                out,
                "{:<5}  {:<rep_w$}  {:>5}  {:<12}  {}",
                c.index,
                c.representative,
                c.orbit_size,
                c.ideal_basis.as_deref().unwrap_or("-"),
                c.ideal_norm.as_deref().unwrap_or("-")
            );
        }
    }
    out
}

fn field_csv(r: &FieldReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# name: {}", r.name);
    let _ = writeln!(out, "# degree: {}", r.degree);
    let _ = writeln!(out, "# discriminant: {}", r.discriminant);
    let _ = writeln!(out, "# generator-relation: {}", r.generator_relation);
    if let Some(o) = r.level_group_order {
        let _ = writeln!(out, "# level-group-order: {}", o);
    }
    out.push_str("index,representative,orbit_size,ideal_basis,ideal_norm\n");
    if let Some(cusps) = &r.cusps {
        for c in cusps {
            let _ = writeln!(
                out,
                "{},\"{}\",{},\"{}\",{}",
                c.index,
                c.representative,
                c.orbit_size,
                c.ideal_basis.as_deref().unwrap_or(""),
                c.ideal_norm.as_deref().unwrap_or("")
            );
        }
    }
    out
}

pub fn render(p: &Payload, format: Format, precision: usize) -> String {
    match (p, format) {
        (Payload::Checks(r), Format::Text) => checks_text(r, precision),
        (Payload::Checks(r), Format::Csv) => checks_csv(r, precision),
        (Payload::Checks(r), Format::Json) => {
            let mut s = serde_json::to_string_pretty(r).expect("serialize");
            s.push('\n');
            s
        }
        (Payload::Field(r), Format::Text) => field_text(r),
        (Payload::Field(r), Format::Csv) => field_csv(r),
        (Payload::Field(r), Format::Json) => {
            let mut s = serde_json::to_string_pretty(r).expect("serialize");
            s.push('\n');
            s
        }
    }
}
