//! Text exports: feature tables (CSV / JSONL), metadata sidecars, tangent
//! fields and clearance profiles.
//!
//! Numbers are written with a fixed number of decimals, `.` as the decimal
//! separator and `\n` line endings, independent of locale. Negative zero is
//! written as zero so that equal values always print identically.

use std::io::{self, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::features::FeatureSet;
use crate::mapping::FieldSample;
use crate::rotmath::UnitVec3;

pub const DEFAULT_PRECISION: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown format {other:?} (expected csv or jsonl)")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExportOptions {
    pub precision: usize,
    /// Include per-joint velocity columns.
    pub velocities: bool,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            precision: DEFAULT_PRECISION,
            velocities: true,
        }
    }
}

pub fn fmt_num(v: f64, precision: usize) -> String {
    let s = format!("{v:.precision$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn csv_field(name: &str) -> String {
    if name.contains([',', '"', '\n']) {
        format!("\"{}\"", name.replace('"', "\"\""))
    } else {
        name.to_string()
    }
}

/// Column names in export order.
pub fn feature_columns(set: &FeatureSet, opts: &ExportOptions) -> Vec<String> {
    let mut cols: Vec<String> = [
        "scheme", "frame", "time", "root_h", "vpx", "vpz", "yaw_rate", "g0_w", "g0_x", "g0_y", "g0_z",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for j in &set.joint_names {
        for s in ["px", "py", "pz"] {
            cols.push(format!("{j}_{s}"));
        }
        if opts.velocities {
            for s in ["vx", "vy", "vz"] {
                cols.push(format!("{j}_{s}"));
            }
        }
    }
    cols.push("sing_flag".into());
    cols
}

enum Cell {
    Text(String),
    Int(usize),
    Num(f64),
    Missing,
    Flag(bool),
}

fn frame_cells(set: &FeatureSet, opts: &ExportOptions) -> Vec<Vec<Cell>> {
    let tag = set.scheme.tag().to_string();
    set.frames
        .iter()
        .map(|f| {
            let mut c = vec![
                Cell::Text(tag.clone()),
                Cell::Int(f.frame),
                Cell::Num(f.time),
                Cell::Num(f.root_height),
                Cell::Num(f.root_planar_velocity[0]),
                Cell::Num(f.root_planar_velocity[1]),
                f.yaw_rate.map_or(Cell::Missing, Cell::Num),
            ];
            c.extend(f.g0.to_array().map(Cell::Num));
            for (p, v) in f.joint_positions.iter().zip(&f.joint_velocities) {
                c.extend(p.to_array().map(Cell::Num));
                if opts.velocities {
                    c.extend(v.to_array().map(Cell::Num));
                }
            }
            c.push(Cell::Flag(f.singular));
            c
        })
        .collect()
}

pub fn write_features<W: Write>(
    out: &mut W,
    set: &FeatureSet,
    format: Format,
    opts: &ExportOptions,
) -> io::Result<()> {
    let cols = feature_columns(set, opts);
    let p = opts.precision;
    match format {
        Format::Csv => {
            let header: Vec<String> = cols.iter().map(|c| csv_field(c)).collect();
            writeln!(out, "{}", header.join(","))?;
            for row in frame_cells(set, opts) {
                let cells: Vec<String> = row
                    .into_iter()
                    .map(|c| match c {
                        Cell::Text(s) => csv_field(&s),
                        Cell::Int(i) => i.to_string(),
                        Cell::Num(v) => fmt_num(v, p),
                        Cell::Missing => String::new(),
                        Cell::Flag(b) => u8::from(b).to_string(),
                    })
                    .collect();
                out.write_all(cells.join(",").as_bytes())?;
                out.write_all(b"\n")?;
            }
        }
        Format::Jsonl => {
            let keys: Vec<String> = cols
                .iter()
                .map(|c| serde_json::to_string(c).expect("string keys serialize"))
                .collect();
            for row in frame_cells(set, opts) {
                let fields: Vec<String> = keys
                    .iter()
                    .zip(row)
                    .map(|(k, c)| {
                        let v = match c {
                            Cell::Text(s) => serde_json::to_string(&s).expect("string serializes"),
                            Cell::Int(i) => i.to_string(),
                            Cell::Num(v) if v.is_finite() => fmt_num(v, p),
                            Cell::Num(_) | Cell::Missing => "null".to_string(),
                            Cell::Flag(b) => b.to_string(),
                        };
                        format!("{k}:{v}")
                    })
                    .collect();
                writeln!(out, "{{{}}}", fields.join(","))?;
            }
        }
    }
    Ok(())
}

/// Sidecar describing how a feature file was produced.
#[derive(Clone, Debug, Serialize)]
pub struct FeatureMetadata {
    pub source: String,
    pub scheme: String,
    pub motion_direction: Option<[f64; 3]>,
    pub direction_source: Option<String>,
    pub clearance: Option<f64>,
    pub clearance_deg: Option<f64>,
    pub samples: Option<usize>,
    pub epsilon_sing: Option<f64>,
    pub unit_scale: f64,
    pub frame_rate: f64,
    pub frame_time: f64,
    pub stride: usize,
    pub frames: usize,
    pub singular_frames: usize,
    pub format: Format,
    pub precision: usize,
    pub columns: Vec<String>,
}

/// Writes singular-point markers, tangent-field records and orbit-trajectory
/// records, in that order.
///
/// Columns: `kind,index,qx,qy,qz,tx,ty,tz,singular`. Marker rows
/// (`kind = singular`) sit at the analytic singular points `±r`. Field rows
/// have `kind = field` and empty tangent cells when singular; trajectory rows
/// have `kind = trajectory`, always-empty tangent cells, and `singular` set
/// when the point lies within the scheme's threshold of `±r`.
pub fn write_field<W: Write>(
    out: &mut W,
    singular_points: &[UnitVec3],
    field: &[FieldSample],
    trajectory: &[(UnitVec3, bool)],
    precision: usize,
) -> io::Result<()> {
    let p = precision;
    writeln!(out, "kind,index,qx,qy,qz,tx,ty,tz,singular")?;
    let point = |q: UnitVec3| {
        q.to_array()
            .map(|v| fmt_num(v, p))
            .join(",")
    };
    for (i, q) in singular_points.iter().enumerate() {
        writeln!(out, "singular,{i},{},,,,1", point(*q))?;
    }
    for (i, s) in field.iter().enumerate() {
        let (t, flag) = match s.tangent {
            Some(t) => (point(t), 0),
            None => (",,".to_string(), 1),
        };
        writeln!(out, "field,{i},{},{t},{flag}", point(s.point))?;
    }
    for (i, (q, singular)) in trajectory.iter().enumerate() {
        writeln!(out, "trajectory,{i},{},,,,{}", point(*q), u8::from(*singular))?;
    }
    Ok(())
}

/// Label used for a direction in profile headers: the canonical member of
/// `±r`, so that `r` and `−r` produce the same file.
pub fn direction_label(r: UnitVec3, precision: usize) -> String {
    let c = r.canonical_antipode();
    format!(
        "clearance[{};{};{}]",
        fmt_num(c.x(), precision.min(6)),
        fmt_num(c.y(), precision.min(6)),
        fmt_num(c.z(), precision.min(6))
    )
}

/// Writes `time` plus one clearance column (radians) per direction.
pub fn write_profiles<W: Write>(
    out: &mut W,
    frame_time: f64,
    profiles: &[(UnitVec3, Vec<f64>)],
    precision: usize,
) -> io::Result<()> {
    let mut header = vec!["time".to_string()];
    header.extend(profiles.iter().map(|(r, _)| direction_label(*r, precision)));
    writeln!(out, "{}", header.join(","))?;
    let frames = profiles.first().map_or(0, |p| p.1.len());
    for t in 0..frames {
        let mut row = vec![fmt_num(t as f64 * frame_time, precision)];
        row.extend(profiles.iter().map(|(_, v)| fmt_num(v[t], precision)));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
