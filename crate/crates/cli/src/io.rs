//! CSV and JSON file formats.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use dynoct::knn::LabeledPoint;
use dynoct::{OctreeConfig, PointId, Vec3};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

fn reader(path: &Path) -> CliResult<csv::Reader<File>> {
    csv::Reader::from_path(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn context<T>(path: &Path, r: Result<T, csv::Error>) -> CliResult<T> {
    r.map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// `path`, or stdout when `None`.
pub fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Deserialize)]
struct PointRow {
    id: u64,
    x: f64,
    y: f64,
    z: f64,
}

/// `id,x,y,z` rows.
pub fn read_points(path: &Path) -> CliResult<Vec<(PointId, Vec3)>> {
    let mut rdr = reader(path)?;
    let mut out = Vec::new();
    for row in rdr.deserialize::<PointRow>() {
        let r = context(path, row)?;
        out.push((PointId(r.id), [r.x, r.y, r.z]));
    }
    Ok(out)
}

#[derive(Deserialize)]
struct LabeledRow {
    id: u64,
    x: f64,
    y: f64,
    z: f64,
    label: u32,
}

/// `id,x,y,z,label` rows.
pub fn read_labeled(path: &Path) -> CliResult<Vec<LabeledPoint>> {
    let mut rdr = reader(path)?;
    let mut out = Vec::new();
    for row in rdr.deserialize::<LabeledRow>() {
        let r = context(path, row)?;
        out.push(LabeledPoint { id: PointId(r.id), pos: [r.x, r.y, r.z], label: r.label });
    }
    Ok(out)
}

/// `id,v0,...,v{D-1}` rows; returns `D` and the rows.
pub type Vectors = Vec<(PointId, Vec<f64>)>;

pub fn read_vectors(path: &Path) -> CliResult<(usize, Vectors)> {
    let mut rdr = reader(path)?;
    let headers = context(path, rdr.headers())?.clone();
    if headers.get(0) != Some("id") || headers.len() < 2 {
        return Err(CliError::input(format!("{}: expected header id,v0,...", path.display())));
    }
    let dim = headers.len() - 1;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = context(path, rec)?;
        let parse = |s: &str| s.trim().parse::<f64>();
        let id: u64 =
            rec[0].trim().parse().map_err(|_| CliError::input(format!("{}: bad id {:?}", path.display(), &rec[0])))?;
        let v = rec
            .iter()
            .skip(1)
            .map(parse)
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CliError::input(format!("{}: row {id}: {e}", path.display())))?;
        out.push((PointId(id), v));
    }
    Ok((dim, out))
}

#[derive(Deserialize)]
struct TrajRow {
    point_id: u64,
    t: f64,
    x: f64,
    y: f64,
    z: f64,
}

/// `point_id,t,x,y,z` rows grouped by point and sorted by `t`.
pub fn read_trajectories(path: &Path) -> CliResult<BTreeMap<PointId, Vec<Vec3>>> {
    let mut rdr = reader(path)?;
    let mut grouped: BTreeMap<PointId, Vec<(f64, Vec3)>> = BTreeMap::new();
    for row in rdr.deserialize::<TrajRow>() {
        let r = context(path, row)?;
        grouped.entry(PointId(r.point_id)).or_default().push((r.t, [r.x, r.y, r.z]));
    }
    Ok(grouped
        .into_iter()
        .map(|(id, mut s)| {
            s.sort_by(|a, b| a.0.total_cmp(&b.0));
            (id, s.into_iter().map(|e| e.1).collect())
        })
        .collect())
}

/// `{"K", "alpha", "max_depth", "expansion_factor"}`; missing fields take
/// their defaults.
pub fn read_config(path: Option<&Path>) -> CliResult<OctreeConfig> {
    let Some(path) = path else {
        return Ok(OctreeConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let config: OctreeConfig =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

/// Formats a float so that rerunning with the same inputs gives the same
/// bytes (shortest round-trip representation).
pub fn num(v: f64) -> String {
    format!("{v}")
}
