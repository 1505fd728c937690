//! Gridded wind, wave and current fields with bilinear spatial interpolation
//! and nearest-time lookup.
//!
//! On-disk form: a JSON manifest naming the axes and one CSV layer per
//! variable per time step. CSV layers are row-major, rows in lat-axis order,
//! columns in lon-axis order. Currents are optional and default to zero.

use crate::geo::GeoPoint;
use crate::time::{hours_from_iso, iso_from_hours};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("format error in {0}: {1}")]
    Format(PathBuf, String),
    #[error("axis mismatch: {0}")]
    AxisMismatch(String),
    #[error("missing variable {0}")]
    MissingVariable(String),
    #[error("non-uniform time axis: {0}")]
    GapInTime(String),
    #[error("query out of domain: {0}")]
    OutOfDomain(String),
}

/// One variable's data: a lat*lon layer per time step.
type Layers = Vec<Vec<f64>>;

#[derive(Debug, Clone)]
pub struct EnvironmentField {
    lat_axis: Vec<f64>,
    lon_axis: Vec<f64>,
    /// Hours since the epoch, strictly increasing, uniformly spaced.
    time_axis: Vec<f64>,
    wind_u: Layers,
    wind_v: Layers,
    wave_hs: Layers,
    current_u: Option<Layers>,
    current_v: Option<Layers>,
}

/// Point conditions returned by [`EnvironmentField::sample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSample {
    pub wind_speed: f64,
    /// Direction the wind blows from, compass degrees [0, 360).
    pub wind_dir_from: f64,
    pub wave_hs: f64,
    pub current_u: f64,
    pub current_v: f64,
}

fn check_axis(name: &str, axis: &[f64]) -> Result<(), EnvError> {
    if axis.len() < 2 {
        return Err(EnvError::AxisMismatch(format!(
            "{name} axis needs at least 2 points, got {}",
            axis.len()
        )));
    }
    if !axis.windows(2).all(|w| w[1] > w[0]) {
        return Err(EnvError::AxisMismatch(format!(
            "{name} axis is not strictly increasing"
        )));
    }
    Ok(())
}

fn check_layers(
    name: &str,
    layers: &Layers,
    nt: usize,
    cells: usize,
) -> Result<(), EnvError> {
    if layers.len() != nt {
        return Err(EnvError::AxisMismatch(format!(
            "{name}: {} time layers, axis has {nt}",
            layers.len()
        )));
    }
    for (i, l) in layers.iter().enumerate() {
        if l.len() != cells {
            return Err(EnvError::AxisMismatch(format!(
                "{name} layer {i}: {} cells, axes imply {cells}",
                l.len()
            )));
        }
    }
    Ok(())
}

/// Locate `x` on a strictly increasing axis: interval index plus fraction.
fn bracket(axis: &[f64], x: f64) -> Option<(usize, f64)> {
    let first = axis[0];
    let last = axis[axis.len() - 1];
    if x < first || x > last {
        return None;
    }
    if x >= last {
        return Some((axis.len() - 2, 1.0));
    }
    let i = axis.partition_point(|a| *a <= x).saturating_sub(1);
    Some(((i).min(axis.len() - 2), (x - axis[i]) / (axis[i + 1] - axis[i])))
}

impl EnvironmentField {
    /// Assemble and validate a field from in-memory parts. Axes given in
    /// decreasing order are flipped (with their layers) to increasing.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        mut lat_axis: Vec<f64>,
        mut lon_axis: Vec<f64>,
        time_axis: Vec<f64>,
        mut wind_u: Layers,
        mut wind_v: Layers,
        mut wave_hs: Layers,
        mut current_u: Option<Layers>,
        mut current_v: Option<Layers>,
    ) -> Result<Self, EnvError> {
        let flip_lat = lat_axis.len() >= 2 && lat_axis[0] > lat_axis[1];
        let flip_lon = lon_axis.len() >= 2 && lon_axis[0] > lon_axis[1];
        if flip_lat {
            lat_axis.reverse();
        }
        if flip_lon {
            lon_axis.reverse();
        }
        check_axis("lat", &lat_axis)?;
        check_axis("lon", &lon_axis)?;
        if time_axis.len() < 2 {
            return Err(EnvError::GapInTime(format!(
                "need at least 2 time steps, got {}",
                time_axis.len()
            )));
        }
        let dt = time_axis[1] - time_axis[0];
        if dt <= 0.0 {
            return Err(EnvError::GapInTime("time axis not increasing".into()));
        }
        for w in time_axis.windows(2) {
            let step = w[1] - w[0];
            if (step - dt).abs() > 1e-6 * dt.max(1.0) {
                return Err(EnvError::GapInTime(format!(
                    "step {step} h differs from first step {dt} h"
                )));
            }
        }
        let (nlat, nlon) = (lat_axis.len(), lon_axis.len());
        let cells = nlat * nlon;
        let nt = time_axis.len();
        if flip_lat || flip_lon {
            let flip = |layers: &mut Layers| {
                for l in layers.iter_mut() {
                    let mut out = vec![0.0; cells];
                    for r in 0..nlat {
                        for c in 0..nlon {
                            let sr = if flip_lat { nlat - 1 - r } else { r };
                            let sc = if flip_lon { nlon - 1 - c } else { c };
                            out[r * nlon + c] = l[sr * nlon + sc];
                        }
                    }
                    *l = out;
                }
            };
            flip(&mut wind_u);
            flip(&mut wind_v);
            flip(&mut wave_hs);
            if let Some(cu) = current_u.as_mut() {
                flip(cu);
            }
            if let Some(cv) = current_v.as_mut() {
                flip(cv);
            }
        }
        check_layers("wind_u", &wind_u, nt, cells)?;
        check_layers("wind_v", &wind_v, nt, cells)?;
        check_layers("wave_hs", &wave_hs, nt, cells)?;
        if current_u.is_some() != current_v.is_some() {
            return Err(EnvError::MissingVariable(
                "current_u and current_v must be declared together".into(),
            ));
        }
        if let Some(cu) = &current_u {
            check_layers("current_u", cu, nt, cells)?;
        }
        if let Some(cv) = &current_v {
            check_layers("current_v", cv, nt, cells)?;
        }
        Ok(Self {
            lat_axis,
            lon_axis,
            time_axis,
            wind_u,
            wind_v,
            wave_hs,
            current_u,
            current_v,
        })
    }

    pub fn lat_axis(&self) -> &[f64] {
        &self.lat_axis
    }

    pub fn lon_axis(&self) -> &[f64] {
        &self.lon_axis
    }

    pub fn time_axis(&self) -> &[f64] {
        &self.time_axis
    }

    pub fn time_step_hours(&self) -> f64 {
        self.time_axis[1] - self.time_axis[0]
    }

    pub fn has_currents(&self) -> bool {
        self.current_u.is_some()
    }

    /// Inclusive queryable time range: first and last step, each widened by
    /// half a step.
    pub fn time_domain(&self) -> (f64, f64) {
        let half = self.time_step_hours() / 2.0;
        (
            self.time_axis[0] - half,
            self.time_axis[self.time_axis.len() - 1] + half,
        )
    }

    fn nearest_time_index(&self, t: f64) -> Result<usize, EnvError> {
        let (lo, hi) = self.time_domain();
        if t < lo || t > hi {
            return Err(EnvError::OutOfDomain(format!(
                "time {} outside [{}, {}]",
                iso_from_hours(t),
                iso_from_hours(lo),
                iso_from_hours(hi)
            )));
        }
        let k = (t - self.time_axis[0]) / self.time_step_hours();
        // round-half-down: a tie goes to the earlier step
        let idx = (k - 0.5).ceil() as i64;
        Ok(idx.clamp(0, self.time_axis.len() as i64 - 1) as usize)
    }

    fn bilinear(&self, layer: &[f64], li: usize, lf: f64, ci: usize, cf: f64) -> f64 {
        let nlon = self.lon_axis.len();
        let v00 = layer[li * nlon + ci];
        let v01 = layer[li * nlon + ci + 1];
        let v10 = layer[(li + 1) * nlon + ci];
        let v11 = layer[(li + 1) * nlon + ci + 1];
        let a = v00 + (v01 - v00) * cf;
        let b = v10 + (v11 - v10) * cf;
        a + (b - a) * lf
    }

    /// Interpolated conditions at point `p` and time `t` (hours since epoch).
    /// Wind is interpolated componentwise then converted to speed/direction.
    pub fn sample(&self, p: GeoPoint, t: f64) -> Result<EnvSample, EnvError> {
        let (li, lf) = bracket(&self.lat_axis, p.lat()).ok_or_else(|| {
            EnvError::OutOfDomain(format!(
                "lat {} outside [{}, {}]",
                p.lat(),
                self.lat_axis[0],
                self.lat_axis[self.lat_axis.len() - 1]
            ))
        })?;
        let (ci, cf) = bracket(&self.lon_axis, p.lon()).ok_or_else(|| {
            EnvError::OutOfDomain(format!(
                "lon {} outside [{}, {}]",
                p.lon(),
                self.lon_axis[0],
                self.lon_axis[self.lon_axis.len() - 1]
            ))
        })?;
        let ti = self.nearest_time_index(t)?;
        let u = self.bilinear(&self.wind_u[ti], li, lf, ci, cf);
        let v = self.bilinear(&self.wind_v[ti], li, lf, ci, cf);
        let hs = self.bilinear(&self.wave_hs[ti], li, lf, ci, cf).max(0.0);
        let cu = self
            .current_u
            .as_ref()
            .map_or(0.0, |l| self.bilinear(&l[ti], li, lf, ci, cf));
        let cv = self
            .current_v
            .as_ref()
            .map_or(0.0, |l| self.bilinear(&l[ti], li, lf, ci, cf));
        let speed = u.hypot(v);
        let dir_from = if speed == 0.0 {
            0.0
        } else {
            (u.atan2(v).to_degrees() + 180.0).rem_euclid(360.0)
        };
        Ok(EnvSample {
            wind_speed: speed,
            wind_dir_from: dir_from,
            wave_hs: hs,
            current_u: cu,
            current_v: cv,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    lat_axis: Vec<f64>,
    lon_axis: Vec<f64>,
    /// ISO-8601 timestamps.
    time_axis: Vec<String>,
    /// Variable name to per-time-step CSV paths, relative to the manifest.
    variables: BTreeMap<String, Vec<String>>,
}

fn read_layer_csv(path: &Path, nlat: usize, nlon: usize) -> Result<Vec<f64>, EnvError> {
    let text = fs::read_to_string(path).map_err(|source| EnvError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::with_capacity(nlat * nlon);
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if rows.len() != nlat {
        return Err(EnvError::AxisMismatch(format!(
            "{}: {} rows, lat axis has {nlat}",
            path.display(),
            rows.len()
        )));
    }
    for row in rows {
        let vals: Vec<&str> = row.split(',').map(str::trim).collect();
        if vals.len() != nlon {
            return Err(EnvError::AxisMismatch(format!(
                "{}: {} columns, lon axis has {nlon}",
                path.display(),
                vals.len()
            )));
        }
        for v in vals {
            out.push(v.parse::<f64>().map_err(|_| {
                EnvError::Format(path.to_path_buf(), format!("bad number {v:?}"))
            })?);
        }
    }
    Ok(out)
}

/// Load and validate an environment from its JSON manifest.
pub fn load_environment(manifest_path: &Path) -> Result<EnvironmentField, EnvError> {
    let text = fs::read_to_string(manifest_path).map_err(|source| EnvError::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| EnvError::Format(manifest_path.to_path_buf(), e.to_string()))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let time_axis = manifest
        .time_axis
        .iter()
        .map(|s| {
            hours_from_iso(s)
                .map_err(|e| EnvError::Format(manifest_path.to_path_buf(), e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (nlat, nlon) = (manifest.lat_axis.len(), manifest.lon_axis.len());
    let nt = time_axis.len();
    let load_var = |name: &str| -> Result<Option<Layers>, EnvError> {
        let Some(paths) = manifest.variables.get(name) else {
            return Ok(None);
        };
        if paths.len() != nt {
            return Err(EnvError::AxisMismatch(format!(
                "{name}: {} layer files, time axis has {nt}",
                paths.len()
            )));
        }
        let mut layers = Vec::with_capacity(nt);
        for p in paths {
            layers.push(read_layer_csv(&base.join(p), nlat, nlon)?);
        }
        Ok(Some(layers))
    };
    let require = |name: &str, v: Option<Layers>| {
        v.ok_or_else(|| EnvError::MissingVariable(name.to_string()))
    };
    let wind_u = require("wind_u", load_var("wind_u")?)?;
    let wind_v = require("wind_v", load_var("wind_v")?)?;
    let wave_hs = require("wave_hs", load_var("wave_hs")?)?;
    let current_u = load_var("current_u")?;
    let current_v = load_var("current_v")?;
    EnvironmentField::from_parts(
        manifest.lat_axis,
        manifest.lon_axis,
        time_axis,
        wind_u,
        wind_v,
        wave_hs,
        current_u,
        current_v,
    )
}

/// Write a field back out as manifest + layer CSVs under `dir`. Floats are
/// rendered with shortest round-trip formatting, so a reload reproduces the
/// in-memory values bit for bit.
pub fn save_environment(field: &EnvironmentField, dir: &Path) -> Result<PathBuf, EnvError> {
    fs::create_dir_all(dir).map_err(|source| EnvError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let nlon = field.lon_axis.len();
    let mut variables = BTreeMap::new();
    let mut write_var = |name: &str, layers: &Layers| -> Result<(), EnvError> {
        let mut paths = Vec::with_capacity(layers.len());
        for (t, layer) in layers.iter().enumerate() {
            let fname = format!("{name}_{t:03}.csv");
            let body: String = layer
                .chunks(nlon)
                .map(|row| {
                    row.iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect::<Vec<_>>()
                .join("\n");
            let path = dir.join(&fname);
            fs::write(&path, body + "\n").map_err(|source| EnvError::Io { path, source })?;
            paths.push(fname);
        }
        variables.insert(name.to_string(), paths);
        Ok(())
    };
    write_var("wind_u", &field.wind_u)?;
    write_var("wind_v", &field.wind_v)?;
    write_var("wave_hs", &field.wave_hs)?;
    if let Some(cu) = &field.current_u {
        write_var("current_u", cu)?;
    }
    if let Some(cv) = &field.current_v {
        write_var("current_v", cv)?;
    }
    let manifest = Manifest {
        lat_axis: field.lat_axis.clone(),
        lon_axis: field.lon_axis.clone(),
        time_axis: field.time_axis.iter().map(|h| iso_from_hours(*h)).collect(),
        variables,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| EnvError::Format(path.clone(), e.to_string()))?;
    fs::write(&path, json).map_err(|source| EnvError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Equality on every stored value, for round-trip checks.
impl PartialEq for EnvironmentField {
    fn eq(&self, other: &Self) -> bool {
        self.lat_axis == other.lat_axis
            && self.lon_axis == other.lon_axis
            && self.time_axis == other.time_axis
            && self.wind_u == other.wind_u
            && self.wind_v == other.wind_v
            && self.wave_hs == other.wave_hs
            && self.current_u == other.current_u
            && self.current_v == other.current_v
    }
}
