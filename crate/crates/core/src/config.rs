//! Run configuration: a JSON file mirroring the module knobs, plus CLI
//! override flags applied on top.

use serde::Deserialize;
use std::path::{Path, PathBuf};
use windroute::geo::GeoPoint;
use windroute::time::hours_from_iso;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("config key {key}: {message}")]
    Invalid { key: &'static str, message: String },
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Polar CSV path.
    pub polar: PathBuf,
    /// Environment manifest JSON path.
    pub env_manifest: PathBuf,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// [lat, lon] degrees.
    pub start: [f64; 2],
    pub finish: [f64; 2],
    #[serde(default = "default_kw")]
    pub k_w: f64,
    #[serde(default = "default_heading_step")]
    pub heading_step_deg: f64,
    #[serde(default = "default_safety")]
    pub gci_safety_factor: f64,
    /// Grid spacing for single solves, nautical miles.
    pub dn: Option<f64>,
    /// Grid spacings for convergence studies and sweeps.
    pub dn_list: Option<Vec<f64>>,
    /// Departure time, ISO-8601.
    pub depart: Option<String>,
    #[serde(default = "default_unc_min")]
    pub unc_min: f64,
    #[serde(default = "default_unc_max")]
    pub unc_max: f64,
    #[serde(default = "default_unc_steps")]
    pub unc_steps: usize,
    /// Explicit sweep start times, ISO-8601. Overrides the cadence window.
    pub start_times: Option<Vec<String>>,
    /// Sweep cadence in hours, used with start_window.
    pub cadence_hours: Option<f64>,
    /// [first, last] ISO-8601 bounds for cadence-generated starts.
    pub start_window: Option<[String; 2]>,
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_kw() -> f64 {
    0.05
}
fn default_heading_step() -> f64 {
    1.0
}
fn default_safety() -> f64 {
    1.25
}
fn default_unc_min() -> f64 {
    50.0
}
fn default_unc_max() -> f64 {
    150.0
}
fn default_unc_steps() -> usize {
    21
}
fn default_parallel() -> bool {
    true
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn start_point(&self) -> Result<GeoPoint, ConfigError> {
        GeoPoint::new(self.start[0], self.start[1])
            .map_err(|e| invalid("start", e.to_string()))
    }

    pub fn finish_point(&self) -> Result<GeoPoint, ConfigError> {
        GeoPoint::new(self.finish[0], self.finish[1])
            .map_err(|e| invalid("finish", e.to_string()))
    }

    pub fn depart_hours(&self) -> Result<f64, ConfigError> {
        let s = self
            .depart
            .as_ref()
            .ok_or_else(|| invalid("depart", "required for this command"))?;
        hours_from_iso(s).map_err(|e| invalid("depart", e.to_string()))
    }

    pub fn single_dn(&self) -> Result<f64, ConfigError> {
        self.dn
            .or_else(|| self.dn_list.as_ref().and_then(|l| l.first().copied()))
            .ok_or_else(|| invalid("dn", "required for this command"))
    }

    pub fn convergence_dns(&self) -> Result<[f64; 3], ConfigError> {
        let list = self
            .dn_list
            .as_ref()
            .ok_or_else(|| invalid("dn_list", "required for the gci command"))?;
        if list.len() != 3 {
            return Err(invalid(
                "dn_list",
                format!("need exactly 3 grid spacings, got {}", list.len()),
            ));
        }
        let mut dns = [list[0], list[1], list[2]];
        dns.sort_by(f64::total_cmp);
        Ok(dns)
    }

    /// Sweep departure times in hours since epoch.
    pub fn sweep_start_times(&self) -> Result<Vec<f64>, ConfigError> {
        if let Some(list) = &self.start_times {
            return list
                .iter()
                .map(|s| hours_from_iso(s).map_err(|e| invalid("start_times", e.to_string())))
                .collect();
        }
        let window = self
            .start_window
            .as_ref()
            .ok_or_else(|| invalid("start_window", "required when start_times is absent"))?;
        let cadence = self
            .cadence_hours
            .ok_or_else(|| invalid("cadence_hours", "required when start_times is absent"))?;
        if cadence <= 0.0 {
            return Err(invalid("cadence_hours", "must be positive"));
        }
        let first = hours_from_iso(&window[0]).map_err(|e| invalid("start_window", e.to_string()))?;
        let last = hours_from_iso(&window[1]).map_err(|e| invalid("start_window", e.to_string()))?;
        if last < first {
            return Err(invalid("start_window", "last precedes first"));
        }
        let mut times = Vec::new();
        let mut t = first;
        while t <= last + 1e-9 {
            times.push(t);
            t += cadence;
        }
        Ok(times)
    }
}
