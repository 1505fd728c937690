//! Boat performance: polar-table speed lookup, linear uncertainty scaling,
//! wave speed decrement, current-aware heading optimization and the arc cost
//! function feeding the router.

use crate::env::{EnvError, EnvSample, EnvironmentField};
use crate::geo::{haversine_distance, initial_bearing, GeoPoint};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PerfError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("polar format error in {0}: {1}")]
    Format(PathBuf, String),
    #[error("invalid polar table: {0}")]
    InvalidTable(String),
    #[error("invalid performance scale {0}% (must be > 0)")]
    InvalidScale(f64),
}

/// Boat speed through the water as a function of true wind speed and true
/// wind angle. Symmetric about the wind axis: angles are |signed TWA|.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarTable {
    tws_axis: Vec<f64>,
    twa_axis: Vec<f64>,
    /// Indexed [twa][tws].
    speed: Vec<Vec<f64>>,
}

impl PolarTable {
    pub fn new(
        tws_axis: Vec<f64>,
        twa_axis: Vec<f64>,
        speed: Vec<Vec<f64>>,
    ) -> Result<Self, PerfError> {
        if tws_axis.len() < 2 || !tws_axis.windows(2).all(|w| w[1] > w[0]) {
            return Err(PerfError::InvalidTable(
                "tws axis must be strictly increasing with at least 2 entries".into(),
            ));
        }
        if twa_axis.len() < 2 || !twa_axis.windows(2).all(|w| w[1] > w[0]) {
            return Err(PerfError::InvalidTable(
                "twa axis must be strictly increasing with at least 2 entries".into(),
            ));
        }
        if twa_axis.iter().any(|a| !(0.0..=180.0).contains(a)) {
            return Err(PerfError::InvalidTable("twa outside [0, 180]".into()));
        }
        if speed.len() != twa_axis.len()
            || speed.iter().any(|row| row.len() != tws_axis.len())
        {
            return Err(PerfError::InvalidTable(format!(
                "speed matrix must be {}x{}",
                twa_axis.len(),
                tws_axis.len()
            )));
        }
        if speed.iter().flatten().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(PerfError::InvalidTable("negative or non-finite speed".into()));
        }
        Ok(Self {
            tws_axis,
            twa_axis,
            speed,
        })
    }

    pub fn tws_axis(&self) -> &[f64] {
        &self.tws_axis
    }

    pub fn twa_axis(&self) -> &[f64] {
        &self.twa_axis
    }

    pub fn speeds(&self) -> &[Vec<f64>] {
        &self.speed
    }

    /// Bilinear interpolation over (twa, tws). Queries beyond either axis end
    /// clamp to the end row/column.
    pub fn speed(&self, tws: f64, twa: f64) -> f64 {
        let (ti, tf) = clamp_bracket(&self.tws_axis, tws.max(0.0));
        let (ai, af) = clamp_bracket(&self.twa_axis, fold_twa(twa));
        let lo = self.speed[ai][ti] + (self.speed[ai][ti + 1] - self.speed[ai][ti]) * tf;
        let hi =
            self.speed[ai + 1][ti] + (self.speed[ai + 1][ti + 1] - self.speed[ai + 1][ti]) * tf;
        (lo + (hi - lo) * af).max(0.0)
    }
}

/// Fold any angle in degrees to an absolute wind angle in [0, 180].
pub fn fold_twa(angle: f64) -> f64 {
    let a = angle.rem_euclid(360.0);
    if a > 180.0 {
        360.0 - a
    } else {
        a
    }
}

fn clamp_bracket(axis: &[f64], x: f64) -> (usize, f64) {
    if x <= axis[0] {
        return (0, 0.0);
    }
    if x >= axis[axis.len() - 1] {
        return (axis.len() - 2, 1.0);
    }
    let i = axis.partition_point(|a| *a <= x) - 1;
    let i = i.min(axis.len() - 2);
    (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
}

/// Default wave decrement coefficient, per metre of significant wave height.
pub const DEFAULT_WAVE_COEFF: f64 = 0.05;
/// Default heading search step in degrees.
pub const DEFAULT_HEADING_STEP: f64 = 1.0;
/// Maximum tolerated cross-course ground-speed component, knots.
pub const CROSS_COURSE_TOL: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct PerformanceModel {
    pub polar: PolarTable,
    /// Dimensionless performance multiplier (1.0 is the published polar).
    pub unc_factor: f64,
    /// Linear wave speed decrement per metre of significant wave height.
    pub wave_decrement_coeff: f64,
    /// Heading search granularity in degrees.
    pub heading_step_deg: f64,
}

impl PerformanceModel {
    pub fn new(polar: PolarTable, wave_decrement_coeff: f64) -> Self {
        Self {
            polar,
            unc_factor: 1.0,
            wave_decrement_coeff,
            heading_step_deg: DEFAULT_HEADING_STEP,
        }
    }

    /// Copy of the model at `unc_percent`% of the original performance.
    /// The polar table is untouched; scaling applies at lookup time.
    pub fn scale_performance(&self, unc_percent: f64) -> Result<Self, PerfError> {
        if unc_percent <= 0.0 || !unc_percent.is_finite() {
            return Err(PerfError::InvalidScale(unc_percent));
        }
        let mut m = self.clone();
        m.unc_factor = unc_percent / 100.0;
        Ok(m)
    }

    /// Speed retention factor in waves: max(0, 1 - k_w * Hs).
    pub fn wave_factor(&self, hs: f64) -> f64 {
        (1.0 - self.wave_decrement_coeff * hs).max(0.0)
    }

    /// Effective speed through the water on heading `theta` in the given
    /// conditions.
    pub fn water_speed(&self, env: &EnvSample, heading_deg: f64) -> f64 {
        let twa = fold_twa(heading_deg - env.wind_dir_from);
        self.polar.speed(env.wind_speed, twa) * self.unc_factor * self.wave_factor(env.wave_hs)
    }

    /// Best speed over ground along `course_bearing`, searching candidate
    /// headings and requiring the cross-course drift to stay within
    /// [`CROSS_COURSE_TOL`]. Returns (SOG knots, chosen heading degrees);
    /// SOG 0 encodes an infeasible arc.
    pub fn effective_speed_over_ground(
        &self,
        env: &EnvSample,
        course_bearing: f64,
    ) -> (f64, f64) {
        let cb = course_bearing.to_radians();
        let (sin_cb, cos_cb) = (cb.sin(), cb.cos());
        let mut best_sog = 0.0;
        let mut best_heading = course_bearing;
        let mut consider = |heading: f64| {
            let v = self.water_speed(env, heading);
            let h = heading.to_radians();
            let gu = v * h.sin() + env.current_u;
            let gv = v * h.cos() + env.current_v;
            let along = gu * sin_cb + gv * cos_cb;
            let cross = gu * cos_cb - gv * sin_cb;
            if cross.abs() <= CROSS_COURSE_TOL && along > best_sog {
                best_sog = along;
                best_heading = heading;
            }
        };
        let steps = (360.0 / self.heading_step_deg).round() as usize;
        for k in 0..steps {
            consider(k as f64 * self.heading_step_deg);
        }
        // the course itself is always a candidate so that drift-free
        // conditions return heading == course exactly
        consider(course_bearing.rem_euclid(360.0));
        (best_sog, best_heading)
    }
}

/// One arc evaluation: travel time (possibly infinite) plus the heading and
/// speed behind it.
#[derive(Debug, Clone, Copy)]
pub struct ArcEval {
    pub hours: f64,
    pub heading_deg: f64,
    pub sog_knots: f64,
}

/// Travel time from `from` to `to` departing at `depart_t` (hours since
/// epoch). Weather is sampled once, at the departure node and time. An arc
/// with no positive speed over ground costs +infinity.
pub fn arc_cost(
    model: &PerformanceModel,
    field: &EnvironmentField,
    from: GeoPoint,
    to: GeoPoint,
    depart_t: f64,
) -> Result<ArcEval, EnvError> {
    let course = initial_bearing(from, to)
        .map_err(|e| EnvError::OutOfDomain(format!("degenerate arc: {e}")))?;
    let env = field.sample(from, depart_t)?;
    let (sog, heading) = model.effective_speed_over_ground(&env, course);
    let hours = if sog > 0.0 {
        haversine_distance(from, to) / sog
    } else {
        f64::INFINITY
    };
    Ok(ArcEval {
        hours,
        heading_deg: heading,
        sog_knots: sog,
    })
}

/// Parse a polar CSV: first cell "TWA", first row the TWS axis, first column
/// the TWA axis, body boat speeds in knots.
pub fn load_polar(path: &Path) -> Result<PolarTable, PerfError> {
    let text = fs::read_to_string(path).map_err(|source| PerfError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_polar(&text).map_err(|msg| PerfError::Format(path.to_path_buf(), msg))
}

fn parse_polar(text: &str) -> Result<PolarTable, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty file")?;
    let mut cells = header.split(',').map(str::trim);
    let first = cells.next().unwrap_or("");
    if !first.eq_ignore_ascii_case("twa") {
        return Err(format!("first cell must be TWA, got {first:?}"));
    }
    let tws_axis: Vec<f64> = cells
        .map(|c| c.parse::<f64>().map_err(|_| format!("bad tws {c:?}")))
        .collect::<Result<_, _>>()?;
    let mut twa_axis = Vec::new();
    let mut speed = Vec::new();
    for line in lines {
        let mut cells = line.split(',').map(str::trim);
        let twa = cells
            .next()
            .ok_or("missing twa column")?
            .parse::<f64>()
            .map_err(|_| "bad twa value".to_string())?;
        twa_axis.push(twa);
        let row: Vec<f64> = cells
            .map(|c| c.parse::<f64>().map_err(|_| format!("bad speed {c:?}")))
            .collect::<Result<_, _>>()?;
        speed.push(row);
    }
    PolarTable::new(tws_axis, twa_axis, speed).map_err(|e| e.to_string())
}

/// Inverse of [`load_polar`], with shortest round-trip float formatting.
pub fn save_polar(polar: &PolarTable, path: &Path) -> Result<(), PerfError> {
    let mut out = String::from("TWA");
    for t in polar.tws_axis() {
        out.push(',');
        out.push_str(&t.to_string());
    }
    out.push('\n');
    for (i, twa) in polar.twa_axis().iter().enumerate() {
        out.push_str(&twa.to_string());
        for v in &polar.speeds()[i] {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| PerfError::Io {
        path: path.to_path_buf(),
        source,
    })
}
