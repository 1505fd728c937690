//! Spherical-earth geodesy: distance, bearing, destination and
//! great-circle interpolation on a sphere of mean Earth radius.
//!
//! Angles are degrees at the API boundary and radians internally.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius in nautical miles.
pub const EARTH_RADIUS_NM: f64 = 3440.065;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    InvalidLatitude(f64),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
}

/// A latitude/longitude position on the sphere.
///
/// Longitude is normalized into [-180, 180) on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

fn normalize_lon(lon: f64) -> f64 {
    let l = (lon + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can return exactly 360.0 for inputs like -1e-15
    if l >= 180.0 {
        l - 360.0
    } else {
        l
    }
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !(-90.0..=90.0).contains(&lat) || !lat.is_finite() {
            return Err(GeoError::InvalidLatitude(lat));
        }
        Ok(Self {
            lat,
            lon: normalize_lon(lon),
        })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    fn lat_rad(&self) -> f64 {
        self.lat.to_radians()
    }

    fn lon_rad(&self) -> f64 {
        self.lon.to_radians()
    }
}

/// Great-circle distance in nautical miles via the haversine formula.
pub fn haversine_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let (p1, l1) = (a.lat_rad(), a.lon_rad());
    let (p2, l2) = (b.lat_rad(), b.lon_rad());
    let dp = p2 - p1;
    let dl = l2 - l1;
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_NM * h.sqrt().min(1.0).asin()
}

fn is_antipodal(a: GeoPoint, b: GeoPoint) -> bool {
    (haversine_distance(a, b) - std::f64::consts::PI * EARTH_RADIUS_NM).abs() < 1e-6
}

/// Forward azimuth of the great circle from `a` to `b`, degrees in [0, 360).
pub fn initial_bearing(a: GeoPoint, b: GeoPoint) -> Result<f64, GeoError> {
    if a == b {
        return Err(GeoError::DegenerateGeometry("coincident points"));
    }
    if is_antipodal(a, b) {
        return Err(GeoError::DegenerateGeometry("antipodal points"));
    }
    let (p1, p2) = (a.lat_rad(), b.lat_rad());
    let dl = b.lon_rad() - a.lon_rad();
    let y = dl.sin() * p2.cos();
    let x = p1.cos() * p2.sin() - p1.sin() * p2.cos() * dl.cos();
    Ok(y.atan2(x).to_degrees().rem_euclid(360.0))
}

/// Point reached by travelling `distance_nm` along the great circle with
/// initial bearing `bearing_deg` from `origin`.
pub fn destination_point(origin: GeoPoint, bearing_deg: f64, distance_nm: f64) -> GeoPoint {
    let delta = distance_nm / EARTH_RADIUS_NM;
    let theta = bearing_deg.to_radians();
    let p1 = origin.lat_rad();
    let l1 = origin.lon_rad();
    let p2 = (p1.sin() * delta.cos() + p1.cos() * delta.sin() * theta.cos()).asin();
    let l2 = l1
        + (theta.sin() * delta.sin() * p1.cos()).atan2(delta.cos() - p1.sin() * p2.sin());
    GeoPoint {
        lat: p2.to_degrees().clamp(-90.0, 90.0),
        lon: normalize_lon(l2.to_degrees()),
    }
}

/// Spherical linear interpolation between `a` and `b`; fraction 0 gives `a`,
/// fraction 1 gives `b`.
pub fn great_circle_intermediate(
    a: GeoPoint,
    b: GeoPoint,
    fraction: f64,
) -> Result<GeoPoint, GeoError> {
    if is_antipodal(a, b) {
        return Err(GeoError::DegenerateGeometry("antipodal points"));
    }
    let delta = haversine_distance(a, b) / EARTH_RADIUS_NM;
    if delta == 0.0 {
        return Ok(a);
    }
    let sd = delta.sin();
    let wa = ((1.0 - fraction) * delta).sin() / sd;
    let wb = (fraction * delta).sin() / sd;
    let (p1, l1) = (a.lat_rad(), a.lon_rad());
    let (p2, l2) = (b.lat_rad(), b.lon_rad());
    let x = wa * p1.cos() * l1.cos() + wb * p2.cos() * l2.cos();
    let y = wa * p1.cos() * l1.sin() + wb * p2.cos() * l2.sin();
    let z = wa * p1.sin() + wb * p2.sin();
    let lat = z.atan2((x * x + y * y).sqrt()).to_degrees();
    let lon = y.atan2(x).to_degrees();
    Ok(GeoPoint {
        lat: lat.clamp(-90.0, 90.0),
        lon: normalize_lon(lon),
    })
}
