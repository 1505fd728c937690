//! Shared fixtures for integration tests.
#![allow(dead_code)]

use windroute::env::EnvironmentField;
use windroute::geo::{destination_point, GeoPoint};
use windroute::perf::PolarTable;

pub fn pt(lat: f64, lon: f64) -> GeoPoint {
    GeoPoint::new(lat, lon).unwrap()
}

/// Equatorial finish `nm` nautical miles due east of (0, 0).
pub fn finish_east(nm: f64) -> GeoPoint {
    destination_point(pt(0.0, 0.0), 90.0, nm)
}

/// Constant boat speed at every wind speed and angle.
pub fn flat_polar(speed: f64) -> PolarTable {
    PolarTable::new(
        vec![0.0, 40.0],
        vec![0.0, 180.0],
        vec![vec![speed, speed], vec![speed, speed]],
    )
    .unwrap()
}

/// Hard no-go inside 80 degrees of the wind, 5 kn elsewhere.
pub fn no_go_polar() -> PolarTable {
    PolarTable::new(
        vec![0.0, 40.0],
        vec![0.0, 80.0, 90.0, 180.0],
        vec![
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![5.0, 5.0],
            vec![5.0, 5.0],
        ],
    )
    .unwrap()
}

/// Boat speed half the true wind speed, at every angle.
pub fn wind_proportional_polar() -> PolarTable {
    PolarTable::new(
        vec![0.0, 40.0],
        vec![0.0, 180.0],
        vec![vec![0.0, 20.0], vec![0.0, 20.0]],
    )
    .unwrap()
}

/// Uniform wind from the north at `knots`, no waves or current, 3 h cadence
/// covering `hours` from epoch over a generous equatorial box.
pub fn uniform_north_wind(knots: f64, hours: f64) -> EnvironmentField {
    let nt = (hours / 3.0).ceil() as usize + 1;
    EnvironmentField::from_parts(
        vec![-3.0, 3.0],
        vec![-1.0, 5.0],
        (0..nt).map(|i| 3.0 * i as f64).collect(),
        vec![vec![0.0; 4]; nt],
        vec![vec![-knots; 4]; nt],
        vec![vec![0.0; 4]; nt],
        None,
        None,
    )
    .unwrap()
}

/// North wind whose speed varies sinusoidally between time steps.
pub fn varying_north_wind(hours: f64) -> EnvironmentField {
    let nt = (hours / 3.0).ceil() as usize + 1;
    let speeds: Vec<f64> = (0..nt)
        .map(|i| 12.0 + 4.0 * (i as f64 * 0.9).sin())
        .collect();
    EnvironmentField::from_parts(
        vec![-3.0, 3.0],
        vec![-1.0, 5.0],
        (0..nt).map(|i| 3.0 * i as f64).collect(),
        vec![vec![0.0; 4]; nt],
        speeds.iter().map(|s| vec![-s; 4]).collect(),
        vec![vec![0.0; 4]; nt],
        None,
        None,
    )
    .unwrap()
}
