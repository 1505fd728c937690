//! Timestamp handling. The engine works in fractional hours since the Unix
//! epoch; file formats and the CLI use ISO-8601 strings.

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("unparseable timestamp {0:?} (expected ISO-8601, e.g. 1985-01-01T00:00:00Z)")]
pub struct TimeParseError(pub String);

/// Parse an ISO-8601 timestamp (or bare date) into hours since the epoch.
pub fn hours_from_iso(s: &str) -> Result<f64, TimeParseError> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp() as f64 / 3600.0);
    }
    if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S") {
        return Ok(dt.and_utc().timestamp() as f64 / 3600.0);
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp() as f64 / 3600.0);
    }
    Err(TimeParseError(s.to_string()))
}

/// Render hours since the epoch as an ISO-8601 UTC timestamp (whole seconds).
pub fn iso_from_hours(hours: f64) -> String {
    let secs = (hours * 3600.0).round() as i64;
    DateTime::<Utc>::from_timestamp(secs, 0)
        .map(|dt| dt.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| format!("{hours}h"))
}
