//! Uncertainty sweep: solve the route over every combination of grid
//! spacing, performance scaling and start time, then aggregate voyaging-time
//! statistics over paired-feasible starts.

use crate::env::EnvironmentField;
use crate::geo::GeoPoint;
use crate::grid::{build_grid, GridError, GridSpec};
use crate::perf::{PerformanceModel, PolarTable};
use crate::router::{shortest_path, RouteError};
use crate::time::iso_from_hours;
use rayon::prelude::*;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("no start is feasible at every performance level")]
    EmptyAggregate,
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub start: GeoPoint,
    pub finish: GeoPoint,
    /// Grid spacings, nautical miles, strictly increasing.
    pub dn_list: Vec<f64>,
    /// Performance range in percent: (min, max, steps), endpoints inclusive.
    pub unc_range: (f64, f64, usize),
    /// Departure times, hours since epoch.
    pub start_times: Vec<f64>,
    pub wave_decrement_coeff: f64,
    pub heading_step_deg: f64,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<(), SweepError> {
        let (lo, hi, steps) = self.unc_range;
        if steps < 1 {
            return Err(SweepError::InvalidPlan("unc steps must be >= 1".into()));
        }
        if steps == 1 && lo != hi {
            return Err(SweepError::InvalidPlan(
                "single-step unc range needs min == max".into(),
            ));
        }
        if lo <= 0.0 || hi < lo {
            return Err(SweepError::InvalidPlan(format!(
                "bad unc range [{lo}, {hi}]"
            )));
        }
        if self.dn_list.is_empty() || !self.dn_list.windows(2).all(|w| w[1] > w[0]) {
            return Err(SweepError::InvalidPlan(
                "dn_list must be non-empty and strictly increasing".into(),
            ));
        }
        if self.start_times.is_empty() {
            return Err(SweepError::InvalidPlan("no start times".into()));
        }
        Ok(())
    }

    /// Evenly spaced performance percentages, endpoints inclusive.
    pub fn unc_values(&self) -> Vec<f64> {
        let (lo, hi, steps) = self.unc_range;
        if steps == 1 {
            return vec![lo];
        }
        (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub start_t: f64,
    pub dn: f64,
    pub unc_percent: f64,
    pub vt_hours: Option<f64>,
    pub feasible: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct UncAggregate {
    pub dn: f64,
    pub unc_percent: f64,
    /// Starts feasible at every performance level for this grid spacing.
    pub paired_starts: usize,
    pub mean_vt_hours: f64,
    pub std_vt_hours: f64,
    pub mean_normalized_vt: f64,
    pub std_normalized_vt: f64,
    pub infeasible_starts: usize,
}

/// Mean slow-down penalty minus mean speed-up gain for a symmetric +-delta
/// pair around 100%. Positive when losing performance costs more time than
/// gaining the same performance saves.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AsymmetryStat {
    pub dn: f64,
    pub delta_percent: f64,
    pub value_hours: f64,
}

#[derive(Debug)]
pub struct SweepReport {
    pub records: Vec<SweepRecord>,
    pub aggregates: Vec<UncAggregate>,
    pub asymmetry: Vec<AsymmetryStat>,
}

/// Fastest conceivable crossing, used to fail fast when the weather window
/// cannot cover any voyage from the latest start.
fn min_voyage_hours(plan: &SweepPlan, polar: &PolarTable) -> f64 {
    let d = crate::geo::haversine_distance(plan.start, plan.finish);
    let vmax = polar
        .speeds()
        .iter()
        .flatten()
        .cloned()
        .fold(0.0f64, f64::max);
    let unc_max = plan.unc_values().iter().cloned().fold(0.0f64, f64::max) / 100.0;
    if vmax * unc_max > 0.0 {
        d / (vmax * unc_max)
    } else {
        f64::INFINITY
    }
}

/// Run the full sweep. Records come back in canonical
/// (start_t, dn, unc) order regardless of `parallel`.
pub fn run_sweep(
    plan: &SweepPlan,
    polar: &PolarTable,
    field: &EnvironmentField,
    parallel: bool,
) -> Result<SweepReport, SweepError> {
    plan.validate()?;
    let (lo, hi) = field.time_domain();
    for &t in &plan.start_times {
        if t < lo || t > hi {
            return Err(SweepError::InvalidPlan(format!(
                "start time {} outside the weather window [{}, {}]",
                iso_from_hours(t),
                iso_from_hours(lo),
                iso_from_hours(hi)
            )));
        }
    }
    let latest = plan.start_times.iter().cloned().fold(f64::MIN, f64::max);
    if latest + min_voyage_hours(plan, polar) > hi {
        return Err(SweepError::InvalidPlan(format!(
            "weather window ends at {} before the fastest possible voyage from {} can finish",
            iso_from_hours(hi),
            iso_from_hours(latest)
        )));
    }

    // 100% is always solved so normalized statistics have their reference
    let mut unc_values = plan.unc_values();
    if !unc_values.iter().any(|u| (u - 100.0).abs() < 1e-9) {
        unc_values.push(100.0);
        unc_values.sort_by(f64::total_cmp);
    }

    let base = PerformanceModel {
        polar: polar.clone(),
        unc_factor: 1.0,
        wave_decrement_coeff: plan.wave_decrement_coeff,
        heading_step_deg: plan.heading_step_deg,
    };

    let mut records = Vec::new();
    for &dn in &plan.dn_list {
        let grid = build_grid(GridSpec {
            start: plan.start,
            finish: plan.finish,
            node_spacing_dn: dn,
        })?;
        let jobs: Vec<(f64, f64)> = plan
            .start_times
            .iter()
            .flat_map(|&t| unc_values.iter().map(move |&u| (t, u)))
            .collect();
        let solve_one = |&(start_t, unc): &(f64, f64)| -> SweepRecord {
            let model = base
                .scale_performance(unc)
                .expect("validated unc percentage");
            match shortest_path(&grid, &model, field, start_t) {
                Ok(r) if r.feasible => SweepRecord {
                    start_t,
                    dn,
                    unc_percent: unc,
                    vt_hours: Some(r.voyaging_time),
                    feasible: true,
                    reason: None,
                },
                Ok(_) => SweepRecord {
                    start_t,
                    dn,
                    unc_percent: unc,
                    vt_hours: None,
                    feasible: false,
                    reason: Some("no positive-speed path".into()),
                },
                Err(RouteError::Env(e)) => SweepRecord {
                    start_t,
                    dn,
                    unc_percent: unc,
                    vt_hours: None,
                    feasible: false,
                    reason: Some(e.to_string()),
                },
                Err(e) => SweepRecord {
                    start_t,
                    dn,
                    unc_percent: unc,
                    vt_hours: None,
                    feasible: false,
                    reason: Some(e.to_string()),
                },
            }
        };
        let mut batch: Vec<SweepRecord> = if parallel {
            jobs.par_iter().map(solve_one).collect()
        } else {
            jobs.iter().map(solve_one).collect()
        };
        records.append(&mut batch);
    }
    // canonical ordering: start, then dn, then unc
    records.sort_by(|a, b| {
        a.start_t
            .total_cmp(&b.start_t)
            .then(a.dn.total_cmp(&b.dn))
            .then(a.unc_percent.total_cmp(&b.unc_percent))
    });
    let (aggregates, asymmetry) = aggregate(&records)?;
    Ok(SweepReport {
        records,
        aggregates,
        asymmetry,
    })
}

/// Per-(dn, unc) statistics over starts that are feasible at every
/// performance level, normalized against each start's 100% voyage.
pub fn aggregate(
    records: &[SweepRecord],
) -> Result<(Vec<UncAggregate>, Vec<AsymmetryStat>), SweepError> {
    if records.is_empty() {
        return Err(SweepError::EmptyAggregate);
    }
    let mut dns: Vec<f64> = records.iter().map(|r| r.dn).collect();
    dns.sort_by(f64::total_cmp);
    dns.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let mut aggregates = Vec::new();
    let mut asymmetry = Vec::new();
    let mut any_paired = false;
    for &dn in &dns {
        let subset: Vec<&SweepRecord> = records
            .iter()
            .filter(|r| (r.dn - dn).abs() < 1e-9)
            .collect();
        let mut starts: Vec<f64> = subset.iter().map(|r| r.start_t).collect();
        starts.sort_by(f64::total_cmp);
        starts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut uncs: Vec<f64> = subset.iter().map(|r| r.unc_percent).collect();
        uncs.sort_by(f64::total_cmp);
        uncs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

        let lookup = |start: f64, unc: f64| -> Option<&SweepRecord> {
            subset
                .iter()
                .find(|r| (r.start_t - start).abs() < 1e-12 && (r.unc_percent - unc).abs() < 1e-9)
                .copied()
        };
        let paired: Vec<f64> = starts
            .iter()
            .cloned()
            .filter(|&s| uncs.iter().all(|&u| lookup(s, u).is_some_and(|r| r.feasible)))
            .collect();
        if !paired.is_empty() {
            any_paired = true;
        }
        let reference = |s: f64| lookup(s, 100.0).and_then(|r| r.vt_hours);

        for &unc in &uncs {
            let infeasible = starts
                .iter()
                .filter(|&&s| lookup(s, unc).is_none_or(|r| !r.feasible))
                .count();
            let vts: Vec<f64> = paired
                .iter()
                .filter_map(|&s| lookup(s, unc).and_then(|r| r.vt_hours))
                .collect();
            let norms: Vec<f64> = paired
                .iter()
                .filter_map(|&s| {
                    let vt = lookup(s, unc).and_then(|r| r.vt_hours)?;
                    reference(s).map(|r| vt / r)
                })
                .collect();
            let stats = |xs: &[f64]| {
                if xs.is_empty() {
                    return (f64::NAN, f64::NAN);
                }
                let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
                (mean, var.sqrt())
            };
            let (mean_vt, std_vt) = stats(&vts);
            let (mean_norm, std_norm) = stats(&norms);
            aggregates.push(UncAggregate {
                dn,
                unc_percent: unc,
                paired_starts: paired.len(),
                mean_vt_hours: mean_vt,
                std_vt_hours: std_vt,
                mean_normalized_vt: mean_norm,
                std_normalized_vt: std_norm,
                infeasible_starts: infeasible,
            });
        }

        // symmetric pairs about 100%
        for &unc in &uncs {
            if unc >= 100.0 {
                continue;
            }
            let delta = 100.0 - unc;
            let Some(&upper) = uncs.iter().find(|&&u| (u - (100.0 + delta)).abs() < 1e-9)
            else {
                continue;
            };
            let diffs: Vec<f64> = paired
                .iter()
                .filter_map(|&s| {
                    let vt_ref = reference(s)?;
                    let slow = lookup(s, unc).and_then(|r| r.vt_hours)?;
                    let fast = lookup(s, upper).and_then(|r| r.vt_hours)?;
                    Some((slow - vt_ref).abs() - (fast - vt_ref).abs())
                })
                .collect();
            if !diffs.is_empty() {
                asymmetry.push(AsymmetryStat {
                    dn,
                    delta_percent: delta,
                    value_hours: diffs.iter().sum::<f64>() / diffs.len() as f64,
                });
            }
        }
    }
    if !any_paired {
        return Err(SweepError::EmptyAggregate);
    }
    Ok((aggregates, asymmetry))
}

pub fn write_records_csv<W: Write>(records: &[SweepRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "start_iso,dn,unc_percent,vt_hours,feasible,reason")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            iso_from_hours(r.start_t),
            r.dn,
            r.unc_percent,
            r.vt_hours.map_or(String::new(), |v| v.to_string()),
            r.feasible,
            r.reason.clone().unwrap_or_default()
        )?;
    }
    Ok(())
}

pub fn write_aggregates_csv<W: Write>(
    aggregates: &[UncAggregate],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(
        w,
        "dn,unc_percent,paired_starts,mean_vt_hours,std_vt_hours,mean_normalized_vt,std_normalized_vt,infeasible_starts"
    )?;
    for a in aggregates {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            a.dn,
            a.unc_percent,
            a.paired_starts,
            a.mean_vt_hours,
            a.std_vt_hours,
            a.mean_normalized_vt,
            a.std_normalized_vt,
            a.infeasible_starts
        )?;
    }
    Ok(())
}
