//! Grid convergence analysis: observed order of convergence, Richardson
//! extrapolation to zero grid size, and the Grid Convergence Index from
//! solutions on three grid spacings.

use std::collections::BTreeMap;
use std::io::Write;
use thiserror::Error;

/// Safety factor applied to the fine-grid relative error in a three-grid
/// study.
pub const DEFAULT_SAFETY_FACTOR: f64 = 1.25;

const P_TOL: f64 = 1e-10;
const P_MAX_ITER: usize = 200;

#[derive(Debug, Error)]
pub enum GciError {
    #[error("invalid triplet: {0}")]
    InvalidTriplet(String),
    #[error("degenerate deltas: {0}")]
    DegenerateDeltas(String),
    #[error("order-of-convergence iteration failed to converge")]
    NoConvergence,
}

/// Three (grid size, voyaging time) pairs ordered fine to coarse.
#[derive(Debug, Clone, Copy)]
pub struct GridTriplet {
    h: [f64; 3],
    f: [f64; 3],
}

impl GridTriplet {
    /// `h` must be strictly increasing with both refinement ratios above 1.1.
    pub fn new(h: [f64; 3], f: [f64; 3]) -> Result<Self, GciError> {
        if !(h[0] > 0.0 && h[1] > h[0] && h[2] > h[1]) {
            return Err(GciError::InvalidTriplet(format!(
                "grid sizes must be positive and strictly increasing, got {h:?}"
            )));
        }
        let r21 = h[1] / h[0];
        let r32 = h[2] / h[1];
        if r21 <= 1.1 || r32 <= 1.1 {
            return Err(GciError::InvalidTriplet(format!(
                "refinement ratios must exceed 1.1, got r21={r21:.3} r32={r32:.3}"
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(GciError::InvalidTriplet("non-finite solution value".into()));
        }
        Ok(Self { h, f })
    }

    pub fn fine_solution(&self) -> f64 {
        self.f[0]
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ConvergenceReport {
    /// Observed order of convergence; `None` when all three solutions agree
    /// exactly and no order can be inferred.
    pub order_p: Option<f64>,
    pub f_extrapolated: f64,
    pub gci_fine: f64,
    /// order_p > 1, the filter for trusting the extrapolation.
    pub converged: bool,
    /// Deltas share a sign; oscillatory triplets are flagged, not rejected.
    pub monotone: bool,
}

pub fn analyze_convergence(t: &GridTriplet) -> Result<ConvergenceReport, GciError> {
    analyze_convergence_with_safety(t, DEFAULT_SAFETY_FACTOR)
}

pub fn analyze_convergence_with_safety(
    t: &GridTriplet,
    safety_factor: f64,
) -> Result<ConvergenceReport, GciError> {
    let [f1, f2, f3] = t.f;
    let e21 = f2 - f1;
    let e32 = f3 - f2;
    if e21 == 0.0 && e32 == 0.0 {
        // exact convergence: nothing left to extrapolate
        return Ok(ConvergenceReport {
            order_p: None,
            f_extrapolated: f1,
            gci_fine: 0.0,
            converged: true,
            monotone: true,
        });
    }
    if e21 == 0.0 || e32 == 0.0 {
        return Err(GciError::DegenerateDeltas(format!(
            "one delta is zero (e21={e21}, e32={e32}); order undefined"
        )));
    }
    let r21 = t.h[1] / t.h[0];
    let r32 = t.h[2] / t.h[1];
    let ratio = e32 / e21;
    let s = ratio.signum();
    let monotone = ratio > 0.0;

    // fixed point for the observed order, seeded with the constant-ratio
    // estimate; relaxation keeps the iteration contractive when r21 << r32.
    // The iterate is kept signed and |p| taken at the end, which avoids the
    // reflection instability an in-loop absolute value introduces.
    let omega = (r21.ln() / r32.ln()).min(1.0);
    let lr = ratio.abs().ln();
    let mut p = if monotone { lr / r32.ln() } else { lr / r21.ln() };
    let mut converged_iter = false;
    for _ in 0..P_MAX_ITER {
        let arg = (r21.powf(p) - s) / (r32.powf(p) - s);
        if arg <= 0.0 || !arg.is_finite() {
            return Err(GciError::NoConvergence);
        }
        let target = (lr + arg.ln()) / r21.ln();
        if !target.is_finite() {
            return Err(GciError::NoConvergence);
        }
        let dp = target - p;
        p += omega * dp;
        if dp.abs() < P_TOL {
            converged_iter = true;
            break;
        }
    }
    if !converged_iter {
        return Err(GciError::NoConvergence);
    }
    let p = p.abs();
    let rp = r21.powf(p);
    let f_extrapolated = (rp * f1 - f2) / (rp - 1.0);
    let gci_fine = safety_factor * ((f1 - f2) / f1).abs() / (rp - 1.0);
    Ok(ConvergenceReport {
        order_p: Some(p),
        f_extrapolated,
        gci_fine,
        converged: p > 1.0,
        monotone,
    })
}

/// One batch entry: a label (typically the start timestamp) with its triplet.
pub type BatchEntry = (String, GridTriplet);

#[derive(Debug)]
pub struct BatchReport {
    pub per_entry: Vec<(String, Result<ConvergenceReport, GciError>)>,
    pub summary: BatchSummary,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BatchSummary {
    pub total_entries: usize,
    /// Entries that are both monotone and have order above 1.
    pub converged_entries: usize,
    pub converged_fraction: f64,
    /// Mean fine-grid GCI over converged entries.
    pub mean_gci: f64,
    /// Mean fine-grid voyaging time over converged entries, hours.
    pub mean_vt_hours: f64,
    /// mean_gci * mean_vt_hours.
    pub mean_abs_error_hours: f64,
}

/// Analyze every entry; individual failures are recorded, never fatal.
/// Oscillatory or low-order entries are excluded from the converged means.
pub fn batch_convergence(entries: &[BatchEntry], safety_factor: f64) -> BatchReport {
    let mut per_entry = Vec::with_capacity(entries.len());
    let mut n_conv = 0usize;
    let mut sum_gci = 0.0;
    let mut sum_vt = 0.0;
    for (label, triplet) in entries {
        let res = analyze_convergence_with_safety(triplet, safety_factor);
        if let Ok(r) = &res {
            if r.converged && r.monotone {
                n_conv += 1;
                sum_gci += r.gci_fine;
                sum_vt += triplet.fine_solution();
            }
        }
        per_entry.push((label.clone(), res));
    }
    let mean_gci = if n_conv > 0 { sum_gci / n_conv as f64 } else { 0.0 };
    let mean_vt = if n_conv > 0 { sum_vt / n_conv as f64 } else { 0.0 };
    BatchReport {
        summary: BatchSummary {
            total_entries: entries.len(),
            converged_entries: n_conv,
            converged_fraction: if entries.is_empty() {
                0.0
            } else {
                n_conv as f64 / entries.len() as f64
            },
            mean_gci,
            mean_vt_hours: mean_vt,
            mean_abs_error_hours: mean_gci * mean_vt,
        },
        per_entry,
    }
}

/// Parse batch input CSV with columns start_iso, dn, vt_hours. Each start
/// must carry exactly three grid sizes.
pub fn read_batch_csv(text: &str) -> Result<Vec<BatchEntry>, GciError> {
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("start_iso")) {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 3 {
            return Err(GciError::InvalidTriplet(format!(
                "line {}: expected start_iso,dn,vt_hours",
                i + 1
            )));
        }
        let dn: f64 = cells[1]
            .parse()
            .map_err(|_| GciError::InvalidTriplet(format!("line {}: bad dn", i + 1)))?;
        let vt: f64 = cells[2]
            .parse()
            .map_err(|_| GciError::InvalidTriplet(format!("line {}: bad vt", i + 1)))?;
        groups.entry(cells[0].to_string()).or_default().push((dn, vt));
    }
    let mut entries = Vec::with_capacity(groups.len());
    for (label, mut rows) in groups {
        if rows.len() != 3 {
            return Err(GciError::InvalidTriplet(format!(
                "start {label}: expected 3 grid sizes, got {}",
                rows.len()
            )));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        entries.push((
            label,
            GridTriplet::new(
                [rows[0].0, rows[1].0, rows[2].0],
                [rows[0].1, rows[1].1, rows[2].1],
            )?,
        ));
    }
    Ok(entries)
}

/// Report CSV: start_iso, p, f_ext, gci, converged, monotone. Failed entries
/// carry the error text in the p column.
pub fn write_batch_csv<W: Write>(report: &BatchReport, mut w: W) -> std::io::Result<()> {
    writeln!(w, "start_iso,p,f_ext,gci,converged,monotone")?;
    for (label, res) in &report.per_entry {
        match res {
            Ok(r) => writeln!(
                w,
                "{},{},{},{},{},{}",
                label,
                r.order_p.map_or("exact".to_string(), |p| p.to_string()),
                r.f_extrapolated,
                r.gci_fine,
                r.converged,
                r.monotone
            )?,
            Err(e) => writeln!(w, "{label},error: {e},,,false,false")?,
        }
    }
    Ok(())
}
