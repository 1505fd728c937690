//! Time-dependent minimum-time path over the routing grid.
//!
//! The grid is a layered DAG with positive arc costs, so one label-setting
//! pass in rank order computes exact earliest arrivals. Each node's label is
//! the earliest time it can be reached; arcs are costed at the departure
//! label of the tail node.

use crate::env::{EnvError, EnvironmentField};
use crate::geo::GeoPoint;
use crate::grid::{NodeId, RoutingGrid};
use crate::perf::{arc_cost, PerformanceModel};
use crate::time::iso_from_hours;
use std::io::Write;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RouteError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct RouteVertex {
    pub node: NodeId,
    pub point: GeoPoint,
    /// Arrival time, hours since epoch.
    pub arrival: f64,
    /// Heading chosen for the arc leaving this vertex; none at the finish.
    pub heading_deg: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RouteResult {
    pub depart_t: f64,
    pub feasible: bool,
    /// Total voyage duration in hours; meaningful only when feasible.
    pub voyaging_time: f64,
    pub path: Vec<RouteVertex>,
}

/// Earliest-arrival labels over an abstract layered graph. `rank_sizes`
/// includes the virtual single-node start and finish layers. The cost
/// closure receives (from_rank, from_pos, to_pos, departure_time) and may
/// return +infinity for an impassable arc.
///
/// Ties in the minimization go to the lowest predecessor position, which the
/// ascending scan with a strict comparison provides.
pub fn solve_layered<F>(
    rank_sizes: &[usize],
    depart_t: f64,
    mut cost: F,
) -> Result<LayeredSolution, RouteError>
where
    F: FnMut(usize, usize, usize, f64) -> Result<f64, RouteError>,
{
    assert!(rank_sizes.len() >= 2, "need at least start and finish layers");
    let mut labels: Vec<Vec<f64>> = rank_sizes
        .iter()
        .map(|&n| vec![f64::INFINITY; n])
        .collect();
    let mut preds: Vec<Vec<usize>> = rank_sizes.iter().map(|&n| vec![usize::MAX; n]).collect();
    labels[0][0] = depart_t;
    for k in 0..rank_sizes.len() - 1 {
        for i in 0..rank_sizes[k] {
            let t = labels[k][i];
            if !t.is_finite() {
                continue;
            }
            for j in 0..rank_sizes[k + 1] {
                let c = cost(k, i, j, t)?;
                if !c.is_finite() {
                    continue;
                }
                let arrival = t + c;
                if arrival < labels[k + 1][j] {
                    labels[k + 1][j] = arrival;
                    preds[k + 1][j] = i;
                }
            }
        }
    }
    Ok(LayeredSolution { labels, preds })
}

#[derive(Debug)]
pub struct LayeredSolution {
    /// Earliest arrival per node, per layer.
    pub labels: Vec<Vec<f64>>,
    pub preds: Vec<Vec<usize>>,
}

impl LayeredSolution {
    pub fn finish_arrival(&self) -> f64 {
        self.labels[self.labels.len() - 1][0]
    }

    pub fn feasible(&self) -> bool {
        self.finish_arrival().is_finite()
    }

    /// Node position at each layer along the optimal path, start to finish.
    pub fn path_positions(&self) -> Vec<usize> {
        let mut rev = vec![0usize];
        let mut pos = 0usize;
        for k in (1..self.labels.len()).rev() {
            pos = self.preds[k][pos];
            rev.push(pos);
        }
        rev.reverse();
        rev
    }
}

/// Solve the minimum-time route on `grid` departing at `depart_t` (hours
/// since epoch). Infeasibility is reported in the result, not as an error.
pub fn shortest_path(
    grid: &RoutingGrid,
    model: &PerformanceModel,
    field: &EnvironmentField,
    depart_t: f64,
) -> Result<RouteResult, RouteError> {
    let n = grid.size();
    let mut rank_sizes = vec![1usize];
    rank_sizes.extend(std::iter::repeat_n(n, n));
    rank_sizes.push(1);

    let node_at = |layer: usize, pos: usize| -> NodeId {
        if layer == 0 {
            NodeId::Start
        } else if layer == n + 1 {
            NodeId::Finish
        } else {
            NodeId::Interior { rank: layer, pos }
        }
    };

    let solution = solve_layered(&rank_sizes, depart_t, |k, i, j, t| {
        let from = grid.point(node_at(k, i));
        let to = grid.point(node_at(k + 1, j));
        Ok(arc_cost(model, field, from, to, t)?.hours)
    })?;

    if !solution.feasible() {
        return Ok(RouteResult {
            depart_t,
            feasible: false,
            voyaging_time: f64::NAN,
            path: Vec::new(),
        });
    }

    let positions = solution.path_positions();
    let mut path = Vec::with_capacity(positions.len());
    for (layer, &pos) in positions.iter().enumerate() {
        let node = node_at(layer, pos);
        let arrival = solution.labels[layer][pos];
        let heading = if layer + 1 < positions.len() {
            let to = grid.point(node_at(layer + 1, positions[layer + 1]));
            Some(
                arc_cost(model, field, grid.point(node), to, arrival)?.heading_deg,
            )
        } else {
            None
        };
        path.push(RouteVertex {
            node,
            point: grid.point(node),
            arrival,
            heading_deg: heading,
        });
    }
    Ok(RouteResult {
        depart_t,
        feasible: true,
        voyaging_time: solution.finish_arrival() - depart_t,
        path,
    })
}

/// GeoJSON LineString with per-vertex arrival times and headings.
pub fn route_geojson(route: &RouteResult) -> serde_json::Value {
    let coords: Vec<serde_json::Value> = route
        .path
        .iter()
        .map(|v| serde_json::json!([v.point.lon(), v.point.lat()]))
        .collect();
    serde_json::json!({
        "type": "Feature",
        "geometry": { "type": "LineString", "coordinates": coords },
        "properties": {
            "feasible": route.feasible,
            "depart": iso_from_hours(route.depart_t),
            "voyaging_time_hours": route.voyaging_time,
            "arrivals": route.path.iter().map(|v| iso_from_hours(v.arrival)).collect::<Vec<_>>(),
            "headings_deg": route.path.iter().map(|v| v.heading_deg).collect::<Vec<_>>(),
        }
    })
}

/// CSV route dump: rank, lat, lon, arrival_hours (elapsed since departure).
pub fn write_route_csv<W: Write>(route: &RouteResult, mut w: W) -> std::io::Result<()> {
    writeln!(w, "rank,lat,lon,arrival_hours")?;
    for (rank, v) in route.path.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{}",
            rank,
            v.point.lat(),
            v.point.lon(),
            v.arrival - route.depart_t
        )?;
    }
    Ok(())
}
