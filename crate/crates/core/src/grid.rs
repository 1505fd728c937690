//! Rank-structured routing grid along the great circle between start and
//! finish. Interior ranks sit perpendicular to the great-circle line at equal
//! along-track fractions; start and finish are single-node virtual ranks.

use crate::geo::{
    destination_point, great_circle_intermediate, haversine_distance, initial_bearing, GeoPoint,
};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("node spacing {0} nm below the 1 nm accuracy floor")]
    SpacingTooSmall(f64),
    #[error("start and finish coincide")]
    CoincidentEndpoints,
    #[error("grid too small: route of {route_nm:.3} nm admits no interior rank at spacing {dn} nm")]
    GridTooSmall { route_nm: f64, dn: f64 },
    #[error("pole proximity: node at latitude {0:.3} exceeds |lat| 85")]
    PoleProximity(f64),
    #[error(transparent)]
    Geo(#[from] crate::geo::GeoError),
}

#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub start: GeoPoint,
    pub finish: GeoPoint,
    /// Maximum distance between adjacent nodes, nautical miles.
    pub node_spacing_dn: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), GridError> {
        if self.node_spacing_dn < 1.0 {
            return Err(GridError::SpacingTooSmall(self.node_spacing_dn));
        }
        if self.start == self.finish {
            return Err(GridError::CoincidentEndpoints);
        }
        Ok(())
    }
}

/// Identifies a node in the layered graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeId {
    Start,
    /// `rank` is 1-based over interior ranks; `pos` is 0-based within a rank,
    /// ordered from the most negative cross-track offset.
    Interior { rank: usize, pos: usize },
    Finish,
}

#[derive(Debug, Clone)]
pub struct RoutingGrid {
    spec: GridSpec,
    /// Interior ranks only; `ranks.len()` nodes per rank.
    ranks: Vec<Vec<GeoPoint>>,
}

impl RoutingGrid {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Number of interior ranks (equals nodes per rank).
    pub fn size(&self) -> usize {
        self.ranks.len()
    }

    pub fn start_node(&self) -> GeoPoint {
        self.spec.start
    }

    pub fn finish_node(&self) -> GeoPoint {
        self.spec.finish
    }

    pub fn interior(&self, rank: usize, pos: usize) -> GeoPoint {
        self.ranks[rank - 1][pos]
    }

    pub fn point(&self, id: NodeId) -> GeoPoint {
        match id {
            NodeId::Start => self.start_node(),
            NodeId::Interior { rank, pos } => self.interior(rank, pos),
            NodeId::Finish => self.finish_node(),
        }
    }

    /// Total node count: n*n interior plus the two endpoints.
    pub fn node_count(&self) -> usize {
        self.size() * self.size() + 2
    }
}

/// Build the discretized corridor. With route length D, the grid has
/// n = ceil(D / d_n) - 1 interior ranks of n nodes each, anchored on the
/// great circle at fractions k/(n+1) and spread symmetrically across track
/// at multiples of d_n.
pub fn build_grid(spec: GridSpec) -> Result<RoutingGrid, GridError> {
    spec.validate()?;
    let route_nm = haversine_distance(spec.start, spec.finish);
    let dn = spec.node_spacing_dn;
    let n = (route_nm / dn).ceil() as i64 - 1;
    if n < 1 {
        return Err(GridError::GridTooSmall { route_nm, dn });
    }
    let n = n as usize;

    let mut ranks = Vec::with_capacity(n);
    for k in 1..=n {
        let fraction = k as f64 / (n + 1) as f64;
        let anchor = great_circle_intermediate(spec.start, spec.finish, fraction)?;
        let along = initial_bearing(anchor, spec.finish)?;
        let mut rank = Vec::with_capacity(n);
        for pos in 0..n {
            let offset = (pos as f64 - (n as f64 - 1.0) / 2.0) * dn;
            let node = if offset == 0.0 {
                anchor
            } else if offset > 0.0 {
                destination_point(anchor, along + 90.0, offset)
            } else {
                destination_point(anchor, along - 90.0, -offset)
            };
            if node.lat().abs() > 85.0 {
                return Err(GridError::PoleProximity(node.lat()));
            }
            rank.push(node);
        }
        ranks.push(rank);
    }
    if spec.start.lat().abs() > 85.0 || spec.finish.lat().abs() > 85.0 {
        return Err(GridError::PoleProximity(spec.start.lat().max(spec.finish.lat())));
    }
    Ok(RoutingGrid { spec, ranks })
}

/// All nodes reachable in one step: the whole next rank, contracting to the
/// finish node after the last interior rank.
pub fn successors(grid: &RoutingGrid, id: NodeId) -> Vec<NodeId> {
    let n = grid.size();
    match id {
        NodeId::Start => (0..n).map(|pos| NodeId::Interior { rank: 1, pos }).collect(),
        NodeId::Interior { rank, .. } if rank < n => (0..n)
            .map(|pos| NodeId::Interior { rank: rank + 1, pos })
            .collect(),
        NodeId::Interior { .. } => vec![NodeId::Finish],
        NodeId::Finish => Vec::new(),
    }
}

/// Debug dump: rank, position, lat, lon. Start is rank 0, finish rank n+1.
pub fn write_grid_csv<W: Write>(grid: &RoutingGrid, mut w: W) -> std::io::Result<()> {
    writeln!(w, "rank,position,lat,lon")?;
    let s = grid.start_node();
    writeln!(w, "0,0,{},{}", s.lat(), s.lon())?;
    for (i, rank) in grid.ranks.iter().enumerate() {
        for (pos, p) in rank.iter().enumerate() {
            writeln!(w, "{},{},{},{}", i + 1, pos, p.lat(), p.lon())?;
        }
    }
    let f = grid.finish_node();
    writeln!(w, "{},0,{},{}", grid.size() + 1, f.lat(), f.lon())
}
