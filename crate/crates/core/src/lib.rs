//! Minimum-time marine weather routing over a discretized great-circle
//! corridor, with grid-convergence (numerical error) analysis and linear
//! performance-uncertainty sweeps.
//!
//! The crate is organized around the workflow:
//! [`grid`] discretizes the corridor, [`env`] supplies interpolated weather,
//! [`perf`] turns conditions into arc travel times, [`router`] solves the
//! time-dependent shortest path, [`gci`] quantifies discretization error,
//! and [`sweep`] orchestrates the full uncertainty study.

pub mod env;
pub mod gci;
pub mod geo;
pub mod grid;
pub mod perf;
pub mod router;
pub mod sweep;
pub mod time;
