//! Minimum-cost visiting orders over phase-space point sets.
//!
//! Points live in `[-1, 1]^m` where the first `m/2` coordinates are positions
//! and the last `m/2` the matching velocities. Any two points are joined by a
//! cubic trajectory whose duration is shrunk until its peak acceleration meets
//! a bound; the duration (time cost) or the integral of squared acceleration
//! (energy cost) of that trajectory is the branch cost between the points.
//!
//! On top of the dense ordered-pair [`CostMatrix`] the crate offers exhaustive
//! enumeration, a randomized nearest-neighbor heuristic and uniform random path
//! sampling, plus the statistics used to compare them.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel drivers
//! and the command line front end live in the `phasetour` crate.

#![no_std]

extern crate alloc;

mod error;

pub mod costspace;
pub mod grid;
pub mod rng;
pub mod search;
pub mod stats;
pub mod trajectory;

pub use crate::costspace::{CostKind, CostMatrix};
pub use crate::error::{Error, Result};
pub use crate::grid::{Grid, GridKind, PhasePoint};
pub use crate::search::{Path, Regime, SearchResult, TieLog};
pub use crate::trajectory::{AccelBound, CubicTraj};
