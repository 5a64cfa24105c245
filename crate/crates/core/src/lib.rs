//! Simulation and exact checks for spectral and pivotal point processes of
//! planar continuum percolation.
//!
//! Two models are covered: the Boolean model with unit disks around a Poisson
//! process, and Poisson–Voronoi percolation with fair colors. On top of them sit
//! add-one and remove-one costs, pivotal and quenched pivotal sets, the
//! spectral intensity, exact Hoeffding (Fourier–Walsh) decompositions for small
//! marked configurations, and Monte Carlo drivers for dynamical percolation.
//!
//! Every random quantity is driven by a [`SeedSpec`], so results are
//! reproducible and independent of the thread count.

pub mod boolean;
pub mod cli;
pub mod difference;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod functional;
pub mod geometry;
pub mod hoeffding;
pub mod io;
pub mod model;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod unionfind;
pub mod voronoi;

pub use error::{Error, Result};
pub use geometry::{Point2, Rect, Region};
pub use model::{MarkedPoint, PointConfiguration, Sign};
pub use rng::SeedSpec;

/// Critical intensity of the Boolean model with unit disks, used as the default
/// intensity for Boolean experiments.
pub const LAMBDA_C: f64 = 0.359072;
