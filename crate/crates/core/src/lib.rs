//! Traveling fronts of the FitzHugh–Nagumo cable model on straight and warped
//! cylinders: operator assembly, IMEX simulation, front computation and the
//! spectral analysis of the linearization.
//!
//! See the `examples/` directory.

pub mod banded;
pub mod config;
pub mod error;
pub mod front;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod model;
pub mod norms;
pub mod operators;
pub mod runner;
pub mod sparse;
pub mod spectral;
pub mod timestepper;

pub use error::{Error, Result};
pub use front::{compute_front, FrontOptions, FrontProfile};
pub use geometry::{MetricSample, ProfileKind, SurfaceProfile};
pub use grid::{Field, Grid1D, Grid2D};
pub use model::ModelParams;
pub use operators::{assemble_laplace_beltrami, AssembledOperator, AxialScheme, MovingOps};
pub use timestepper::{ImexConfig, Scheme, Trajectory};
