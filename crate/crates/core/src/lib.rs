//! Graphical mean curvature flow of maps between flat tori, with numerical
//! monitors for the preserved quantities, pointwise identities and curvature
//! decay estimates of area-decreasing flows.
//!
//! * [`geometry`], [`frame`], [`field`]: pointwise differential geometry of graphs.
//! * [`flow`]: explicit RK4 time stepping of the nonparametric flow.
//! * [`monitor`]: bound checks and identity residuals.
//! * [`lagrangian`]: potential-generated Lagrangian data and `J`-adapted frames.
//! * [`experiment`]: configuration, runs, file formats and sweeps.

pub mod error;
pub mod experiment;
pub mod field;
pub mod flow;
pub mod frame;
pub mod geometry;
pub mod grid;
pub mod lagrangian;
pub mod linalg;
pub mod monitor;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{Codim, JacobianField, MapField};
pub use flow::{Flow, FlowState, StepperConfig};
pub use geometry::{GeometrySnapshot, TensorSValues};
pub use grid::PeriodicGrid;
pub use spectral::Spectral;
