//! Simultaneous confidence bands for kernel density, regression and
//! volatility estimates of dependent time series.

pub mod asymptotics;
pub mod bands;
pub mod calibration;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod pipeline;
pub mod processes;
pub mod quadrature;

pub use error::{ErrorClass, Result, ScbError};
pub use grid::EvaluationGrid;
pub use kernel::{BuiltinKernel, KernelConstants, KernelProfile};
