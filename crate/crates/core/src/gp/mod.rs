//! Gaussian process regression on the periodic box.

mod fit;
mod kernel;
mod model;
mod simplex;

pub use fit::{fit_hyperparameters, FitConfig, FitOutcome, Hyperparameters, MeanMode};
pub use kernel::{KernelFamily, KernelSpec, Smoothness};
pub use model::GpModel;
pub use simplex::{minimize_bounded, SimplexResult};
