//! Shot-budget-aware Bayesian optimization for variational quantum circuits.
//!
//! The crate is organised bottom-up:
//!
//! - [`gp`]: kernels, exact Gaussian process posterior and marginal-likelihood fitting.
//! - [`acquisition`]: LCB / low-shot-residual LCB and a multistart optimizer over the
//!   periodic box `[0, 2π)^d`.
//! - [`objective`]: synthetic cosine objectives, a statevector simulator for layered
//!   RY + CNOT ansatz circuits, and the Gaussian shot-noise model.
//! - [`engine`]: vanilla BO and low-shot-residual BO loops with strict budget accounting.
//! - [`harness`]: config-driven replicated experiments, regret curves, CSV/SVG output
//!   and rank-sum comparison of arms.

pub mod acquisition;
pub mod engine;
pub mod error;
pub mod gp;
pub mod harness;
pub mod objective;
pub mod param;
pub mod rng;
pub mod search;

pub use error::{Error, Result};
pub use param::ParamVector;
