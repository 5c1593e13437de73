//! Kernel density estimation under Wasserstein-bounded contamination.
//!
//! The crate is organized around five subsystems:
//!
//! - [`density`]: Hölder-smooth base densities, compactly supported mean-zero
//!   bump perturbations, divergence fields, and numerical smoothness checks.
//! - [`contamination`]: adversaries with certified `W_{q,r}` budgets (pointwise
//!   bounded map shifts and density perturbations) plus the Talagrand-style
//!   budget bound used for comparison.
//! - [`transport`]: exact Wasserstein costs at desk scale (quantile coupling in
//!   one dimension, exact assignment for small point clouds) and certified
//!   upper bounds from the dynamic formulation of optimal transport.
//! - [`estimator`]: kernel density estimation, classical and
//!   contamination-aware bandwidth rules, and bias/risk bound evaluators.
//! - [`risk`]: Monte Carlo risk sweeps over `n` and `epsilon` grids, log-log
//!   rate fitting, and the exponent tables the sweeps are checked against.
//!
//! Everything is deterministic given explicit seeds; see [`numeric::derive_seed`]
//! for the stream-splitting contract.

pub mod contamination;
pub mod density;
pub mod error;
pub mod estimator;
pub mod numeric;
pub mod profiles;
pub mod quad;
pub mod risk;
pub mod transport;

mod assignment;

pub use error::{Error, Result};
