//! Reduced-bias estimation of the extreme value index for Pareto-type tails.
//!
//! The weighted log-spacings `Z_j = j log(X_{n-j+1,n} / X_{n-j,n})` of the top
//! order statistics are regressed on the covariate `C_j = (j/(k+1))^{-rho}` with
//! linearly decaying weights `W_j = 1 - j/(k+1)`. The intercept of that fit is
//! the extreme value index estimate; the slope absorbs the second-order bias.
//!
//! Modules, bottom up:
//!
//! - [`spacings`]: sample validation, log-spacings, weights and covariates.
//! - [`estimators`]: Hill, bias-corrected Hill, LS, ridge and WLS estimators.
//! - [`second_order`]: resolution of the second-order parameter `rho`.
//! - [`distributions`]: quantile functions and seeded samplers.
//! - [`montecarlo`]: replicated bias / MSE studies.
//! - [`asymptotics`]: finite-k moment sums, AMSE and normality diagnostics.

pub mod asymptotics;
pub mod distributions;
mod error;
pub mod estimators;
pub mod montecarlo;
pub mod rng;
pub mod second_order;
pub mod spacings;

pub use asymptotics::{amse, s_moments, standardized_statistic, AmseVariant, NormalityReport, SMoments};
pub use distributions::{DistributionSpec, Family};
pub use error::{Error, Result};
pub use estimators::{EstimatorId, EviPath, RegressionFit};
pub use montecarlo::{CellStats, ModelSimulationConfig, SimulationConfig, SimulationSummary};
pub use second_order::RhoMethod;
pub use spacings::{Covariates, LogSpacings, OrderedTail, WeightScheme};
