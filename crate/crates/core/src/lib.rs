//! Pricing and risk for geometric-average Asian options under the hyperbolic
//! local volatility (HLV) model, with pseudo-random (Mersenne Twister) and
//! Sobol quasi-random path sampling.
//!
//! The pipeline is: uniform points ([`uniform`]) are mapped to Gaussians
//! ([`normal`]), assembled into Wiener paths by the incremental or Brownian
//! bridge construction ([`path`]), pushed through a log-space Euler scheme
//! ([`hlv`]) and priced ([`pricing`], [`greeks`]). [`harness`] runs RMSE
//! convergence studies over many independent replications.

pub mod cli;
pub mod engine;
pub mod error;
pub mod greeks;
pub mod harness;
pub mod hlv;
pub mod normal;
pub mod path;
pub mod pricing;
pub mod uniform;

pub use error::{Error, Result};
pub use greeks::{greeks, GreekReport, GreekShifts, Recycling};
pub use harness::{ConvergenceReport, ExperimentConfig, Method, Quantity};
pub use hlv::{AssetPath, HlvParams};
pub use normal::inv_normal_cdf;
pub use path::{BridgePlan, Construction, TimeGrid, WienerPath};
pub use pricing::{mc_price, OptionSpec, OptionStyle, PriceEstimate};
pub use uniform::{DirectionNumbers, SequenceKind, UniformStream};
