//! Martingale approximations for partial sums of stationary processes.
//!
//! Exact kernel algebra for finite Markov chains ([`poisson`], [`martingale`],
//! [`variance`]), variance splits for linear processes ([`linear`]) and seeded
//! Monte Carlo diagnostics for the limit theorems ([`clt`]).

pub mod chain;
pub mod clt;
pub mod error;
pub mod linear;
pub mod martingale;
pub mod model_file;
pub mod numeric;
pub mod poisson;
pub mod presets;
pub mod report;
pub mod rng;
pub mod variance;

pub use chain::{MarkovModel, PerStateFunction, Trajectory};
pub use error::{Error, Result};
