//! Extremal-dependence measures `μ(H,Q)` and `λ(Q,H)` for max-stable
//! distributions with unit Fréchet margins, their spectral Monte Carlo
//! estimators, and simulators for marginal and complete domination of
//! sample maxima.

pub mod checks;
pub mod domination;
pub mod error;
pub mod families;
pub mod grammar;
pub mod mc;
pub mod measures;
pub mod oracles;
pub mod quadrature;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
pub use families::{DistributionSpec, SpectralModel};
pub use rng::StreamKey;
