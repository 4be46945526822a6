//! Chaos-decomposition calculus on Poisson, compound Poisson and Gamma
//! spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`measures`]: windows, test functions, quadrature, intensity and Lévy
//!   measures, Laplace functionals and samplers.
//! * [`configuration`]: finite atomic measures and the Σ transport map.
//! * [`series`]: truncated power series and set-partition combinatorics.
//! * [`charlier`]: Poisson-side kernels, gradients, creation operators and
//!   Fock-space operators.
//! * [`compound`]: the same calculus transported to compound Poisson space.
//! * [`gamma`]: Laguerre kernels and the partition-weighted Gamma inner
//!   product.
//! * [`suites`]: the verification experiments, each producing a [`Report`].
//!
//! Monte Carlo work is split into fixed batches, each driven by its own
//! ChaCha stream, and reduced in batch order. With the `parallel` feature
//! (on by default) batches run on rayon; results are bit-identical to the
//! sequential path.

pub mod charlier;
pub mod compound;
pub mod configuration;
pub mod error;
pub mod gamma;
pub mod hexfloat;
pub mod mc;
pub mod measures;
pub mod report;
pub mod rng;
pub mod series;
pub mod stats;
pub mod suites;

pub use error::{Error, Result};
pub use report::{IdentityCheck, Report};
