//! Maximum score estimation for binary and multinomial discrete choice
//! models in growing dimensions.
//!
//! The crate is `no_std` and only needs an allocator. It contains:
//!
//! - [`model`]: domain types, data-generating processes and the seeded
//!   random stream contract,
//! - [`score`]: empirical and population score functionals,
//! - [`estimators`]: exact, grid, smoothed, convex-surrogate and
//!   structural-risk-minimization estimators,
//! - [`theory`]: Monte Carlo and grid verification of margin, curvature,
//!   packing and divergence properties.
//!
//! IO, configuration files, parallel experiment drivers and the command
//! line live in the companion `maxscore` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod estimators;
pub mod linalg;
pub mod math;
pub mod model;
pub mod rng;
pub mod score;
pub mod theory;

pub use error::{Error, Result};
pub use model::{
    ar1_covariance, generate_binary_dataset, generate_multinomial_dataset, sample_unit_sphere, sgn,
    BinaryDataset, CovariateLaw, DgpSpec, ErrorLaw, MultinomialDataset, UnitVector,
};
pub use rng::SeedSpec;
pub use score::{McEstimate, ScoreValue};
