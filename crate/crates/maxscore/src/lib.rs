//! Simulation studies, file formats and the command line for maximum score
//! estimation. The numerical work lives in `maxscore-core`; this crate adds
//! TOML configuration, CSV and SVG output, a parallel study driver and a
//! report runner for the verification checks.

pub mod cli;
pub mod config;
pub mod dataset_csv;
pub mod emit;
pub mod experiments;
pub mod verify;
