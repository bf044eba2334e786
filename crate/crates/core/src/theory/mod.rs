//! Executable checks of margin, curvature, packing and divergence properties.

pub mod cap;
pub mod curvature;
pub mod divergence;
pub mod margin;
pub mod minimax;
pub mod multinomial;
pub mod packing;

use alloc::string::String;

use serde::{Deserialize, Serialize};

/// One machine-readable check result: `check,params,estimate,bound,stderr,pass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub params: String,
    pub estimate: f64,
    pub bound: f64,
    pub stderr: f64,
    pub pass: bool,
}
