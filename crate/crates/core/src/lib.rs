//! Spatially adaptive projective integration for stiff hyperbolic balance
//! laws with spatially varying relaxation times.
//!
//! The crate covers the full workbench: moment models from rarefied gases
//! ([`model`]), PVM finite-volume discretizations and their semi-discrete
//! operators ([`pvm`], [`operator`], [`rhs`]), Gershgorin cluster analysis of
//! the operator spectrum ([`spectral`]), the FE/PFE integrators and their
//! spatially adaptive AFE/APFE/APPFE variants with interface buffer
//! interpolation ([`stepping`], [`transition`]), closed-form stability bounds
//! ([`stability`]), and the speedup model ([`speedup`]).

pub mod driver;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod operator;
pub mod pvm;
pub mod rhs;
pub mod spectral;
pub mod speedup;
pub mod stability;
pub mod stepping;
pub mod transition;

pub use error::{Error, Result};
