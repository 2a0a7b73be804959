//! Construction and verification of Euclidean hypersurfaces that carry
//! nontrivial conformal infinitesimal variations.

pub mod artifacts;
pub mod bending;
pub mod config;
pub mod error;
pub mod gauss_param;
pub mod lorentz;
pub mod pair;
pub mod pde;
pub mod pipeline;
pub mod report;
pub mod surface;
pub mod verify;

pub use error::{Error, IndexRect, Location, Result};
pub use lorentz::{LightConeChart, LorentzTransform, LorentzVector};
pub use pde::{CoefficientField, CoefficientSource, GridFunction, GridSpec, PdeKind, VectorGrid};
pub use artifacts::Artifacts;
pub use config::JobConfig;
pub use pipeline::{generate, Generated};
pub use report::{Check, Report, Tol};
pub use verify::{verify, VerifyInput};
