//! Classification of point-line minimal problems in three calibrated views
//! under partial visibility, restricted to arrangements where every line
//! passes through at most one point (PL1Ps).
//!
//! The pipeline:
//!
//! * [`signature`] enumerates the 845161 balanced signatures,
//! * [`symmetry`] reduces them modulo view relabeling and swaps,
//! * [`model`] expands signatures into explicit problems and implements
//!   reduction, lifting and terminal forms,
//! * [`ffalg`] and [`minimality`] decide minimality by exact Jacobian rank
//!   over prime fields,
//! * [`monodromy`] counts complex solutions by homotopy continuation,
//! * [`subfamilies`] extracts the PL0P, one-pin, five-point-extension and
//!   registration subfamilies,
//! * [`catalog`] persists results and drives the command-line pipelines.

pub mod catalog;
pub mod chart;
pub mod error;
pub mod ffalg;
pub mod minimality;
pub mod model;
pub mod monodromy;
pub mod scalar;
pub mod signature;
pub mod subfamilies;
pub mod symmetry;

pub use error::{Error, Result};
pub use model::{CatalogKind, Problem, ReduceMode};
pub use signature::Signature;
pub use symmetry::{ClassMode, ViewPermutation};
