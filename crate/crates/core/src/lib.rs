//! Finite-dimensional Dirichlet forms.
//!
//! Forms live on a finite [`MeasureSpace`] and have domains given by node
//! supports. The crate computes the active main part and killing part of a
//! form, checks semigroup domination on both the kernel and the coefficient
//! level, computes capacities, and constructs, recognizes and enumerates the
//! forms sandwiched between a Dirichlet form and its active main part.

pub mod capacity;
pub mod cli;
pub mod decomposition;
pub mod domination;
pub mod error;
pub mod form;
pub mod measure_rep;
pub mod models;
pub mod nodeset;
pub mod problem;
pub mod random;
pub mod report;
pub mod sandwich;
pub mod space;
pub mod tol;

pub use error::{FormError, Result};
pub use form::{GraphForm, QuadForm};
pub use nodeset::NodeSet;
pub use space::MeasureSpace;

pub use nalgebra::{DMatrix, DVector};

/// Library version, recorded in report headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
