//! Geometric-approach disturbance decoupling by dynamic output feedback for
//! linear systems whose feedthrough matrices may all be nonzero.

pub mod cli;
pub mod ddp;
pub mod error;
pub mod fixed_poles;
pub mod geometry;
pub mod linalg;
pub mod spectrum;
pub mod subspace;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::Quadruple;
pub use linalg::{Matrix, Tolerances};
pub use spectrum::SpectrumMultiset;
pub use subspace::Subspace;
