//! Obstructions to a lens space with a tight contact structure bounding the
//! Milnor fiber of a complex hypersurface singularity in `C^3`.
//!
//! The pipeline: expand `p/q` as a negative continued fraction
//! ([`contfrac`]), enumerate tight structures by rotation numbers and test
//! the vanishing of `c_1` ([`contact`]), then study the isometry group of the
//! plumbing lattice for an element of trace `-1` ([`lattice`]), combined in
//! the layered decision procedure of [`obstruct`].

pub mod cli;
pub mod contact;
pub mod contfrac;
pub mod error;
pub mod lattice;
pub mod obstruct;

pub use error::{Error, Result};
