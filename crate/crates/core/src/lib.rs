//! Segal's Γ-space machine, computed combinatorially.
//!
//! Γ-spaces are functors from finite pointed sets to multisimplicial pointed
//! sets. Iterating the classifying-space construction `B` yields the levels of
//! a connective spectrum, whose homology is read off from normalized chains of
//! those levels once the values stabilize.

pub mod chains;
pub mod error;
pub mod gamma;
pub mod segal;
pub mod simplicial;
pub mod stable;

pub use error::{Error, Result};
