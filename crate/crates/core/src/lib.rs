//! Regular right-angled buildings as chamber systems, with the clump
//! unfolding construction, edge labelings, and verified coverings of
//! complexes of groups.

pub mod building;
pub mod cli;
pub mod clump;
pub mod cog;
pub mod config;
pub mod covering;
pub mod coxeter;
pub mod error;
pub mod graphprod;
pub mod groups;
pub mod symmetry;

pub use error::{Error, Result};
