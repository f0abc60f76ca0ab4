//! Stable marked reduction of hyperelliptic curves z^2 = F(x) over a valued
//! field of residue characteristic 2.

pub mod coeffring;
pub mod decomp;
pub mod error;
pub mod gf2poly;
pub mod laurent;
pub mod model;
pub mod padroots;
pub mod sdf;
pub mod reduction;
pub mod smoothfiber;

pub use error::{Error, Result, Q};
