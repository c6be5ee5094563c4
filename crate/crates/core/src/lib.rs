#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod autgroup;
pub mod bundles;
pub mod error;
pub mod jaclattice;
pub mod modspace;
pub mod monodromy;
pub mod parabolic;
pub mod projective;
pub mod weierstrass;

pub use error::{Error, Result};
