//! Brauer relations, integral group-ring lattices and Dokchitser constants,
//! all in exact arithmetic.
//!
//! The layers build on one another:
//! [`group`] (finite groups and subgroup classes), [`burnside`] (relations),
//! [`lattice`] (ZG-lattices, pairings, fixed sublattices), [`dokchitser`]
//! (the constants by both definitions), [`zoo`] (the dihedral `D_2p` lattices
//! and their tables) and [`ledger`] (audits of number-field fixtures).

pub mod arith;
pub mod burnside;
pub mod dokchitser;
pub mod error;
pub mod group;
pub mod lattice;
pub mod ledger;
pub mod linalg;
pub mod sampling;
pub mod suites;
pub mod zoo;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/groups.md")]
    mod groups {}
    #[doc = include_str!("../../../book/src/relations.md")]
    mod relations {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    mod lattices {}
    #[doc = include_str!("../../../book/src/constants.md")]
    mod constants {}
    #[doc = include_str!("../../../book/src/dihedral.md")]
    mod dihedral {}
    #[doc = include_str!("../../../book/src/ledger.md")]
    mod ledger {}
}
