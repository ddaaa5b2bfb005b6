//! Generation in the limit over countable collections of infinite sets of
//! naturals: set expressions, generators, adversarial instances and a game
//! harness.

pub mod adversaries;
pub mod combinatorics;
pub mod domain;
pub mod error;
pub mod generators;
pub mod harness;
pub mod suites;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sets.md")]
    mod sets {}
    #[doc = include_str!("../../../book/src/game.md")]
    mod game {}
    #[doc = include_str!("../../../book/src/hard-instances.md")]
    mod hard_instances {}
    #[doc = include_str!("../../../book/src/identification.md")]
    mod identification {}
    #[doc = include_str!("../../../book/src/chains.md")]
    mod chains {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
