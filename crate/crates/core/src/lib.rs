//! Simulation and analysis of election surprise on biased social networks.
//!
//! Voters fall into preference classes, connect through a stochastic block
//! model, and estimate the class populations from their own neighbourhood.
//! A voter is surprised when the perceived winner is not the true winner.
//! The crate samples such elections, measures surprise by Monte Carlo,
//! evaluates the matching closed-form predictions, and runs a geographic
//! referendum pipeline.
//!
//! ```
//! use election_surprise::model::{ClassSystem, ScoringRule, RuleKind};
//! use election_surprise::perception::{true_scores, winner, TieBreak};
//!
//! let cs = ClassSystem::build(2)?;
//! let rule = ScoringRule::preset(RuleKind::Plurality, 2)?;
//! let scores = true_scores(&[3.0, 2.0], &rule, &cs)?;
//! assert_eq!(winner(&scores, &TieBreak::default()), 0);
//! # Ok::<(), election_surprise::Error>(())
//! ```

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;

pub mod brexit;
pub mod genesis;
pub mod geo;
pub mod model;
pub mod perception;
pub mod rng;
pub mod stats;
pub mod surprise;
pub mod theory;

pub use error::{Error, Result};
pub use rng::RngSeed;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/genesis.md")]
    mod genesis {}
    #[doc = include_str!("../../../book/src/perception.md")]
    mod perception {}
    #[doc = include_str!("../../../book/src/surprise.md")]
    mod surprise {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
    #[doc = include_str!("../../../book/src/referendum.md")]
    mod referendum {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
