//! Exact and simulated analysis of treasure search games.
//!
//! A hider places `d` treasures behind `n` doors. Each round the searcher
//! names up to `k` doors; if none of them still hides a treasure the searcher
//! loses, otherwise one treasure among the named doors is revealed. The
//! searcher wins on finding all `d`.
//!
//! [`solver`] computes exact values with rational arithmetic, [`montecarlo`]
//! simulates strategy pairs, and [`young`] builds the continuation tables
//! that drive the equalizing strategies in [`strategies`].

pub mod combinatorics;
pub mod error;
pub mod game;
pub mod montecarlo;
pub mod par;
pub mod rational;
pub mod solver;
pub mod strategies;
pub mod young;

pub use combinatorics::{Allocation, Occupancy, Partition};
pub use error::{Error, Result};
pub use game::{GameConfig, GuessSet, History, RevealRule};
pub use rational::Rational;
