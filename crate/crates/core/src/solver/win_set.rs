use std::collections::BTreeSet;

use serde::Serialize;

use crate::combinatorics::{enumerate_allocations, Allocation};
use crate::error::{Error, Result};
use crate::game::{apply_guess, initial_state, reveal_options, GameConfig, GameState, History, Status};
use crate::strategies::SearcherStrategy;

/// Allocations a deterministic searcher is sure to find.
#[derive(Clone, Debug, Serialize)]
pub struct WinSet {
    pub strategy: String,
    pub allocations: BTreeSet<Allocation>,
}

impl WinSet {
    pub fn len(&self) -> usize {
        self.allocations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allocations.is_empty()
    }
}

/// Allocations won whatever door the hider reveals at each step.
///
/// `strategy` must put all mass on a single guess at every history it reaches.
pub fn deterministic_win_set(config: &GameConfig, strategy: &dyn SearcherStrategy) -> Result<WinSet> {
    let mut allocations = BTreeSet::new();
    for a in enumerate_allocations(config.n, config.d, config.occupancy) {
        let state = initial_state(config, &a)?;
        if always_wins(config, strategy, &state, &mut History::new())? {
            allocations.insert(a);
        }
    }
    Ok(WinSet { strategy: strategy.name(), allocations })
}

fn always_wins(config: &GameConfig, strategy: &dyn SearcherStrategy, state: &GameState, history: &mut History) -> Result<bool> {
    match state.status {
        Status::Won => return Ok(true),
        Status::Lost => return Ok(false),
        Status::Ongoing => {}
    }
    let dist = strategy.guess_distribution(history)?;
    let guess = match dist.as_slice() {
        [(g, p)] if num_traits::One::is_one(p) => *g,
        _ => return Err(Error::InvalidConfig(format!("strategy {} is not deterministic", strategy.name()))),
    };
    guess.check(config)?;
    let options = reveal_options(state, guess);
    if options.is_empty() {
        return Ok(false);
    }
    for door in options {
        let next = apply_guess(state, guess, Some(door))?;
        history.push(guess, Some(door));
        let won = always_wins(config, strategy, &next, history);
        history.pop();
        if !won? {
            return Ok(false);
        }
    }
    Ok(true)
}
