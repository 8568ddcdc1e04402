use num_traits::{One, Zero};

use crate::combinatorics::{binomial, enumerate_allocations, Allocation};
use crate::error::{Error, Result};
use crate::game::{initial_state, reveal_distribution, reveal_options, apply_guess, GameConfig, GameState, GuessSet, History, RevealRule, Status};
use crate::par;
use crate::rational::{from_int, ratio, Rational};
use crate::strategies::{PTableSearcher, SearcherStrategy};
use crate::young::AllocationValue;

use super::{Budget, Method, NodeCounter, ValueReport};

/// Exact probability that `searcher` wins against a fixed allocation.
///
/// Reveals follow `config.reveal`: a chance rule is averaged over, an
/// adversarial reveal takes the worst door for the searcher at every step.
/// Table-driven strategies take a lumped route that treats empty never-guessed
/// doors as interchangeable; everything else walks the full history tree.
pub fn evaluate_exact(config: &GameConfig, searcher: &dyn SearcherStrategy, allocation: &Allocation, budget: &Budget) -> Result<Rational> {
    match searcher.as_ptable() {
        Some(table) => evaluate_table(config, table, allocation, budget),
        None => evaluate_generic(config, searcher, allocation, budget),
    }
}

/// The full history-tree walk, usable with any strategy.
pub fn evaluate_generic(config: &GameConfig, searcher: &dyn SearcherStrategy, allocation: &Allocation, budget: &Budget) -> Result<Rational> {
    let state = initial_state(config, allocation)?;
    let mut counter = NodeCounter::new(budget.nodes);
    let mut history = History::new();
    walk(config.reveal, searcher, &state, &mut history, &mut counter)
}

fn walk(reveal: RevealRule, searcher: &dyn SearcherStrategy, state: &GameState, history: &mut History, counter: &mut NodeCounter) -> Result<Rational> {
    counter.tick()?;
    match state.status {
        Status::Won => return Ok(Rational::one()),
        Status::Lost => return Ok(Rational::zero()),
        Status::Ongoing => {}
    }
    let mut total = Rational::zero();
    for (guess, p) in searcher.guess_distribution(history)? {
        let value = match reveal_distribution(state, guess, reveal) {
            Some(dist) => {
                let mut acc = Rational::zero();
                for (door, q) in dist {
                    acc += q * child(reveal, searcher, state, history, guess, door, counter)?;
                }
                acc
            }
            None => {
                let mut worst: Option<Rational> = None;
                for door in reveal_options(state, guess) {
                    let v = child(reveal, searcher, state, history, guess, door, counter)?;
                    if worst.as_ref().is_none_or(|w| v < *w) {
                        worst = Some(v);
                    }
                }
                worst.unwrap_or_else(Rational::zero)
            }
        };
        total += p * value;
    }
    Ok(total)
}

fn child(
    reveal: RevealRule,
    searcher: &dyn SearcherStrategy,
    state: &GameState,
    history: &mut History,
    guess: GuessSet,
    door: usize,
    counter: &mut NodeCounter,
) -> Result<Rational> {
    let next = apply_guess(state, guess, Some(door))?;
    history.push(guess, Some(door));
    let v = walk(reveal, searcher, &next, history, counter);
    history.pop();
    v
}

struct TableWalk<'a> {
    strategy: &'a PTableSearcher,
    reveal: RevealRule,
    k: usize,
    d: usize,
}

/// Mutable position of a table strategy against one allocation.
#[derive(Clone)]
struct TablePos {
    remaining: Vec<u32>,
    fresh: u64,
    counts: Vec<u32>,
    current: Option<usize>,
    found: usize,
}

fn evaluate_table(config: &GameConfig, strategy: &PTableSearcher, allocation: &Allocation, budget: &Budget) -> Result<Rational> {
    initial_state(config, allocation)?;
    let w = TableWalk { strategy, reveal: config.reveal, k: config.k, d: config.d };
    let pos = TablePos {
        remaining: allocation.counts().to_vec(),
        fresh: crate::game::full_mask(config.n),
        counts: Vec::new(),
        current: None,
        found: 0,
    };
    let mut counter = NodeCounter::new(budget.nodes);
    w.value(&pos, &mut counter)
}

impl TableWalk<'_> {
    fn value(&self, pos: &TablePos, counter: &mut NodeCounter) -> Result<Rational> {
        counter.tick()?;
        if pos.found == self.d {
            return Ok(Rational::one());
        }
        let p = match pos.current {
            None => Rational::zero(),
            Some(_) => self.strategy.continue_probability(&pos.counts)?,
        };
        let q = Rational::one() - &p;
        let mut total = Rational::zero();
        if !p.is_zero() {
            total += p * self.branch(pos, true, self.k - 1, counter)?;
        }
        if !q.is_zero() {
            total += q * self.branch(pos, false, self.k, counter)?;
        }
        Ok(total)
    }

    /// Average over uniformly chosen `take`-subsets of fresh doors, grouped
    /// by which treasure doors they contain.
    fn branch(&self, pos: &TablePos, keep_current: bool, take: usize, counter: &mut NodeCounter) -> Result<Rational> {
        let fresh_total = pos.fresh.count_ones() as u64;
        let ways = binomial(fresh_total, take as u64);
        if ways.is_zero() {
            return Err(Error::DoorBudget { needed: take, available: fresh_total as usize });
        }
        let treasure_doors: Vec<usize> = crate::game::GuessSet::from_bits(pos.fresh)
            .doors()
            .filter(|&d| pos.remaining[d] > 0)
            .collect();
        let empty_fresh: Vec<usize> = crate::game::GuessSet::from_bits(pos.fresh)
            .doors()
            .filter(|&d| pos.remaining[d] == 0)
            .collect();
        let mut acc = Rational::zero();
        for mask in 0u32..(1u32 << treasure_doors.len()) {
            let hit: Vec<usize> = (0..treasure_doors.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| treasure_doors[i])
                .collect();
            if hit.len() > take {
                continue;
            }
            let pad = take - hit.len();
            let count = binomial(empty_fresh.len() as u64, pad as u64);
            if count.is_zero() {
                continue;
            }
            // concrete representative: the lowest empty fresh doors
            let mut guess = GuessSet::from_doors(hit.iter().copied().chain(empty_fresh.iter().copied().take(pad)));
            if keep_current {
                guess.insert(pos.current.expect("continuation needs a current door"));
            }
            let v = self.after_guess(pos, guess, counter)?;
            if !v.is_zero() {
                acc += v * from_int(count);
            }
        }
        Ok(acc / from_int(ways))
    }

    fn after_guess(&self, pos: &TablePos, guess: GuessSet, counter: &mut NodeCounter) -> Result<Rational> {
        let options: Vec<usize> = guess.doors().filter(|&d| pos.remaining[d] > 0).collect();
        if options.is_empty() {
            return Ok(Rational::zero());
        }
        match self.reveal {
            RevealRule::Adversarial => {
                let mut worst: Option<Rational> = None;
                for &door in &options {
                    let v = self.value(&self.advance(pos, guess, door), counter)?;
                    if worst.as_ref().is_none_or(|w| v < *w) {
                        worst = Some(v);
                    }
                }
                Ok(worst.expect("nonempty options"))
            }
            RevealRule::LowestIndex => self.value(&self.advance(pos, guess, options[0]), counter),
            RevealRule::UniformDoors => {
                let mut acc = Rational::zero();
                for &door in &options {
                    acc += self.value(&self.advance(pos, guess, door), counter)?;
                }
                Ok(acc / from_int(options.len() as u64))
            }
            RevealRule::UniformTreasures => {
                let total: u32 = options.iter().map(|&d| pos.remaining[d]).sum();
                let mut acc = Rational::zero();
                for &door in &options {
                    acc += self.value(&self.advance(pos, guess, door), counter)? * ratio(pos.remaining[door] as i64, total as i64);
                }
                Ok(acc)
            }
        }
    }

    fn advance(&self, pos: &TablePos, guess: GuessSet, door: usize) -> TablePos {
        let mut next = pos.clone();
        next.remaining[door] -= 1;
        next.fresh &= !guess.bits();
        next.found += 1;
        if pos.current == Some(door) {
            *next.counts.last_mut().expect("current door has a count") += 1;
        } else {
            next.counts.push(1);
            next.current = Some(door);
        }
        next
    }
}

/// Minimum over allocations of [`evaluate_exact`]: what `searcher` is
/// guaranteed against any hider.
pub fn hider_best_response_value(config: &GameConfig, searcher: &dyn SearcherStrategy, budget: &Budget) -> Result<ValueReport> {
    let allocations = enumerate_allocations(config.n, config.d, config.occupancy);
    let values = par::try_map(&allocations, |a| {
        evaluate_exact(config, searcher, a, budget).map(|value| AllocationValue { allocation: a.clone(), value })
    })?;
    let value = values
        .iter()
        .map(|v| v.value.clone())
        .min()
        .ok_or_else(|| Error::Internal("no allocations".into()))?;
    let mut report = ValueReport::new(config, value, Method::HiderBestResponse);
    report.strategy = Some(searcher.name());
    report.allocation_values = Some(values);
    Ok(report)
}
