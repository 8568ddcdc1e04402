//! Rules of the treasure search game.
//!
//! The hider places `d` treasures behind `n` doors. Each round the searcher
//! names at most `k` doors; if none of them still hides a treasure the
//! searcher loses, otherwise one treasure behind one of the named doors is
//! revealed. The searcher wins once all `d` treasures are found, which takes
//! exactly `d` successful rounds.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{Allocation, Occupancy, Partition};
use crate::error::{Error, Result};
use crate::rational::{ratio, Rational};

/// Guess sets are bitmasks, so door indices must fit in a `u64`.
pub const MAX_DOORS: usize = 64;

/// Which treasure is disclosed when a guess covers several treasure doors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RevealRule {
    /// The hider picks; resolved by minimisation inside the solver.
    Adversarial,
    /// Uniform over guessed doors that still hide a treasure.
    UniformDoors,
    /// Proportional to the number of treasures left behind each guessed door.
    UniformTreasures,
    /// Lowest guessed door index that still hides a treasure.
    #[default]
    LowestIndex,
}

impl RevealRule {
    pub fn is_chance(self) -> bool {
        self != RevealRule::Adversarial
    }
}

impl fmt::Display for RevealRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RevealRule::Adversarial => "adversarial",
            RevealRule::UniformDoors => "uniform-doors",
            RevealRule::UniformTreasures => "uniform-treasures",
            RevealRule::LowestIndex => "lowest-index",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameConfig {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub occupancy: Occupancy,
    pub reveal: RevealRule,
}

impl GameConfig {
    pub fn new(n: usize, d: usize, k: usize, occupancy: Occupancy, reveal: RevealRule) -> Result<Self> {
        let cfg = GameConfig { n, d, k, occupancy, reveal };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn multi(n: usize, d: usize, k: usize) -> Result<Self> {
        Self::new(n, d, k, Occupancy::Multi, RevealRule::Adversarial)
    }

    pub fn single(n: usize, d: usize, k: usize) -> Result<Self> {
        Self::new(n, d, k, Occupancy::Single, RevealRule::Adversarial)
    }

    pub fn with_reveal(mut self, reveal: RevealRule) -> Self {
        self.reveal = reveal;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidConfig("n and d must be at least 1".into()));
        }
        if self.n > MAX_DOORS {
            return Err(Error::InvalidConfig(format!("at most {MAX_DOORS} doors supported")));
        }
        if self.k == 0 || self.k > self.n {
            return Err(Error::InvalidConfig(format!(
                "guess size k={} must satisfy 1 <= k <= n={}",
                self.k, self.n
            )));
        }
        if self.occupancy == Occupancy::Single && self.d > self.n {
            return Err(Error::InvalidConfig(format!(
                "single occupancy needs d={} <= n={}",
                self.d, self.n
            )));
        }
        Ok(())
    }
}

impl fmt::Display for GameConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(n={}, d={}, k={}, reveal={})",
            self.occupancy, self.n, self.d, self.k, self.reveal
        )
    }
}

/// A set of distinct doors named in one round.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GuessSet(u64);

impl GuessSet {
    pub fn from_bits(bits: u64) -> Self {
        GuessSet(bits)
    }

    pub fn from_doors<I: IntoIterator<Item = usize>>(doors: I) -> Self {
        GuessSet(doors.into_iter().fold(0u64, |acc, d| acc | (1u64 << d)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, door: usize) -> bool {
        door < MAX_DOORS && self.0 & (1u64 << door) != 0
    }

    pub fn insert(&mut self, door: usize) {
        self.0 |= 1u64 << door;
    }

    pub fn union(self, other: GuessSet) -> GuessSet {
        GuessSet(self.0 | other.0)
    }

    pub fn doors(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let d = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(d)
            }
        })
    }

    pub fn permute(self, perm: &[usize]) -> GuessSet {
        GuessSet::from_doors(self.doors().map(|d| perm[d]))
    }

    /// Rejects empty guesses, guesses above `k` doors and doors outside `0..n`.
    pub fn check(self, config: &GameConfig) -> Result<()> {
        if self.is_empty() {
            return Err(Error::IllegalGuess("empty guess".into()));
        }
        if self.len() > config.k {
            return Err(Error::IllegalGuess(format!(
                "{} doors guessed, at most {} allowed",
                self.len(),
                config.k
            )));
        }
        if config.n < MAX_DOORS && self.0 >> config.n != 0 {
            return Err(Error::IllegalGuess(format!("door index out of range for n={}", config.n)));
        }
        Ok(())
    }
}

impl fmt::Debug for GuessSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.doors()).finish()
    }
}

impl Serialize for GuessSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.doors())
    }
}

impl<'de> Deserialize<'de> for GuessSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doors = Vec::<usize>::deserialize(deserializer)?;
        if let Some(&bad) = doors.iter().find(|&&d| d >= MAX_DOORS) {
            return Err(serde::de::Error::custom(format!("door {bad} out of range")));
        }
        Ok(GuessSet::from_doors(doors))
    }
}

/// All guesses with between `min_size` and `max_size` doors out of `0..n`,
/// in increasing bitmask order.
pub fn all_guesses(n: usize, min_size: usize, max_size: usize) -> Vec<GuessSet> {
    let mut out = Vec::new();
    for size in min_size.max(1)..=max_size.min(n) {
        subsets_of(full_mask(n), size, &mut out);
    }
    out.sort();
    out
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Pushes every `size`-subset of the doors in `pool`.
pub fn subsets_of(pool: u64, size: usize, out: &mut Vec<GuessSet>) {
    let doors: Vec<usize> = GuessSet(pool).doors().collect();
    if size > doors.len() {
        return;
    }
    let m = doors.len();
    if size == 0 {
        out.push(GuessSet(0));
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(GuessSet::from_doors(idx.iter().map(|&i| doors[i])));
        let mut i = size;
        while i > 0 && idx[i - 1] == i - 1 + m - size {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// One round as the searcher sees it. `revealed == None` marks a loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub guess: GuessSet,
    pub revealed: Option<usize>,
}

/// The searcher's information set: every guess and the door each revealed
/// treasure came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct History {
    pub events: Vec<Event>,
}

impl History {
    pub fn new() -> Self {
        History::default()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn push(&mut self, guess: GuessSet, revealed: Option<usize>) {
        self.events.push(Event { guess, revealed });
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.events.pop()
    }

    pub fn with(&self, guess: GuessSet, revealed: Option<usize>) -> History {
        let mut h = self.clone();
        h.push(guess, revealed);
        h
    }

    /// Union of every door named so far.
    pub fn guessed(&self) -> GuessSet {
        self.events
            .iter()
            .fold(GuessSet::default(), |acc, e| acc.union(e.guess))
    }

    pub fn permute(&self, perm: &[usize]) -> History {
        History {
            events: self
                .events
                .iter()
                .map(|e| Event { guess: e.guess.permute(perm), revealed: e.revealed.map(|r| perm[r]) })
                .collect(),
        }
    }

    /// Found treasure counts per door, in order of first discovery.
    pub fn discovery_counts(&self) -> (Vec<u32>, Vec<usize>) {
        let mut order: Vec<usize> = Vec::new();
        let mut counts: Vec<u32> = Vec::new();
        for e in &self.events {
            if let Some(r) = e.revealed {
                match order.iter().position(|&d| d == r) {
                    Some(i) => counts[i] += 1,
                    None => {
                        order.push(r);
                        counts.push(1);
                    }
                }
            }
        }
        (counts, order)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ongoing,
    Won,
    Lost,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GameState {
    pub remaining: Vec<u32>,
    pub found: Vec<u32>,
    pub discovery_order: Vec<usize>,
    pub round: usize,
    pub status: Status,
    d: usize,
}

impl GameState {
    pub fn treasures(&self) -> usize {
        self.d
    }

    pub fn found_total(&self) -> usize {
        self.found.iter().map(|&c| c as usize).sum()
    }
}

pub fn initial_state(config: &GameConfig, allocation: &Allocation) -> Result<GameState> {
    allocation.validate(config.n, config.d, config.occupancy)?;
    Ok(GameState {
        remaining: allocation.counts().to_vec(),
        found: vec![0; config.n],
        discovery_order: Vec::new(),
        round: 0,
        status: Status::Ongoing,
        d: config.d,
    })
}

/// Guessed doors that still hide a treasure. Empty means the guess loses.
pub fn reveal_options(state: &GameState, guess: GuessSet) -> Vec<usize> {
    guess
        .doors()
        .filter(|&d| state.remaining.get(d).copied().unwrap_or(0) > 0)
        .collect()
}

/// Exact reveal probabilities under a chance rule; `None` for adversarial
/// reveal, and an empty list when the guess loses.
pub fn reveal_distribution(state: &GameState, guess: GuessSet, rule: RevealRule) -> Option<Vec<(usize, Rational)>> {
    let options = reveal_options(state, guess);
    if options.is_empty() {
        return Some(Vec::new());
    }
    match rule {
        RevealRule::Adversarial => None,
        RevealRule::LowestIndex => Some(vec![(options[0], ratio(1, 1))]),
        RevealRule::UniformDoors => {
            let m = options.len() as i64;
            Some(options.into_iter().map(|d| (d, ratio(1, m))).collect())
        }
        RevealRule::UniformTreasures => {
            let total: i64 = options.iter().map(|&d| state.remaining[d] as i64).sum();
            Some(
                options
                    .into_iter()
                    .map(|d| (d, ratio(state.remaining[d] as i64, total)))
                    .collect(),
            )
        }
    }
}

/// Draws a reveal under a chance rule. Returns `None` when the guess loses.
pub fn sample_reveal<R: Rng + ?Sized>(state: &GameState, guess: GuessSet, rule: RevealRule, rng: &mut R) -> Result<Option<usize>> {
    let mut options = guess.doors().filter(|&d| state.remaining[d] > 0).peekable();
    let first = match options.peek() {
        None => return Ok(None),
        Some(&d) => d,
    };
    match rule {
        RevealRule::Adversarial => Err(Error::AdversarialRevealUnsupported(
            "cannot sample a hider-chosen reveal".into(),
        )),
        RevealRule::LowestIndex => Ok(Some(first)),
        RevealRule::UniformDoors => {
            let all: Vec<usize> = options.collect();
            Ok(Some(all[rng.gen_range(0..all.len())]))
        }
        RevealRule::UniformTreasures => {
            let all: Vec<usize> = options.collect();
            let total: u32 = all.iter().map(|&d| state.remaining[d]).sum();
            let mut pick = rng.gen_range(0..total);
            for d in all {
                if pick < state.remaining[d] {
                    return Ok(Some(d));
                }
                pick -= state.remaining[d];
            }
            unreachable!("pick below total")
        }
    }
}

/// Plays one round. `revealed` must be one of [`reveal_options`], or `None`
/// exactly when there are no options.
pub fn apply_guess(state: &GameState, guess: GuessSet, revealed: Option<usize>) -> Result<GameState> {
    if state.status != Status::Ongoing {
        return Err(Error::IllegalGuess("game is already over".into()));
    }
    let options = reveal_options(state, guess);
    let mut next = state.clone();
    next.round += 1;
    match revealed {
        None => {
            if !options.is_empty() {
                return Err(Error::IllegalReveal(format!(
                    "guess {guess:?} hits a treasure, a door must be revealed"
                )));
            }
            next.status = Status::Lost;
        }
        Some(door) => {
            if !options.contains(&door) {
                return Err(Error::IllegalReveal(format!(
                    "door {door} is not a treasure door of guess {guess:?}"
                )));
            }
            next.remaining[door] -= 1;
            if next.found[door] == 0 {
                next.discovery_order.push(door);
            }
            next.found[door] += 1;
            if next.found_total() == next.d {
                next.status = Status::Won;
            }
        }
    }
    Ok(next)
}

/// Found counts in discovery order as a Young diagram, plus the door of the
/// latest discovery.
pub fn history_to_diagram(history: &History) -> Result<(Partition, usize)> {
    let (counts, order) = history.discovery_counts();
    let current = *order
        .last()
        .ok_or_else(|| Error::InconsistentHistory("no treasure found yet".into()))?;
    if counts.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::NonMonotone(counts));
    }
    Ok((Partition::new(counts)?, current))
}

/// Replays a history against a hidden allocation.
pub fn replay(config: &GameConfig, allocation: &Allocation, history: &History) -> Result<GameState> {
    let mut state = initial_state(config, allocation)?;
    for e in &history.events {
        e.guess.check(config)?;
        state = apply_guess(&state, e.guess, e.revealed)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate_allocations;
    use proptest::prelude::*;

    fn multi3() -> GameConfig {
        GameConfig::new(3, 3, 2, Occupancy::Multi, RevealRule::LowestIndex).unwrap()
    }

    fn g(doors: &[usize]) -> GuessSet {
        GuessSet::from_doors(doors.iter().copied())
    }

    #[test]
    fn config_invariants() {
        assert!(GameConfig::multi(3, 3, 2).is_ok());
        assert!(GameConfig::multi(3, 3, 4).is_err());
        assert!(GameConfig::multi(0, 3, 1).is_err());
        assert!(GameConfig::single(2, 3, 1).is_err());
    }

    #[test]
    fn initial_state_examples() {
        let s = initial_state(&multi3(), &Allocation(vec![2, 1, 0])).unwrap();
        assert_eq!(s.remaining, vec![2, 1, 0]);
        assert_eq!(s.status, Status::Ongoing);
        let single = GameConfig::single(3, 2, 2).unwrap();
        assert!(initial_state(&single, &Allocation(vec![1, 1, 0])).is_ok());
        let single3 = GameConfig::single(3, 3, 2).unwrap();
        assert!(initial_state(&single3, &Allocation(vec![2, 1, 0])).is_err());
    }

    #[test]
    fn reveal_option_examples() {
        let cfg = GameConfig::multi(3, 3, 2).unwrap();
        let s = initial_state(&cfg, &Allocation(vec![2, 1, 0])).unwrap();
        assert_eq!(reveal_options(&s, g(&[0, 2])), vec![0]);
        assert_eq!(reveal_options(&s, g(&[0, 1])), vec![0, 1]);
        let cfg1 = GameConfig::multi(3, 1, 2).unwrap();
        let s = initial_state(&cfg1, &Allocation(vec![0, 0, 1])).unwrap();
        assert!(reveal_options(&s, g(&[0, 1])).is_empty());
    }

    #[test]
    fn apply_guess_examples() {
        let cfg = GameConfig::multi(3, 3, 2).unwrap();
        let s = initial_state(&cfg, &Allocation(vec![2, 1, 0])).unwrap();
        let t = apply_guess(&s, g(&[0, 2]), Some(0)).unwrap();
        assert_eq!(t.remaining, vec![1, 1, 0]);
        assert_eq!(t.found, vec![1, 0, 0]);
        assert_eq!(t.round, 1);
        assert!(apply_guess(&s, g(&[0, 2]), Some(2)).is_err());
        assert!(apply_guess(&s, g(&[0, 2]), None).is_err());

        let cfg1 = GameConfig::multi(3, 1, 2).unwrap();
        let s = initial_state(&cfg1, &Allocation(vec![0, 0, 1])).unwrap();
        assert_eq!(apply_guess(&s, g(&[0, 1]), None).unwrap().status, Status::Lost);

        let cfg2 = GameConfig::multi(2, 1, 1).unwrap();
        let s = initial_state(&cfg2, &Allocation(vec![1, 0])).unwrap();
        let t = apply_guess(&s, g(&[0]), Some(0)).unwrap();
        assert_eq!(t.status, Status::Won);
        assert!(apply_guess(&t, g(&[1]), None).is_err());
    }

    #[test]
    fn diagram_examples() {
        let mut h = History::new();
        h.push(g(&[5]), Some(5));
        h.push(g(&[5]), Some(5));
        h.push(g(&[1, 3]), Some(1));
        let (lambda, cur) = history_to_diagram(&h).unwrap();
        assert_eq!(lambda.parts(), &[2, 1]);
        assert_eq!(cur, 1);

        let mut h = History::new();
        h.push(g(&[0, 1]), Some(0));
        let (lambda, cur) = history_to_diagram(&h).unwrap();
        assert_eq!(lambda.parts(), &[1]);
        assert_eq!(cur, 0);

        let mut h = History::new();
        h.push(g(&[2]), Some(2));
        h.push(g(&[4]), Some(4));
        h.push(g(&[4]), Some(4));
        assert!(matches!(history_to_diagram(&h), Err(Error::NonMonotone(_))));
        assert!(history_to_diagram(&History::new()).is_err());
    }

    #[test]
    fn reveal_distributions() {
        let cfg = GameConfig::multi(3, 3, 3).unwrap();
        let s = initial_state(&cfg, &Allocation(vec![2, 1, 0])).unwrap();
        let all = g(&[0, 1, 2]);
        assert!(reveal_distribution(&s, all, RevealRule::Adversarial).is_none());
        assert_eq!(reveal_distribution(&s, all, RevealRule::LowestIndex).unwrap(), vec![(0, ratio(1, 1))]);
        assert_eq!(
            reveal_distribution(&s, all, RevealRule::UniformDoors).unwrap(),
            vec![(0, ratio(1, 2)), (1, ratio(1, 2))]
        );
        assert_eq!(
            reveal_distribution(&s, all, RevealRule::UniformTreasures).unwrap(),
            vec![(0, ratio(2, 3)), (1, ratio(1, 3))]
        );
    }

    #[test]
    fn subsets_enumeration() {
        assert_eq!(all_guesses(4, 2, 2).len(), 6);
        assert_eq!(all_guesses(4, 1, 2).len(), 10);
        assert_eq!(all_guesses(5, 5, 5).len(), 1);
        let mut out = Vec::new();
        subsets_of(0b10110, 2, &mut out);
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|s| s.bits() & !0b10110 == 0));
        assert_eq!(all_guesses(6, 0, 6).len(), 63);
    }

    fn arb_play() -> impl Strategy<Value = (usize, Vec<u32>, Vec<u64>, Vec<usize>)> {
        (2usize..6).prop_flat_map(|n| {
            let allocs = enumerate_allocations(n, 3, Occupancy::Multi);
            (
                Just(n),
                proptest::sample::select(allocs).prop_map(|a| a.0),
                proptest::collection::vec(1u64..(1u64 << n), 3),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
    }

    proptest! {
        #[test]
        fn conservation_and_relabeling((n, counts, guesses, perm) in arb_play()) {
            let cfg = GameConfig::new(n, 3, n, Occupancy::Multi, RevealRule::LowestIndex).unwrap();
            let alloc = Allocation(counts.clone());
            let permuted = {
                let mut c = vec![0; n];
                for (door, &v) in counts.iter().enumerate() { c[perm[door]] = v; }
                Allocation(c)
            };
            let mut s = initial_state(&cfg, &alloc).unwrap();
            let mut t = initial_state(&cfg, &permuted).unwrap();
            for bits in guesses {
                if s.status != Status::Ongoing { break; }
                let guess = GuessSet::from_bits(bits);
                let opts = reveal_options(&s, guess);
                let popts = reveal_options(&t, guess.permute(&perm));
                let mut mapped: Vec<usize> = opts.iter().map(|&d| perm[d]).collect();
                mapped.sort();
                prop_assert_eq!(&mapped, &popts);
                let r = opts.first().copied();
                s = apply_guess(&s, guess, r).unwrap();
                t = apply_guess(&t, guess.permute(&perm), r.map(|d| perm[d])).unwrap();
                prop_assert_eq!(s.status, t.status);
                for door in 0..n {
                    prop_assert_eq!(s.remaining[door] + s.found[door], counts[door]);
                    prop_assert_eq!(s.remaining[door], t.remaining[perm[door]]);
                }
                prop_assert!(s.round <= 3);
                if s.status == Status::Won { prop_assert_eq!(s.round, 3); }
            }
        }
    }
}
