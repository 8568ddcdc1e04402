//! Hider and searcher strategies with exact action distributions.

use std::collections::BTreeSet;
use std::hash::Hasher;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::seq::index;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, count_allocations, enumerate_allocations, Allocation, Occupancy};
use crate::error::{Error, Result};
use crate::game::{all_guesses, full_mask, subsets_of, GameConfig, GuessSet, History};
use crate::rational::{common_denominator, from_int, is_probability, ratio, Fraction, Rational};
use crate::young::{self, PTable};

/// A behavioral searcher strategy: a guess distribution for every history.
pub trait SearcherStrategy: Send + Sync {
    fn config(&self) -> &GameConfig;

    fn name(&self) -> String;

    /// Exact distribution over guesses after `history`. Probabilities are
    /// positive and sum to one.
    fn guess_distribution(&self, history: &History) -> Result<Vec<(GuessSet, Rational)>>;

    fn sample_guess(&self, history: &History, rng: &mut dyn RngCore) -> Result<GuessSet> {
        let dist = self.guess_distribution(history)?;
        sample_weighted(&dist, rng)
            .copied()
            .ok_or_else(|| Error::Internal(format!("{} produced an empty distribution", self.name())))
    }

    /// Strategies driven by a continuation table expose it so the solver can
    /// lump interchangeable empty doors.
    fn as_ptable(&self) -> Option<&PTableSearcher> {
        None
    }
}

/// Exact draw from a finite distribution with rational weights.
pub(crate) fn sample_weighted<'a, T>(dist: &'a [(T, Rational)], rng: &mut dyn RngCore) -> Option<&'a T> {
    if dist.is_empty() {
        return None;
    }
    let den = common_denominator(dist.iter().map(|(_, p)| p));
    let total: num_bigint::BigInt = dist.iter().map(|(_, p)| (p * from_int(den.clone())).to_integer()).sum();
    let mut pick = rng.gen_bigint_range(&num_bigint::BigInt::zero(), &total);
    for (item, p) in dist {
        let w = (p * from_int(den.clone())).to_integer();
        if pick < w {
            return Some(item);
        }
        pick -= w;
    }
    dist.last().map(|(t, _)| t)
}

/// True with probability exactly `p`.
pub(crate) fn bernoulli(p: &Rational, rng: &mut dyn RngCore) -> bool {
    if p.is_zero() {
        return false;
    }
    if p.is_one() {
        return true;
    }
    let den = p.denom().magnitude().clone();
    let num = p.numer().magnitude().clone();
    rng.gen_biguint_below(&den) < num
}

fn check_distribution(dist: &[(GuessSet, Rational)]) -> Result<()> {
    let total: Rational = dist.iter().map(|(_, p)| p.clone()).sum();
    if !total.is_one() {
        return Err(Error::Internal(format!("guess distribution sums to {total}")));
    }
    Ok(())
}

/// Where a table-driven searcher stands after a history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableState {
    /// Found counts per discovered door, in discovery order.
    pub counts: Vec<u32>,
    pub current: Option<usize>,
    /// Doors never named in any round.
    pub fresh: u64,
}

#[derive(Clone, Debug)]
enum ContinueRule {
    /// Never revisits a door.
    Fresh,
    Table(PTable),
}

/// Searcher that, after each find, keeps digging at the latest treasure door
/// with probability `p` (adding `k - 1` never-guessed doors) and otherwise
/// names `k` never-guessed doors, all uniformly chosen.
///
/// Covers the fresh-door strategy (`p = 0` everywhere), the single-door
/// mimic strategy (`k = 1`) and scaled or hand-made tables.
#[derive(Clone, Debug)]
pub struct PTableSearcher {
    config: GameConfig,
    rule: ContinueRule,
    label: String,
}

impl PTableSearcher {
    pub fn fresh_k(config: &GameConfig) -> Result<Self> {
        config.validate()?;
        if config.n < config.d * config.k {
            return Err(Error::DoorBudget { needed: config.d * config.k, available: config.n });
        }
        Ok(PTableSearcher { config: *config, rule: ContinueRule::Fresh, label: "fresh-k".into() })
    }

    /// The `k = 1` strategy that imitates a uniformly drawn allocation,
    /// expressed through its continuation probabilities.
    pub fn mu_mimic(config: &GameConfig) -> Result<Self> {
        config.validate()?;
        if config.k != 1 {
            return Err(Error::InvalidConfig(format!("mu-mimic needs k = 1, got k = {}", config.k)));
        }
        if config.occupancy != Occupancy::Multi {
            return Err(Error::InvalidConfig("mu-mimic is defined for multi occupancy".into()));
        }
        let table = young::base_table(config.n, config.d)?;
        let s = PTableSearcher { config: *config, rule: ContinueRule::Table(table), label: "mu-mimic".into() };
        s.check_reachable()?;
        Ok(s)
    }

    pub fn scaled(config: &GameConfig) -> Result<Self> {
        let table = young::scaled_table(config.n, config.d, config.k)?;
        let mut s = Self::with_table(config, table)?;
        s.label = "ptable-scaled".into();
        Ok(s)
    }

    /// Checks entries in `[0, 1]`, that every reachable discovery pattern has
    /// an entry, and that no positive-probability branch runs out of doors.
    pub fn with_table(config: &GameConfig, table: PTable) -> Result<Self> {
        config.validate()?;
        if (table.n, table.d, table.k) != (config.n, config.d, config.k) {
            return Err(Error::InvalidTable(format!(
                "table is for (n={}, d={}, k={}), game is (n={}, d={}, k={})",
                table.n, table.d, table.k, config.n, config.d, config.k
            )));
        }
        for (diagram, p) in table.entries() {
            if !is_probability(p) {
                return Err(Error::EntryOutOfRange { diagram: diagram.clone(), value: Fraction(p.clone()).to_string() });
            }
        }
        let s = PTableSearcher { config: *config, rule: ContinueRule::Table(table), label: "ptable".into() };
        s.check_reachable()?;
        Ok(s)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn table(&self) -> Option<&PTable> {
        match &self.rule {
            ContinueRule::Fresh => None,
            ContinueRule::Table(t) => Some(t),
        }
    }

    /// Continuation probability after the given discovery counts.
    pub fn continue_probability(&self, counts: &[u32]) -> Result<Rational> {
        match &self.rule {
            ContinueRule::Fresh => Ok(Rational::zero()),
            ContinueRule::Table(t) => t.get(counts).cloned().ok_or_else(|| Error::MissingDiagram(counts.to_vec())),
        }
    }

    /// Walks every discovery pattern reachable with positive probability.
    fn check_reachable(&self) -> Result<()> {
        let k = self.config.k;
        let mut needed = 0usize;
        self.walk(&mut vec![1], k, &mut needed)?;
        if needed > self.config.n {
            return Err(Error::DoorBudget { needed, available: self.config.n });
        }
        Ok(())
    }

    fn walk(&self, counts: &mut Vec<u32>, used: usize, needed: &mut usize) -> Result<()> {
        *needed = (*needed).max(used);
        let size: u32 = counts.iter().sum();
        if size as usize >= self.config.d || counts.len() > self.config.n {
            return Ok(());
        }
        let k = self.config.k;
        let p = self.continue_probability(counts)?;
        if !p.is_zero() {
            *counts.last_mut().unwrap() += 1;
            self.walk(counts, used + k - 1, needed)?;
            *counts.last_mut().unwrap() -= 1;
            if k > 1 {
                counts.push(1);
                self.walk(counts, used + k - 1, needed)?;
                counts.pop();
            }
        }
        if !p.is_one() {
            counts.push(1);
            self.walk(counts, used + k, needed)?;
            counts.pop();
        }
        Ok(())
    }

    /// Decodes the part of a history this strategy depends on.
    pub fn state_of(&self, history: &History) -> Result<TableState> {
        if history.events.iter().any(|e| e.revealed.is_none()) {
            return Err(Error::InconsistentHistory("history already contains a loss".into()));
        }
        let (counts, order) = history.discovery_counts();
        if counts.iter().sum::<u32>() as usize >= self.config.d {
            return Err(Error::InconsistentHistory("all treasures already found".into()));
        }
        let fresh = full_mask(self.config.n) & !history.guessed().bits();
        Ok(TableState { counts, current: order.last().copied(), fresh })
    }

    /// `(continue probability, current door)`; `None` for the opening guess.
    fn decision(&self, state: &TableState) -> Result<Option<(Rational, usize)>> {
        match state.current {
            None => Ok(None),
            Some(cur) => Ok(Some((self.continue_probability(&state.counts)?, cur))),
        }
    }
}

impl SearcherStrategy for PTableSearcher {
    fn config(&self) -> &GameConfig {
        &self.config
    }

    fn name(&self) -> String {
        self.label.clone()
    }

    fn guess_distribution(&self, history: &History) -> Result<Vec<(GuessSet, Rational)>> {
        let state = self.state_of(history)?;
        let k = self.config.k;
        let fresh_count = state.fresh.count_ones() as u64;
        let (p, cur) = match self.decision(&state)? {
            None => (Rational::zero(), None),
            Some((p, cur)) => (p, Some(cur)),
        };
        let mut dist = Vec::new();
        if let Some(cur) = cur.filter(|_| !p.is_zero()) {
            let ways = binomial(fresh_count, (k - 1) as u64);
            if ways.is_zero() {
                return Err(Error::DoorBudget { needed: k - 1, available: fresh_count as usize });
            }
            let each = &p / from_int(ways);
            let mut subsets = Vec::new();
            subsets_of(state.fresh, k - 1, &mut subsets);
            let mut with_cur = GuessSet::default();
            with_cur.insert(cur);
            dist.extend(subsets.into_iter().map(|s| (s.union(with_cur), each.clone())));
        }
        let q = Rational::one() - &p;
        if !q.is_zero() {
            let ways = binomial(fresh_count, k as u64);
            if ways.is_zero() {
                return Err(Error::DoorBudget { needed: k, available: fresh_count as usize });
            }
            let each = q / from_int(ways);
            let mut subsets = Vec::new();
            subsets_of(state.fresh, k, &mut subsets);
            dist.extend(subsets.into_iter().map(|s| (s, each.clone())));
        }
        debug_assert!(check_distribution(&dist).is_ok());
        Ok(dist)
    }

    fn sample_guess(&self, history: &History, rng: &mut dyn RngCore) -> Result<GuessSet> {
        let state = self.state_of(history)?;
        let k = self.config.k;
        let fresh: Vec<usize> = GuessSet::from_bits(state.fresh).doors().collect();
        let (mut guess, take) = match self.decision(&state)? {
            Some((p, cur)) if bernoulli(&p, rng) => (GuessSet::from_doors([cur]), k - 1),
            _ => (GuessSet::default(), k),
        };
        if fresh.len() < take {
            return Err(Error::DoorBudget { needed: take, available: fresh.len() });
        }
        for i in index::sample(rng, fresh.len(), take) {
            guess.insert(fresh[i]);
        }
        Ok(guess)
    }

    fn as_ptable(&self) -> Option<&PTableSearcher> {
        Some(self)
    }
}

/// A searcher that names exactly one guess per history.
pub struct DeterministicSearcher {
    config: GameConfig,
    label: String,
    rule: Box<dyn Fn(&History) -> GuessSet + Send + Sync>,
}

impl DeterministicSearcher {
    pub fn new<F>(config: &GameConfig, label: impl Into<String>, rule: F) -> Self
    where
        F: Fn(&History) -> GuessSet + Send + Sync + 'static,
    {
        DeterministicSearcher { config: *config, label: label.into(), rule: Box::new(rule) }
    }

    /// Names the `k` lowest-indexed never-guessed doors, topping up with the
    /// lowest doors overall when fewer remain.
    pub fn fresh_lowest(config: &GameConfig) -> Self {
        let n = config.n;
        let k = config.k;
        Self::new(config, "fresh-lowest", move |h: &History| {
            let guessed = h.guessed();
            let mut doors: Vec<usize> = (0..n).filter(|&d| !guessed.contains(d)).take(k).collect();
            doors.extend((0..n).filter(|&d| guessed.contains(d)).take(k - doors.len()));
            GuessSet::from_doors(doors)
        })
    }

    /// A pseudo-random but fixed choice among all legal guesses for every
    /// history, determined by `seed`.
    pub fn seeded(config: &GameConfig, seed: u64) -> Self {
        let guesses = all_guesses(config.n, 1, config.k);
        Self::new(config, format!("random-deterministic-{seed}"), move |h: &History| {
            let mut hasher = Fnv(0xcbf2_9ce4_8422_2325 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            for e in &h.events {
                hasher.write_u64(e.guess.bits());
                hasher.write_u64(e.revealed.map_or(u64::MAX, |r| r as u64));
            }
            guesses[(hasher.finish() % guesses.len() as u64) as usize]
        })
    }

    pub fn guess(&self, history: &History) -> GuessSet {
        (self.rule)(history)
    }
}

/// FNV-1a, stable across builds unlike `DefaultHasher`.
struct Fnv(u64);

impl Hasher for Fnv {
    fn finish(&self) -> u64 {
        // final avalanche so nearby histories spread over the guess list
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= *b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}

impl SearcherStrategy for DeterministicSearcher {
    fn config(&self) -> &GameConfig {
        &self.config
    }

    fn name(&self) -> String {
        self.label.clone()
    }

    fn guess_distribution(&self, history: &History) -> Result<Vec<(GuessSet, Rational)>> {
        let g = self.guess(history);
        g.check(&self.config)?;
        Ok(vec![(g, Rational::one())])
    }

    fn sample_guess(&self, history: &History, _rng: &mut dyn RngCore) -> Result<GuessSet> {
        Ok(self.guess(history))
    }
}

/// A distribution over allocations. The reveal rule comes from the config.
#[derive(Clone, Debug)]
pub struct HiderStrategy {
    config: GameConfig,
    label: String,
    entries: Vec<(Allocation, Rational)>,
    cumulative: Vec<BigUint>,
}

impl HiderStrategy {
    pub fn new(config: &GameConfig, label: impl Into<String>, entries: Vec<(Allocation, Rational)>) -> Result<Self> {
        config.validate()?;
        if entries.is_empty() {
            return Err(Error::InvalidHider("no allocations".into()));
        }
        let mut seen = BTreeSet::new();
        for (a, p) in &entries {
            a.validate(config.n, config.d, config.occupancy)?;
            if p <= &Rational::zero() {
                return Err(Error::InvalidHider(format!("allocation {a} has non-positive probability {p}")));
            }
            if !seen.insert(a.clone()) {
                return Err(Error::InvalidHider(format!("allocation {a} listed twice")));
            }
        }
        let total: Rational = entries.iter().map(|(_, p)| p.clone()).sum();
        if !total.is_one() {
            return Err(Error::InvalidHider(format!("probabilities sum to {total}, not 1")));
        }
        let den = common_denominator(entries.iter().map(|(_, p)| p));
        let mut acc = BigUint::zero();
        let cumulative = entries
            .iter()
            .map(|(_, p)| {
                acc += (p * from_int(den.clone())).to_integer().magnitude();
                acc.clone()
            })
            .collect();
        Ok(HiderStrategy { config: *config, label: label.into(), entries, cumulative })
    }

    /// Every allocation equally likely.
    pub fn uniform(config: &GameConfig) -> Result<Self> {
        let all = enumerate_allocations(config.n, config.d, config.occupancy);
        let count = count_allocations(config.n, config.d, config.occupancy);
        let p = Rational::one() / from_int(count);
        Self::new(config, "uniform", all.into_iter().map(|a| (a, p.clone())).collect())
    }

    /// All treasures behind one uniformly chosen door.
    pub fn all_in_one(config: &GameConfig) -> Result<Self> {
        if config.occupancy == Occupancy::Single && config.d > 1 {
            return Err(Error::InvalidHider("single occupancy cannot stack treasures".into()));
        }
        let n = config.n;
        let entries = (0..n)
            .map(|door| {
                let mut c = vec![0u32; n];
                c[door] = config.d as u32;
                (Allocation(c), ratio(1, n as i64))
            })
            .collect();
        Self::new(config, "all-in-one", entries)
    }

    pub fn from_json(config: &GameConfig, text: &str) -> Result<Self> {
        let file: HiderFile = serde_json::from_str(text)?;
        if file.n != config.n || file.d != config.d {
            return Err(Error::InvalidHider(format!(
                "file is for n={}, d={}, game has n={}, d={}",
                file.n, file.d, config.n, config.d
            )));
        }
        let entries = file.entries.into_iter().map(|e| (e.allocation, e.p.0)).collect();
        Self::new(config, "file", entries)
    }

    pub fn to_json(&self) -> HiderFile {
        HiderFile {
            n: self.config.n,
            d: self.config.d,
            entries: self
                .entries
                .iter()
                .map(|(a, p)| HiderEntry { allocation: a.clone(), p: Fraction(p.clone()) })
                .collect(),
        }
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn name(&self) -> &str {
        &self.label
    }

    pub fn entries(&self) -> &[(Allocation, Rational)] {
        &self.entries
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> &Allocation {
        let total = self.cumulative.last().expect("nonempty");
        let pick = rng.gen_biguint_below(total);
        let i = self.cumulative.partition_point(|c| c <= &pick);
        &self.entries[i].0
    }

    /// Single-allocation hider, mostly for tests.
    pub fn point(config: &GameConfig, allocation: Allocation) -> Result<Self> {
        Self::new(config, "point", vec![(allocation, Rational::one())])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HiderFile {
    pub n: usize,
    pub d: usize,
    pub entries: Vec<HiderEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HiderEntry {
    pub allocation: Allocation,
    pub p: Fraction,
}

/// Exact distribution of a strategy after `history`, with a sanity check
/// that every guess is legal and the mass is one.
pub fn guess_distribution(strategy: &dyn SearcherStrategy, history: &History) -> Result<Vec<(GuessSet, Rational)>> {
    let dist = strategy.guess_distribution(history)?;
    for (g, _) in &dist {
        g.check(strategy.config())?;
    }
    check_distribution(&dist)?;
    Ok(dist)
}
