use std::collections::HashMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::game::{subsets_of, GameConfig, GuessSet, RevealRule};
use crate::rational::{ratio, Rational};
use crate::strategies::HiderStrategy;

use super::{Budget, Method, NodeCounter, ValueReport};

/// Unnormalized posterior over what is still hidden.
type Posterior = Vec<(Vec<u32>, Rational)>;

/// The best the searcher can do against a known hider distribution.
///
/// Backward induction over posteriors: after any history the searcher's
/// belief is a weighted list of remaining-treasure vectors, and the optimal
/// continuation depends on nothing else. Reveals follow `config.reveal`; a
/// hider-chosen reveal is only accepted where it is forced, that is where
/// every reachable guess has at most one treasure door to show.
pub fn searcher_best_response_value(config: &GameConfig, hider: &HiderStrategy, budget: &Budget) -> Result<ValueReport> {
    config.validate()?;
    let h = hider.config();
    if (h.n, h.d, h.occupancy) != (config.n, config.d, config.occupancy) {
        return Err(Error::InvalidHider(format!("hider is for {h}, game is {config}")));
    }
    let root: Posterior = hider.entries().iter().map(|(a, p)| (a.counts().to_vec(), p.clone())).collect();
    let mut dp = Dp { config, memo: HashMap::new(), counter: NodeCounter::new(budget.nodes) };
    let value = dp.value(root)?;
    let mut report = ValueReport::new(config, value, Method::SearcherBestResponse);
    report.strategy = Some(hider.name().to_string());
    Ok(report)
}

struct Dp<'a> {
    config: &'a GameConfig,
    /// Keyed by the canonical posterior with weights summing to one.
    memo: HashMap<Posterior, Rational>,
    counter: NodeCounter,
}

impl Dp<'_> {
    fn value(&mut self, posterior: Posterior) -> Result<Rational> {
        let mass: Rational = posterior.iter().map(|(_, w)| w.clone()).sum();
        if mass.is_zero() {
            return Ok(Rational::zero());
        }
        if posterior.iter().all(|(rem, _)| rem.iter().all(|&c| c == 0)) {
            return Ok(mass);
        }
        let key = canonical(&posterior, &mass, self.config.reveal != RevealRule::LowestIndex);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v * &mass);
        }
        self.counter.tick()?;
        let n = self.config.n;
        let live = (0..n)
            .filter(|&d| posterior.iter().any(|(rem, _)| rem[d] > 0))
            .fold(0u64, |m, d| m | (1 << d));
        let max = self.config.k.min(live.count_ones() as usize);
        let mut guesses = Vec::new();
        for size in 1..=max {
            subsets_of(live, size, &mut guesses);
        }
        let mut best = Rational::zero();
        for guess in guesses {
            let mut total = Rational::zero();
            for (_, child) in self.split(&posterior, guess)? {
                total += self.value(child)?;
            }
            if total > best {
                best = total;
            }
        }
        self.memo.insert(key, &best / &mass);
        Ok(best)
    }

    /// Posterior after each revealed door; allocations the guess misses drop out.
    fn split(&self, posterior: &Posterior, guess: GuessSet) -> Result<Vec<(usize, Posterior)>> {
        let mut by_door: Vec<(usize, Posterior)> = Vec::new();
        for (rem, w) in posterior {
            let options: Vec<usize> = guess.doors().filter(|&d| rem[d] > 0).collect();
            if options.is_empty() {
                continue;
            }
            let shares: Vec<(usize, Rational)> = match self.config.reveal {
                RevealRule::Adversarial if options.len() == 1 => vec![(options[0], ratio(1, 1))],
                RevealRule::Adversarial => {
                    return Err(Error::AdversarialRevealUnsupported(format!(
                        "guess {guess:?} leaves the hider a choice between doors {options:?}; use the lp solver"
                    )))
                }
                RevealRule::LowestIndex => vec![(options[0], ratio(1, 1))],
                RevealRule::UniformDoors => {
                    let m = options.len() as i64;
                    options.iter().map(|&d| (d, ratio(1, m))).collect()
                }
                RevealRule::UniformTreasures => {
                    let total: u32 = options.iter().map(|&d| rem[d]).sum();
                    options.iter().map(|&d| (d, ratio(rem[d] as i64, total as i64))).collect()
                }
            };
            for (door, share) in shares {
                let mut next = rem.clone();
                next[door] -= 1;
                let entry = (next, w * share);
                match by_door.iter_mut().find(|(d, _)| *d == door) {
                    Some((_, p)) => p.push(entry),
                    None => by_door.push((door, vec![entry])),
                }
            }
        }
        Ok(by_door)
    }
}

/// Normalizes weights, relabels doors by sorting their columns and sorts the
/// rows. Two posteriors with the same key have proportional values.
/// Relabeling is skipped when the reveal rule looks at door indices.
fn canonical(posterior: &Posterior, mass: &Rational, relabel: bool) -> Posterior {
    let mut rows: Posterior = posterior
        .iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|(r, w)| (r.clone(), w / mass))
        .collect();
    rows.sort();
    let n = rows[0].0.len();
    let mut columns: Vec<Vec<u32>> = (0..n).map(|d| rows.iter().map(|(r, _)| r[d]).collect()).collect();
    if relabel {
        columns.sort_unstable_by(|a, b| b.cmp(a));
    }
    let mut out: Posterior = rows
        .iter()
        .enumerate()
        .map(|(i, (_, w))| (columns.iter().map(|c| c[i]).collect(), w.clone()))
        .collect();
    out.sort();
    // merge identical rows
    let mut merged: Posterior = Vec::with_capacity(out.len());
    for (r, w) in out {
        match merged.last_mut() {
            Some((last, acc)) if *last == r => *acc += w,
            _ => merged.push((r, w)),
        }
    }
    merged
}
