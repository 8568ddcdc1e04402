//! The whole game as one linear program over the searcher's realization plan.
//!
//! Columns are the value `v`, one weight `X(h, G)` per searcher sequence
//! (history `h`, then guess `G`) and one bound `U(μ, h, G)` per hider node
//! reached after the searcher plays `G` at `h` against allocation `μ`.
//! `U` is capped by what the remaining play guarantees: `X(h, G)` when the
//! reveal completes the search, otherwise the sum of the next round's `U`
//! for the revealed door (every door for a hider-chosen reveal, the average
//! for a chance reveal). Finally `v <= Σ_G U(μ, ∅, G)` for every `μ`.
//!
//! Flow conservation is written as `Σ_G X(h, G) <= X(parent)`: mass that
//! leaks out of a plan can be put back on any guess without lowering any
//! bound, so the optimum is unchanged and every right-hand side is
//! nonnegative. For small `n` the program is folded by door permutations,
//! under which the game is invariant unless the reveal rule reads indices.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::combinatorics::{enumerate_allocations, Allocation, Occupancy};
use crate::error::{Error, Result};
use crate::game::{
    all_guesses, apply_guess, initial_state, reveal_distribution, reveal_options, GameConfig, GameState, GuessSet,
    History, RevealRule,
};
use crate::rational::{frac, from_int, Rational};
use crate::strategies::SearcherStrategy;

use super::simplex::{maximize, Problem};
use super::{hider_best_response_value, Budget, Method, NodeCounter, ValueReport};

/// Largest door count for which the program is folded by symmetry.
const MAX_SYMMETRIC_DOORS: usize = 6;

/// Door relabelings used to fold the program.
#[derive(Debug)]
struct Symmetry {
    perms: Vec<Vec<usize>>,
}

impl Symmetry {
    fn new(config: &GameConfig) -> Self {
        let n = config.n;
        let perms = if n <= MAX_SYMMETRIC_DOORS && config.reveal != RevealRule::LowestIndex {
            permutations(n)
        } else {
            vec![(0..n).collect()]
        };
        Symmetry { perms }
    }

    /// Smallest encoding of `(counts, history, guess)` over all relabelings.
    fn key(&self, counts: Option<&[u32]>, history: &History, guess: Option<GuessSet>) -> Vec<u64> {
        let mut best: Option<Vec<u64>> = None;
        let mut buf = Vec::with_capacity(2 * history.len() + 16);
        for perm in &self.perms {
            buf.clear();
            if let Some(c) = counts {
                let mut moved = vec![0u32; c.len()];
                for (door, &v) in c.iter().enumerate() {
                    moved[perm[door]] = v;
                }
                buf.extend(moved.into_iter().map(u64::from));
            }
            for e in &history.events {
                buf.push(e.guess.permute(perm).bits());
                buf.push(e.revealed.map_or(u64::MAX, |r| perm[r] as u64));
            }
            if let Some(g) = guess {
                buf.push(g.permute(perm).bits());
            }
            if best.as_ref().is_none_or(|b| buf < *b) {
                best = Some(buf.clone());
            }
        }
        best.expect("at least the identity")
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Dimensions of a solved program.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LpSize {
    pub columns: usize,
    pub rows: usize,
    pub searcher_sequences: usize,
    pub hider_nodes: usize,
    pub allocation_orbits: usize,
    pub symmetries: usize,
    pub pivots: u64,
}

/// Realization weight of one searcher sequence.
#[derive(Clone, Debug, Serialize)]
pub struct PlanEntry {
    pub history: History,
    pub guess: GuessSet,
    #[serde(with = "frac")]
    pub probability: Rational,
}

/// Optimal hider weight on one allocation, read off the dual solution.
#[derive(Clone, Debug, Serialize)]
pub struct HiderWeight {
    pub allocation: Allocation,
    #[serde(with = "frac")]
    pub p: Rational,
}

/// Witness for an LP value: the searcher's realization plan, which
/// guarantees the value, and the hider's mix, which holds the searcher to it.
#[derive(Clone, Debug, Serialize)]
pub struct LpCertificate {
    pub size: LpSize,
    pub plan: Vec<PlanEntry>,
    pub hider: Vec<HiderWeight>,
}

struct Builder<'a> {
    config: &'a GameConfig,
    sym: &'a Symmetry,
    guesses: Vec<GuessSet>,
    problem: Problem,
    x_cols: HashMap<Vec<u64>, usize>,
    u_cols: HashMap<Vec<u64>, usize>,
    /// Canonical information sets with a representative history.
    info_sets: HashMap<Vec<u64>, History>,
    counter: NodeCounter,
    column_limit: u64,
}

impl Builder<'_> {
    fn column(&mut self) -> Result<usize> {
        let c = self.problem.variables;
        if c as u64 >= self.column_limit {
            return Err(Error::BudgetExceeded { what: "lp column", limit: self.column_limit });
        }
        self.problem.variables += 1;
        Ok(c)
    }

    fn x_column(&mut self, history: &History, guess: GuessSet) -> Result<usize> {
        let key = self.sym.key(None, history, Some(guess));
        if let Some(&c) = self.x_cols.get(&key) {
            return Ok(c);
        }
        let c = self.column()?;
        self.x_cols.insert(key, c);
        Ok(c)
    }

    /// Columns `U(μ, h, G)` for every guess at `h` that can still succeed.
    fn node(&mut self, alloc: &[u32], state: &GameState, history: &mut History) -> Result<Vec<usize>> {
        self.counter.tick()?;
        let info = self.sym.key(None, history, None);
        self.info_sets.entry(info).or_insert_with(|| history.clone());
        let mut terms = Vec::new();
        for gi in 0..self.guesses.len() {
            let guess = self.guesses[gi];
            let options = reveal_options(state, guess);
            if options.is_empty() {
                continue;
            }
            let key = self.sym.key(Some(alloc), history, Some(guess));
            if let Some(&c) = self.u_cols.get(&key) {
                terms.push(c);
                continue;
            }
            let u = self.column()?;
            self.u_cols.insert(key, u);
            terms.push(u);
            let x = self.x_column(history, guess)?;
            if state.found_total() + 1 == self.config.d {
                self.problem.push_row(vec![(u, Rational::one()), (x, -Rational::one())], Rational::zero());
                continue;
            }
            let mut children = Vec::with_capacity(options.len());
            for &door in &options {
                let next = apply_guess(state, guess, Some(door))?;
                history.push(guess, Some(door));
                let sub = self.node(alloc, &next, history);
                history.pop();
                children.push((door, sub?));
            }
            match reveal_distribution(state, guess, self.config.reveal) {
                None => {
                    for (_, sub) in children {
                        let mut row = vec![(u, Rational::one())];
                        row.extend(sub.into_iter().map(|c| (c, -Rational::one())));
                        self.problem.push_row(row, Rational::zero());
                    }
                }
                Some(dist) => {
                    let mut row = vec![(u, Rational::one())];
                    for (door, p) in dist {
                        let (_, sub) = children.iter().find(|(d, _)| *d == door).expect("reveal among options");
                        row.extend(sub.iter().map(|&c| (c, -p.clone())));
                    }
                    self.problem.push_row(row, Rational::zero());
                }
            }
        }
        Ok(terms)
    }

    /// `Σ_G X(h, G) <= X(parent)` for every information set met.
    fn flow_rows(&mut self) {
        let info_sets: Vec<History> = self.info_sets.values().cloned().collect();
        for h in info_sets {
            let mut row: Vec<(usize, Rational)> = Vec::new();
            for &g in &self.guesses {
                if let Some(&c) = self.x_cols.get(&self.sym.key(None, &h, Some(g))) {
                    row.push((c, Rational::one()));
                }
            }
            if row.is_empty() {
                continue;
            }
            let rhs = match h.events.split_last() {
                None => Rational::one(),
                Some((last, before)) => {
                    let parent = History { events: before.to_vec() };
                    let key = self.sym.key(None, &parent, Some(last.guess));
                    let c = *self.x_cols.get(&key).expect("parent sequence has a column");
                    row.push((c, -Rational::one()));
                    Rational::zero()
                }
            };
            self.problem.push_row(row, rhs);
        }
    }
}

/// Exact game value by linear programming, with the optimal searcher plan
/// re-evaluated against every allocation as a check.
pub fn sequence_form_value(config: &GameConfig, budget: &Budget) -> Result<ValueReport> {
    config.validate()?;
    let sym = Arc::new(Symmetry::new(config));
    let mut b = Builder {
        config,
        sym: &sym,
        guesses: all_guesses(config.n, 1, config.k),
        problem: Problem::new(1),
        x_cols: HashMap::new(),
        u_cols: HashMap::new(),
        info_sets: HashMap::new(),
        counter: NodeCounter::new(budget.nodes),
        column_limit: budget.lp_columns,
    };
    b.problem.objective = vec![(0, Rational::one())];
    // allocation orbits: representative, size, root row index
    let mut orbits: Vec<(Allocation, usize, usize)> = Vec::new();
    let mut orbit_of: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut members: Vec<Vec<Allocation>> = Vec::new();
    for a in enumerate_allocations(config.n, config.d, config.occupancy) {
        let key = sym.key(Some(a.counts()), &History::new(), None);
        if let Some(&o) = orbit_of.get(&key) {
            orbits[o].1 += 1;
            members[o].push(a);
            continue;
        }
        let state = initial_state(config, &a)?;
        let terms = b.node(a.counts(), &state, &mut History::new())?;
        let mut row = vec![(0, Rational::one())];
        row.extend(terms.into_iter().map(|c| (c, -Rational::one())));
        orbit_of.insert(key, orbits.len());
        orbits.push((a.clone(), 1, b.problem.rows.len()));
        members.push(vec![a]);
        b.problem.push_row(row, Rational::zero());
    }
    b.flow_rows();

    let rows = b.problem.rows.len();
    let columns = b.problem.variables;
    let max_pivots = 50 * (rows + columns) as u64 + 1000;
    let solution = maximize(&b.problem, max_pivots)?;
    let value = solution.value.clone();

    let weights: HashMap<Vec<u64>, Rational> = b
        .x_cols
        .iter()
        .filter(|(_, &c)| !solution.x[c].is_zero())
        .map(|(k, &c)| (k.clone(), solution.x[c].clone()))
        .collect();
    let plan = PlanSearcher { config: *config, sym: Arc::clone(&sym), guesses: b.guesses.clone(), weights };

    let mut hider = Vec::new();
    let dual_mass: Rational = orbits.iter().map(|(_, _, r)| solution.y[*r].clone()).sum();
    for ((_, size, r), group) in orbits.iter().zip(&members) {
        let y = &solution.y[*r];
        if y.is_zero() || dual_mass.is_zero() {
            continue;
        }
        let p = y / &dual_mass / from_int(*size as u64);
        hider.extend(group.iter().map(|a| HiderWeight { allocation: a.clone(), p: p.clone() }));
    }

    let size = LpSize {
        columns,
        rows,
        searcher_sequences: b.x_cols.len(),
        hider_nodes: b.u_cols.len(),
        allocation_orbits: orbits.len(),
        symmetries: sym.perms.len(),
        pivots: solution.pivots,
    };

    let check = hider_best_response_value(config, &plan, budget)?;
    if check.value != value {
        return Err(Error::Internal(format!(
            "plan guarantees {} but the program reports {}",
            check.value, value
        )));
    }
    let certificate = LpCertificate { size, plan: plan.unfold()?, hider };
    let mut report = ValueReport::new(config, value, Method::Lp);
    report.strategy = Some(plan.name());
    report.allocation_values = check.allocation_values;
    report.certificate = Some(certificate);
    Ok(report)
}

/// Behavioral strategy read off a realization plan.
#[derive(Clone, Debug)]
pub struct PlanSearcher {
    config: GameConfig,
    sym: Arc<Symmetry>,
    guesses: Vec<GuessSet>,
    weights: HashMap<Vec<u64>, Rational>,
}

impl PlanSearcher {
    fn weight(&self, history: &History, guess: GuessSet) -> Option<&Rational> {
        self.weights.get(&self.sym.key(None, history, Some(guess)))
    }

    /// Realization weight of every positive sequence, over all histories the
    /// plan reaches.
    pub fn unfold(&self) -> Result<Vec<PlanEntry>> {
        let mut out = Vec::new();
        self.unfold_from(&mut History::new(), &Rational::one(), 0, &mut out)?;
        Ok(out)
    }

    fn unfold_from(&self, history: &mut History, reach: &Rational, found: usize, out: &mut Vec<PlanEntry>) -> Result<()> {
        for (guess, p) in self.guess_distribution(history)? {
            let weight = reach * &p;
            out.push(PlanEntry { history: history.clone(), guess, probability: weight.clone() });
            if found + 1 == self.config.d {
                continue;
            }
            for door in guess.doors() {
                let repeat = history.events.iter().any(|e| e.revealed == Some(door));
                if self.config.occupancy == Occupancy::Single && repeat {
                    continue;
                }
                history.push(guess, Some(door));
                let r = self.unfold_from(history, &weight, found + 1, out);
                history.pop();
                r?;
            }
        }
        Ok(())
    }
}

impl SearcherStrategy for PlanSearcher {
    fn config(&self) -> &GameConfig {
        &self.config
    }

    fn name(&self) -> String {
        "lp-plan".into()
    }

    fn guess_distribution(&self, history: &History) -> Result<Vec<(GuessSet, Rational)>> {
        let weighted: Vec<(GuessSet, Rational)> = self
            .guesses
            .iter()
            .filter_map(|&g| self.weight(history, g).map(|w| (g, w.clone())))
            .collect();
        let total: Rational = weighted.iter().map(|(_, w)| w.clone()).sum();
        if total.is_zero() {
            // off the plan: any legal play will do
            let full = all_guesses(self.config.n, self.config.k, self.config.k);
            let p = Rational::one() / from_int(full.len() as u64);
            return Ok(full.into_iter().map(|g| (g, p.clone())).collect());
        }
        Ok(weighted.into_iter().map(|(g, w)| (g, w / &total)).collect())
    }
}
