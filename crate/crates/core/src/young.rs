//! Continuation probabilities indexed by Young diagrams.
//!
//! After some treasures have been found, the counts per door in discovery
//! order form a diagram `λ`. The single-door mimic strategy keeps digging at
//! the latest door with probability `p_λ(n, d, 1)`; the `k`-door strategy
//! scales this to `k · p_λ(n, d, 1)` and is only well defined while every
//! scaled entry stays at most one.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_allocations, enumerate_partitions, partition_weight, Allocation, Partition};
use crate::error::{Error, Result};
use crate::game::{GameConfig, RevealRule};
use crate::par;
use crate::rational::{big_ratio, from_int, Fraction, Rational};
use crate::solver::{evaluate_exact, Budget};
use crate::strategies::PTableSearcher;

/// Continuation probabilities keyed by discovery counts.
///
/// Generated tables are keyed by partitions. Hand-written tables may also
/// carry non-monotone keys such as `[1, 2]` when a strategy revisits the
/// newest door after a tie.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PTable {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    entries: BTreeMap<Vec<u32>, Rational>,
}

impl PTable {
    pub fn new(n: usize, d: usize, k: usize) -> Self {
        PTable { n, d, k, entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, diagram: Vec<u32>, p: Rational) {
        self.entries.insert(diagram, p);
    }

    pub fn get(&self, diagram: &[u32]) -> Option<&Rational> {
        self.entries.get(diagram)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PTableFile = serde_json::from_str(text)?;
        let mut t = PTable::new(file.n, file.d, file.k);
        for e in file.entries {
            if e.diagram.is_empty() || e.diagram.contains(&0) {
                return Err(Error::InvalidTable(format!("bad diagram {:?}", e.diagram)));
            }
            if t.entries.insert(e.diagram.clone(), e.p.0).is_some() {
                return Err(Error::InvalidTable(format!("diagram {:?} listed twice", e.diagram)));
            }
        }
        Ok(t)
    }

    pub fn to_file(&self) -> PTableFile {
        PTableFile {
            n: self.n,
            d: self.d,
            k: self.k,
            entries: self
                .entries
                .iter()
                .map(|(diagram, p)| PTableEntry { diagram: diagram.clone(), p: Fraction(p.clone()) })
                .collect(),
        }
    }
}

/// `{"n":..,"d":..,"k":..,"entries":[{"diagram":[2,1],"p":{"num":4,"den":7}}]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PTableFile {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub entries: Vec<PTableEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PTableEntry {
    pub diagram: Vec<u32>,
    pub p: Fraction,
}

/// `p_λ(n, d, 1)`: among allocation shapes that agree with `λ` on all but
/// the last row and whose matching row is at least as long, the weighted
/// share whose row is strictly longer.
pub fn p_lambda_base(n: usize, d: usize, lambda: &Partition) -> Result<Rational> {
    let size = lambda.size();
    if size == 0 || size as usize >= d {
        return Err(Error::SizeOutOfRange { size, max: d.saturating_sub(1) as u32 });
    }
    let j = lambda.len();
    if j > n {
        return Err(Error::InvalidPartition(format!("{lambda} has more than {n} rows")));
    }
    let prefix = &lambda.parts()[..j - 1];
    let last = lambda.parts()[j - 1];
    let mut longer = BigUint::zero();
    let mut at_least = BigUint::zero();
    for pi in enumerate_partitions(d as u32, n) {
        let parts = pi.parts();
        if parts.len() < j || &parts[..j - 1] != prefix || parts[j - 1] < last {
            continue;
        }
        let w = partition_weight(&pi, n)?;
        if parts[j - 1] > last {
            longer += &w;
        }
        at_least += w;
    }
    if longer.is_zero() {
        return Ok(Rational::zero());
    }
    Ok(big_ratio(longer.into(), at_least.into()))
}

/// Diagrams the tables are keyed by: sizes `1..d`, at most `min(n, d-1)` rows.
pub fn table_diagrams(n: usize, d: usize) -> Vec<Partition> {
    let rows = n.min(d.saturating_sub(1));
    (1..d as u32).flat_map(|size| enumerate_partitions(size, rows)).collect()
}

/// The `k = 1` table, without any door-budget requirement.
pub fn base_table(n: usize, d: usize) -> Result<PTable> {
    let mut t = PTable::new(n, d, 1);
    for lambda in table_diagrams(n, d) {
        let p = p_lambda_base(n, d, &lambda)?;
        t.insert(lambda.into(), p);
    }
    Ok(t)
}

/// `k · p_λ(n, d, 1)` for every diagram. Entries above one are reported,
/// never clamped.
pub fn scaled_table(n: usize, d: usize, k: usize) -> Result<PTable> {
    if n < d * k {
        return Err(Error::DoorBudget { needed: d * k, available: n });
    }
    let mut t = PTable::new(n, d, k);
    let scale = from_int(k as u64);
    for lambda in table_diagrams(n, d) {
        let p = p_lambda_base(n, d, &lambda)? * &scale;
        if p > Rational::one() {
            return Err(Error::ExceedsUnit { value: Fraction(p).to_string(), diagram: lambda });
        }
        t.insert(lambda.into(), p);
    }
    Ok(t)
}

/// Smallest `n >= d·k` at which [`scaled_table`] succeeds.
pub fn min_valid_n(d: usize, k: usize) -> usize {
    // Every base entry tends to zero as n grows, so the scan terminates.
    (d * k..)
        .find(|&n| scaled_table(n, d, k).is_ok())
        .expect("unbounded scan")
}

#[derive(Clone, Debug, Serialize)]
pub struct EqualizingReport {
    pub equal: bool,
    #[serde(with = "crate::rational::opt_frac")]
    pub value: Option<Rational>,
    pub counterexample: Option<Allocation>,
    pub values: Vec<AllocationValue>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AllocationValue {
    pub allocation: Allocation,
    #[serde(with = "crate::rational::frac")]
    pub value: Rational,
}

/// Exact win probability of the table strategy against every allocation
/// under hider-chosen reveals; equal when all coincide.
pub fn verify_equalizing(config: &GameConfig, table: &PTable, budget: &Budget) -> Result<EqualizingReport> {
    let config = config.with_reveal(RevealRule::Adversarial);
    let searcher = PTableSearcher::with_table(&config, table.clone())?;
    let allocations = enumerate_allocations(config.n, config.d, config.occupancy);
    let values = par::try_map(&allocations, |a| {
        evaluate_exact(&config, &searcher, a, budget).map(|value| AllocationValue { allocation: a.clone(), value })
    })?;
    let first = values[0].value.clone();
    let odd = values.iter().find(|v| v.value != first);
    Ok(match odd {
        None => EqualizingReport { equal: true, value: Some(first), counterexample: None, values },
        Some(v) => {
            // report the allocation that does worst, which is what a hider would pick
            let worst = values.iter().min_by(|a, b| a.value.cmp(&b.value)).unwrap_or(v);
            EqualizingReport {
                equal: false,
                value: None,
                counterexample: Some(worst.allocation.clone()),
                values,
            }
        }
    })
}
