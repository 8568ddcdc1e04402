//! Binomials, integer partitions and treasure allocations.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a door may hold more than one treasure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Occupancy {
    Single,
    Multi,
}

impl fmt::Display for Occupancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Occupancy::Single => f.write_str("single"),
            Occupancy::Multi => f.write_str("multi"),
        }
    }
}

/// `C(n, r)`, zero when `r > n`.
pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::default();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        // acc * (n - i) is always divisible by (i + 1) at this point.
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Number of ways to hide `d` treasures behind `n` doors.
pub fn count_allocations(n: usize, d: usize, occupancy: Occupancy) -> BigUint {
    match occupancy {
        Occupancy::Single => binomial(n as u64, d as u64),
        Occupancy::Multi => {
            if n == 0 {
                return if d == 0 { BigUint::one() } else { BigUint::default() };
            }
            binomial((n + d - 1) as u64, d as u64)
        }
    }
}

/// Treasure counts per door.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(pub Vec<u32>);

impl Allocation {
    pub fn new(counts: Vec<u32>) -> Self {
        Allocation(counts)
    }

    pub fn doors(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    /// Sorted positive counts.
    pub fn shape(&self) -> Partition {
        let mut parts: Vec<u32> = self.0.iter().copied().filter(|&c| c > 0).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    /// Checks the allocation against a door count, treasure count and occupancy rule.
    pub fn validate(&self, n: usize, d: usize, occupancy: Occupancy) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::InvalidAllocation(format!(
                "expected {n} doors, got {}",
                self.0.len()
            )));
        }
        if self.total() as usize != d {
            return Err(Error::InvalidAllocation(format!(
                "expected {d} treasures, got {}",
                self.total()
            )));
        }
        if occupancy == Occupancy::Single && self.0.iter().any(|&c| c > 1) {
            return Err(Error::InvalidAllocation(
                "single occupancy allows at most one treasure per door".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// All allocations in lexicographic order of their count vectors.
pub fn enumerate_allocations(n: usize, d: usize, occupancy: Occupancy) -> Vec<Allocation> {
    let cap = match occupancy {
        Occupancy::Single => 1,
        Occupancy::Multi => d as u32,
    };
    let mut out = Vec::new();
    let mut counts = vec![0u32; n];
    fill_allocations(&mut counts, 0, d as u32, cap, &mut out);
    out
}

fn fill_allocations(counts: &mut [u32], door: usize, left: u32, cap: u32, out: &mut Vec<Allocation>) {
    if door + 1 == counts.len() {
        if left <= cap {
            counts[door] = left;
            out.push(Allocation(counts.to_vec()));
        }
        return;
    }
    if counts.is_empty() {
        return;
    }
    for c in 0..=left.min(cap) {
        counts[door] = c;
        fill_allocations(counts, door + 1, left - c, cap, out);
    }
    counts[door] = 0;
}

/// A Young diagram: nonincreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::InvalidPartition(format!("{parts:?} has a zero part")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("{parts:?} is not nonincreasing")));
        }
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn size(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn last(&self) -> Option<u32> {
        self.parts.last().copied()
    }

    /// True when the last part equals the part before it, so the last
    /// row of the diagram cannot grow.
    pub fn last_row_blocked(&self) -> bool {
        let n = self.parts.len();
        n >= 2 && self.parts[n - 1] == self.parts[n - 2]
    }
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = Error;

    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Partitions of `d` into at most `max_parts` parts, in reverse lexicographic
/// order (largest first part first).
pub fn enumerate_partitions(d: u32, max_parts: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut parts = Vec::new();
    fill_partitions(d, d, max_parts, &mut parts, &mut out);
    out
}

fn fill_partitions(left: u32, max_part: u32, max_parts: usize, parts: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if left == 0 {
        out.push(Partition { parts: parts.clone() });
        return;
    }
    if parts.len() == max_parts {
        return;
    }
    for p in (1..=left.min(max_part)).rev() {
        parts.push(p);
        fill_partitions(left - p, p, max_parts, parts, out);
        parts.pop();
    }
}

/// Number of allocations over `n` doors whose shape is `pi`:
/// `n! / (prod_c m_c! * (n - j)!)`.
pub fn partition_weight(pi: &Partition, n: usize) -> Result<BigUint> {
    let j = pi.len();
    if j > n {
        return Err(Error::InvalidPartition(format!(
            "{pi} has {j} parts but only {n} doors"
        )));
    }
    let mut multiplicities: BTreeMap<u32, u64> = BTreeMap::new();
    for &p in pi.parts() {
        *multiplicities.entry(p).or_default() += 1;
    }
    // Multinomial n! / (m_1! m_2! ... (n-j)!) built from successive binomials.
    let mut acc = BigUint::one();
    let mut remaining = n as u64;
    for &m in multiplicities.values() {
        acc *= binomial(remaining, m);
        remaining -= m;
    }
    Ok(acc)
}
