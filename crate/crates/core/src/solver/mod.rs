//! Exact certification of game values.
//!
//! Lower bounds come from evaluating a fixed searcher strategy against every
//! allocation ([`hider_best_response_value`]), upper bounds from the best
//! searcher reply to a fixed hider ([`searcher_best_response_value`]) or from
//! counting ([`deterministic_win_set`], [`closed_form_value`]). The full
//! value is computed by [`sequence_form_value`].

mod best_response;
mod closed_form;
mod evaluate;
mod sequence_form;
pub mod simplex;
mod win_set;

use num_traits::Zero;
use serde::Serialize;

pub use best_response::searcher_best_response_value;
pub use closed_form::{closed_form_value, lemma_bound};
pub use evaluate::{evaluate_exact, evaluate_generic, hider_best_response_value};
pub use sequence_form::{sequence_form_value, LpCertificate, LpSize, PlanEntry, PlanSearcher};
pub use win_set::{deterministic_win_set, WinSet};

use crate::game::GameConfig;
use crate::rational::Rational;
use crate::young::AllocationValue;

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;
pub const DEFAULT_LP_COLUMNS: u64 = 100_000;

/// Hard limits on exact computations. Exceeding one is an error, never an
/// approximation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Game-tree nodes visited by one evaluation.
    pub nodes: u64,
    /// Columns of a sequence-form LP.
    pub lp_columns: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { nodes: DEFAULT_NODE_BUDGET, lp_columns: DEFAULT_LP_COLUMNS }
    }
}

impl Budget {
    pub fn with_nodes(nodes: u64) -> Self {
        Budget { nodes, ..Budget::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    HiderBestResponse,
    SearcherBestResponse,
    Lp,
}

/// A value together with where it came from.
#[derive(Clone, Debug, Serialize)]
pub struct ValueReport {
    pub config: GameConfig,
    #[serde(with = "crate::rational::frac")]
    pub value: Rational,
    pub method: Method,
    /// The value meets the counting bound `k^d / #allocations`.
    pub tight: bool,
    /// `k^d / #allocations`, which may exceed one for tiny games.
    #[serde(with = "crate::rational::frac")]
    pub lemma_bound: Rational,
    /// `k / n`, from hiding everything behind one door (multi occupancy).
    #[serde(with = "crate::rational::opt_frac")]
    pub claim_cap: Option<Rational>,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allocation_values: Option<Vec<AllocationValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<LpCertificate>,
}

impl ValueReport {
    pub(crate) fn new(config: &GameConfig, value: Rational, method: Method) -> Self {
        let lemma = lemma_bound(config);
        let claim_cap = closed_form::claim_cap(config);
        let tight = value == lemma;
        ValueReport {
            config: *config,
            value,
            method,
            tight,
            lemma_bound: lemma,
            claim_cap,
            certified: true,
            annotation: None,
            strategy: None,
            allocation_values: None,
            certificate: None,
        }
    }

    /// Smallest of the counting bound, the one-door cap and one.
    pub fn upper_bound(&self) -> Rational {
        let mut best = self.lemma_bound.clone().min(Rational::from_integer(1.into()));
        if let Some(cap) = &self.claim_cap {
            best = best.min(cap.clone());
        }
        debug_assert!(!best.is_zero() || self.value.is_zero());
        best
    }
}

/// Shared node counter that enforces [`Budget::nodes`].
pub(crate) struct NodeCounter {
    used: u64,
    limit: u64,
}

impl NodeCounter {
    pub(crate) fn new(limit: u64) -> Self {
        NodeCounter { used: 0, limit }
    }

    pub(crate) fn tick(&mut self) -> crate::error::Result<()> {
        self.used += 1;
        if self.used > self.limit {
            return Err(crate::error::Error::BudgetExceeded { what: "node", limit: self.limit });
        }
        Ok(())
    }
}
