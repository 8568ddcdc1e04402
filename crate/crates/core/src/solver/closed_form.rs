use num_traits::One;

use crate::combinatorics::{count_allocations, Occupancy};
use crate::game::GameConfig;
use crate::rational::{big_ratio, ratio, Fraction, Rational};
use crate::young::scaled_table;

use super::{Method, ValueReport};

/// `k^d / #allocations`: no deterministic searcher wins against more than
/// `k^d` allocations, so no mixed searcher beats the uniform hider by more.
pub fn lemma_bound(config: &GameConfig) -> Rational {
    let wins = num_bigint::BigUint::from(config.k).pow(config.d as u32);
    big_ratio(wins.into(), count_allocations(config.n, config.d, config.occupancy).into())
}

/// `k / n` for multi occupancy: the hider stacks everything behind one door.
pub(crate) fn claim_cap(config: &GameConfig) -> Option<Rational> {
    match config.occupancy {
        Occupancy::Multi => Some(ratio(config.k as i64, config.n as i64)),
        Occupancy::Single => None,
    }
}

/// The closed-form value with a note on whether it applies.
///
/// The reported value is the smallest of the counting bound, the one-door cap
/// and one. It is certified when a known strategy attains it: the fresh-door
/// strategy for single occupancy with `n >= d·k`, the scaled table for multi
/// occupancy.
pub fn closed_form_value(config: &GameConfig) -> ValueReport {
    let formula = lemma_bound(config);
    let cap = claim_cap(config);
    let mut value = formula.clone().min(Rational::one());
    if let Some(c) = &cap {
        value = value.min(c.clone());
    }
    let (certified, annotation) = match config.occupancy {
        Occupancy::Single if config.n >= config.d * config.k => (true, None),
        Occupancy::Single => (false, Some(format!("requires n >= d*k = {}", config.d * config.k))),
        Occupancy::Multi => match scaled_table(config.n, config.d, config.k) {
            Ok(_) => (true, None),
            Err(e) => {
                let note = match &cap {
                    Some(c) if *c < formula => format!(
                        "formula-not-tight: one-door cap {} is below the formula {}",
                        Fraction(c.clone()),
                        Fraction(formula.clone())
                    ),
                    _ => format!("requires large n, not certified by scaling ({e}); a custom table may certify it"),
                };
                (false, Some(note))
            }
        },
    };
    let mut report = ValueReport::new(config, value, Method::ClosedForm);
    report.tight = certified && report.value == report.lemma_bound;
    report.certified = certified;
    report.annotation = annotation;
    report
}
