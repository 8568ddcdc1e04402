use std::collections::BTreeMap;

use proptest::prelude::*;
use treasure_core::combinatorics::{enumerate_allocations, Allocation};
use treasure_core::game::{GuessSet, History};
use treasure_core::montecarlo::{run_mc, run_mc_sequential};
use treasure_core::rational::{ratio, Rational};
use treasure_core::solver::{
    closed_form_value, deterministic_win_set, evaluate_exact, evaluate_generic, hider_best_response_value,
    searcher_best_response_value, sequence_form_value, Budget,
};
use treasure_core::strategies::{DeterministicSearcher, HiderStrategy, PTableSearcher, SearcherStrategy};
use treasure_core::{GameConfig, RevealRule};

fn zero() -> Rational {
    ratio(0, 1)
}

/// Best reply to a uniform hider when reveals are drawn by `rule`, by plain
/// recursion over weighted allocations. `states` holds remaining counts.
fn reply_oracle(n: usize, k: usize, states: Vec<(Vec<u32>, Rational)>, left: usize, rule: RevealRule) -> Rational {
    if left == 0 {
        return states.iter().map(|(_, w)| w.clone()).fold(zero(), |a, b| a + b);
    }
    let mut best = zero();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let mut outcomes: BTreeMap<usize, Vec<(Vec<u32>, Rational)>> = BTreeMap::new();
        for (counts, w) in &states {
            let hit: Vec<usize> = (0..n).filter(|&x| mask >> x & 1 == 1 && counts[x] > 0).collect();
            if hit.is_empty() {
                continue;
            }
            let picks: Vec<(usize, Rational)> = match rule {
                RevealRule::LowestIndex => vec![(hit[0], ratio(1, 1))],
                RevealRule::UniformDoors => hit.iter().map(|&x| (x, ratio(1, hit.len() as i64))).collect(),
                _ => unreachable!(),
            };
            for (door, p) in picks {
                let mut next = counts.clone();
                next[door] -= 1;
                outcomes.entry(door).or_default().push((next, w * p));
            }
        }
        let total = outcomes
            .into_values()
            .map(|s| reply_oracle(n, k, s, left - 1, rule))
            .fold(zero(), |a, b| a + b);
        best = best.max(total);
    }
    best
}

fn uniform_reply(config: &GameConfig) -> Rational {
    let all = enumerate_allocations(config.n, config.d, config.occupancy);
    let w = ratio(1, all.len() as i64);
    let states = all.into_iter().map(|a| (a.counts().to_vec(), w.clone())).collect();
    reply_oracle(config.n, config.k, states, config.d, config.reveal)
}

#[test]
fn best_reply_matches_recursion_oracle() {
    for (n, d, k) in [(2, 2, 1), (3, 2, 1), (3, 2, 2), (3, 3, 2), (4, 2, 2), (4, 3, 2)] {
        for rule in [RevealRule::UniformDoors, RevealRule::LowestIndex] {
            let c = GameConfig::multi(n, d, k).unwrap().with_reveal(rule);
            let h = HiderStrategy::uniform(&c).unwrap();
            let v = searcher_best_response_value(&c, &h, &Budget::default()).unwrap().value;
            assert_eq!(v, uniform_reply(&c), "{c}");
        }
    }
}

#[test]
fn three_doors_three_treasures_two_guesses_is_three_fifths() {
    // a hider who may choose reveals can draw them uniformly, so the uniform
    // hider's guarantee under uniform reveals bounds the game value
    let chance = GameConfig::multi(3, 3, 2).unwrap().with_reveal(RevealRule::UniformDoors);
    let bound = uniform_reply(&chance);
    assert_eq!(bound, ratio(3, 5));
    let c = GameConfig::multi(3, 3, 2).unwrap();
    let lp = sequence_form_value(&c, &Budget::default()).unwrap();
    assert_eq!(lp.value, ratio(3, 5));
    assert!(lp.value <= bound);
}

#[test]
fn lp_sandwich_small_games() {
    for n in 1..=4usize {
        for d in 1..=3usize {
            for k in 1..=2usize.min(n) {
                let c = GameConfig::multi(n, d, k).unwrap();
                let r = sequence_form_value(&c, &Budget::default()).unwrap();
                let cap = r.upper_bound();
                assert!(r.value <= cap, "{c}: {} above {}", r.value, cap);
                let fresh = DeterministicSearcher::fresh_lowest(&c);
                let floor = hider_best_response_value(&c, &fresh, &Budget::default()).unwrap().value;
                assert!(floor <= r.value, "{c}");
                if let Ok(s) = PTableSearcher::scaled(&c) {
                    let v = hider_best_response_value(&c, &s, &Budget::default()).unwrap().value;
                    assert!(v <= r.value, "{c}");
                }
                let chance = c.with_reveal(RevealRule::UniformDoors);
                assert!(r.value <= uniform_reply(&chance), "{c}");
            }
        }
    }
}

#[test]
fn closed_form_agrees_with_lp_where_certified() {
    for (n, d, k) in [(3, 2, 1), (4, 2, 2), (5, 2, 2), (4, 1, 2)] {
        let c = GameConfig::multi(n, d, k).unwrap();
        let closed = closed_form_value(&c);
        if closed.certified {
            assert_eq!(closed.value, sequence_form_value(&c, &Budget::default()).unwrap().value, "{c}");
        }
    }
    let c = GameConfig::single(4, 2, 2).unwrap();
    assert_eq!(closed_form_value(&c).value, sequence_form_value(&c, &Budget::default()).unwrap().value);
}

#[test]
fn lp_monotone_in_doors_and_treasures() {
    let v = |n, d, k| sequence_form_value(&GameConfig::multi(n, d, k).unwrap(), &Budget::default()).unwrap().value;
    for k in 1..=2 {
        for d in 1..=3 {
            let mut last: Option<Rational> = None;
            for n in k.max(1)..=4 {
                let x = v(n, d, k);
                if let Some(prev) = &last {
                    assert!(x <= *prev, "n: ({n},{d},{k})");
                }
                last = Some(x);
            }
        }
    }
    assert!(v(4, 3, 2) <= v(4, 2, 2));
    assert!(v(3, 2, 1) <= v(3, 2, 2));
}

#[test]
fn random_deterministic_win_sets_respect_count() {
    for c in [GameConfig::multi(3, 2, 2).unwrap(), GameConfig::single(5, 2, 2).unwrap()] {
        let bound = c.k.pow(c.d as u32);
        for seed in 0..300 {
            let w = deterministic_win_set(&c, &DeterministicSearcher::seeded(&c, seed)).unwrap();
            assert!(w.len() <= bound, "{c} seed {seed}");
        }
    }
}

/// Next-door distribution of the mimic searcher after every possible run
/// of hits, by expansion over uniform allocations and tie orders.
fn mimic_next_door(n: usize, d: usize) -> BTreeMap<Vec<usize>, BTreeMap<usize, Rational>> {
    fn orders(doors: Vec<usize>, counts: &[u32]) -> Vec<Vec<usize>> {
        if doors.is_empty() {
            return vec![Vec::new()];
        }
        let top = doors.iter().map(|&x| counts[x]).max().unwrap();
        let mut out = Vec::new();
        for &door in doors.iter().filter(|&&x| counts[x] == top) {
            let rest: Vec<usize> = doors.iter().copied().filter(|&x| x != door).collect();
            for mut tail in orders(rest, counts) {
                tail.insert(0, door);
                out.push(tail);
            }
        }
        out
    }
    let mut table: BTreeMap<Vec<usize>, BTreeMap<usize, Rational>> = BTreeMap::new();
    for a in enumerate_allocations(n, d, treasure_core::Occupancy::Multi) {
        let counts = a.counts();
        let positive: Vec<usize> = (0..n).filter(|&x| counts[x] > 0).collect();
        // doors with zero treasures follow in any order; they only matter
        // for the first guess, which the positive doors cover
        let all = orders(positive, counts);
        let w = ratio(1, all.len() as i64);
        for order in all {
            let path: Vec<usize> = order.iter().flat_map(|&x| std::iter::repeat(x).take(counts[x] as usize)).collect();
            for t in 0..d {
                let next = table.entry(path[..t].to_vec()).or_default();
                *next.entry(path[t]).or_insert_with(zero) += &w;
            }
        }
    }
    for next in table.values_mut() {
        let total = next.values().fold(zero(), |a, b| a + b);
        for p in next.values_mut() {
            *p /= &total;
        }
    }
    table
}

#[test]
fn mimic_strategy_matches_expansion() {
    for n in 1..=5 {
        for d in 1..=3 {
            let c = GameConfig::multi(n, d, 1).unwrap();
            let s = PTableSearcher::mu_mimic(&c).unwrap();
            for (prefix, expected) in mimic_next_door(n, d) {
                let mut h = History::new();
                for &door in &prefix {
                    h.push(GuessSet::from_doors([door]), Some(door));
                }
                let got: BTreeMap<usize, Rational> = s
                    .guess_distribution(&h)
                    .unwrap()
                    .into_iter()
                    .map(|(g, p)| (g.doors().next().unwrap(), p))
                    .filter(|(_, p)| *p != zero())
                    .collect();
                assert_eq!(got, expected, "n={n} d={d} after {prefix:?}");
            }
        }
    }
}

#[test]
fn three_treasure_family_certifies() {
    // d = 3 at n = 3k - 1: p_(1) = 1 and the two second-round entries
    // chosen so that every allocation is won with probability k^3 / C(n+2, 3)
    for (k, p2, p11) in [(2u32, ratio(4, 7), ratio(6, 7))] {
        let n = 3 * k as usize - 1;
        let c = GameConfig::multi(n, 3, k as usize).unwrap();
        let mut t = treasure_core::young::PTable::new(n, 3, k as usize);
        t.insert(vec![1], ratio(1, 1));
        t.insert(vec![2], p2);
        t.insert(vec![1, 1], p11);
        let s = PTableSearcher::with_table(&c, t).unwrap();
        let r = hider_best_response_value(&c, &s, &Budget::default()).unwrap();
        assert!(r.tight, "{c}: {}", r.value);
    }
}

#[test]
fn chance_reveal_rules_agree_on_table_strategies() {
    // table strategies only look at discovery counts, so which treasure door
    // is disclosed does not change their value
    for (n, d, k) in [(3, 2, 1), (4, 2, 2), (5, 3, 1), (6, 2, 2)] {
        let base = GameConfig::multi(n, d, k).unwrap();
        if PTableSearcher::scaled(&base).is_err() {
            continue;
        }
        let values: Vec<Rational> = [RevealRule::UniformDoors, RevealRule::LowestIndex, RevealRule::UniformTreasures]
            .into_iter()
            .map(|rule| {
                let c = base.with_reveal(rule);
                let s = PTableSearcher::scaled(&c).unwrap();
                hider_best_response_value(&c, &s, &Budget::default()).unwrap().value
            })
            .collect();
        assert!(values.windows(2).all(|w| w[0] == w[1]), "{base}: {values:?}");
    }
}

#[test]
fn monte_carlo_insensitive_to_chance_reveal_rule() {
    for (n, d, k) in [(3, 2, 1), (4, 2, 2), (6, 3, 2)] {
        let mut estimates = Vec::new();
        for rule in [RevealRule::UniformDoors, RevealRule::LowestIndex] {
            let c = GameConfig::multi(n, d, k).unwrap().with_reveal(rule);
            let s = DeterministicSearcher::fresh_lowest(&c);
            let mixed = PTableSearcher::mu_mimic(&GameConfig::multi(n, d, 1).unwrap().with_reveal(rule)).ok();
            let h = HiderStrategy::uniform(&c).unwrap();
            let r = run_mc(&c, &s, &h, 20_000, 7).unwrap();
            estimates.push((r.estimate_decimal, r.stderr));
            if let (Some(m), 1) = (mixed, k) {
                let exact = hider_best_response_value(&c, &m, &Budget::default()).unwrap();
                let mc = run_mc(&c, &m, &h, 20_000, 11).unwrap();
                let z = (mc.estimate_decimal - treasure_core::rational::to_f64(&exact.value)).abs() / mc.stderr.max(1e-12);
                assert!(z <= 4.0 || exact.value == mc.estimate, "{c}: z = {z}");
            }
        }
        let (a, sa) = estimates[0];
        let (b, sb) = estimates[1];
        let spread = (sa * sa + sb * sb).sqrt().max(1e-12);
        assert!((a - b).abs() <= 5.0 * spread, "({n},{d},{k}): {a} vs {b}");
    }
}

fn small_config() -> impl Strategy<Value = GameConfig> {
    (1usize..=4, 1usize..=3, 1usize..=2, any::<bool>(), 0usize..4).prop_filter_map("valid", |(n, d, k, multi, r)| {
        let rule = [RevealRule::Adversarial, RevealRule::LowestIndex, RevealRule::UniformDoors, RevealRule::UniformTreasures][r];
        let c = if multi { GameConfig::multi(n, d, k) } else { GameConfig::single(n, d, k) };
        c.ok().map(|c| c.with_reveal(rule))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn seeded_win_sets_bounded(c in small_config(), seed in any::<u64>()) {
        let w = deterministic_win_set(&c, &DeterministicSearcher::seeded(&c, seed)).unwrap();
        prop_assert!(w.len() <= c.k.pow(c.d as u32));
    }

    #[test]
    fn deterministic_values_are_zero_or_one(c in small_config(), seed in any::<u64>()) {
        let c = c.with_reveal(RevealRule::LowestIndex);
        let s = DeterministicSearcher::seeded(&c, seed);
        for a in enumerate_allocations(c.n, c.d, c.occupancy) {
            let v = evaluate_exact(&c, &s, &a, &Budget::default()).unwrap();
            prop_assert!(v == zero() || v == ratio(1, 1));
        }
    }

    #[test]
    fn lumped_walk_equals_history_walk(c in small_config()) {
        let Ok(s) = PTableSearcher::scaled(&c) else { return Ok(()) };
        for a in enumerate_allocations(c.n, c.d, c.occupancy) {
            let lumped = evaluate_exact(&c, &s, &a, &Budget::default()).unwrap();
            let plain = evaluate_generic(&c, &s, &a, &Budget::default()).unwrap();
            prop_assert_eq!(lumped, plain);
        }
    }

    #[test]
    fn hider_reply_never_beats_counting_bound(c in small_config()) {
        let s = DeterministicSearcher::fresh_lowest(&c);
        let r = hider_best_response_value(&c, &s, &Budget::default()).unwrap();
        prop_assert!(r.value <= r.upper_bound());
    }

    #[test]
    fn monte_carlo_parallel_equals_sequential(seed in any::<u64>(), trials in 1u64..10_000) {
        let c = GameConfig::multi(4, 2, 2).unwrap().with_reveal(RevealRule::UniformDoors);
        let s = PTableSearcher::scaled(&c).unwrap();
        let h = HiderStrategy::uniform(&c).unwrap();
        let a = run_mc(&c, &s, &h, trials, seed).unwrap();
        let b = run_mc_sequential(&c, &s, &h, trials, seed).unwrap();
        prop_assert_eq!(a.wins, b.wins);
    }

    #[test]
    fn relabeled_allocations_have_equal_table_value(seed in any::<u64>()) {
        let c = GameConfig::multi(4, 3, 1).unwrap();
        let s = PTableSearcher::mu_mimic(&c).unwrap();
        let all = enumerate_allocations(4, 3, c.occupancy);
        let a = &all[(seed % all.len() as u64) as usize];
        let mut rotated = a.counts().to_vec();
        rotated.rotate_left((seed % 4) as usize);
        let b = Allocation::new(rotated);
        prop_assert_eq!(
            evaluate_exact(&c, &s, a, &Budget::default()).unwrap(),
            evaluate_exact(&c, &s, &b, &Budget::default()).unwrap()
        );
    }
}
