//! Acceptance checks. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails or runs over its time limit.

use std::io::Write;
use std::time::{Duration, Instant};

use treasure_core::combinatorics::{enumerate_allocations, Partition};
use treasure_core::montecarlo::{compare_to_exact, run_mc};
use treasure_core::rational::{ratio, Rational};
use treasure_core::solver::{
    closed_form_value, deterministic_win_set, evaluate_exact, hider_best_response_value, searcher_best_response_value,
    sequence_form_value, Budget,
};
use treasure_core::strategies::{DeterministicSearcher, HiderStrategy, PTableSearcher, SearcherStrategy};
use treasure_core::young::{min_valid_n, p_lambda_base, scaled_table, table_diagrams, verify_equalizing, PTable};
use treasure_core::{Error, GameConfig, RevealRule};

type Check = Result<(), String>;

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn multi(n: usize, d: usize, k: usize) -> GameConfig {
    GameConfig::multi(n, d, k).unwrap()
}

fn single(n: usize, d: usize, k: usize) -> GameConfig {
    GameConfig::single(n, d, k).unwrap()
}

fn table(n: usize, d: usize, k: usize, entries: &[(&[u32], (i64, i64))]) -> PTable {
    let mut t = PTable::new(n, d, k);
    for (diagram, (a, b)) in entries {
        t.insert(diagram.to_vec(), ratio(*a, *b));
    }
    t
}

fn c1() -> Check {
    let c = single(4, 2, 2);
    let closed = closed_form_value(&c).value;
    let lp = sequence_form_value(&c, &Budget::default()).map_err(fail)?.value;
    ensure(closed == ratio(2, 3) && lp == ratio(2, 3), || format!("closed form {closed}, lp {lp}, expected 2/3"))
}

fn c2() -> Check {
    let mut errors = Vec::new();
    for (n, d, k) in [(3, 3, 2), (3, 2, 2)] {
        let start = Instant::now();
        let v = sequence_form_value(&multi(n, d, k), &Budget::default()).map_err(fail)?.value;
        if v != ratio(2, 3) {
            errors.push(format!("lp(multi,{n},{d},{k}) = {v}, expected 2/3"));
        }
        if start.elapsed() > Duration::from_secs(300) {
            errors.push(format!("lp(multi,{n},{d},{k}) took {:?}", start.elapsed()));
        }
    }
    ensure(errors.is_empty(), || errors.join("; "))
}

fn c3() -> Check {
    for (n, d, k, expected) in [(9, 3, 2, ratio(8, 165)), (4, 2, 2, ratio(4, 10)), (5, 2, 2, ratio(4, 15))] {
        let c = multi(n, d, k);
        let s = PTableSearcher::scaled(&c).map_err(fail)?;
        let r = hider_best_response_value(&c, &s, &Budget::default()).map_err(fail)?;
        ensure(r.value == expected && r.tight && r.value == r.lemma_bound, || {
            format!("({n},{d},{k}): value {} tight {} bound {}", r.value, r.tight, r.lemma_bound)
        })?;
    }
    Ok(())
}

fn c4() -> Check {
    let cases = [
        (table(5, 3, 2, &[(&[1], (1, 1)), (&[2], (4, 7)), (&[1, 1], (6, 7))]), multi(5, 3, 2), ratio(8, 35)),
        (table(6, 3, 2, &[(&[1], (1, 1)), (&[2], (3, 7)), (&[1, 1], (4, 7))]), multi(6, 3, 2), ratio(1, 7)),
    ];
    for (t, c, expected) in cases {
        let s = PTableSearcher::with_table(&c, t.clone()).map_err(fail)?;
        let r = hider_best_response_value(&c, &s, &Budget::default()).map_err(fail)?;
        ensure(r.value == expected && r.tight, || format!("{c}: value {} tight {}", r.value, r.tight))?;
        let eq = verify_equalizing(&c, &t, &Budget::default()).map_err(fail)?;
        ensure(eq.equal && eq.value == Some(expected.clone()), || format!("{c}: not equalizing"))?;
    }
    Ok(())
}

fn c5() -> Check {
    let part = |p: &[u32]| Partition::new(p.to_vec()).unwrap();
    let a = p_lambda_base(2, 2, &part(&[1])).map_err(fail)?;
    ensure(a == ratio(2, 3), || format!("p(2,2,(1)) = {a}"))?;
    let b = Rational::from_integer(1.into()) - p_lambda_base(6, 3, &part(&[1])).map_err(fail)?;
    ensure(b == ratio(20, 56), || format!("q(6,3,(1)) = {b}"))?;
    match scaled_table(6, 3, 2) {
        Err(Error::ExceedsUnit { diagram, .. }) if diagram.parts() == [1] => {}
        other => return Err(format!("scaled_table(6,3,2) gave {other:?}")),
    }
    // upward scan: the first n >= dk whose scaled table has no entry above one
    let scan = (6..)
        .find(|&n| {
            table_diagrams(n, 3)
                .iter()
                .all(|l| p_lambda_base(n, 3, l).unwrap() * ratio(2, 1) <= ratio(1, 1))
        })
        .unwrap();
    let m = min_valid_n(3, 2);
    ensure(m == 9 && scan == 9, || format!("min_valid_n(3,2) = {m}, scan {scan}"))
}

/// Continuation frequencies of the mimic strategy, by exhaustive expansion
/// over uniformly drawn allocations and tie-breaking orders.
fn mimic_frequencies(n: usize, d: usize) -> std::collections::BTreeMap<Vec<u32>, (Rational, Rational)> {
    fn allocations(n: usize, d: u32) -> Vec<Vec<u32>> {
        if n == 1 {
            return vec![vec![d]];
        }
        let mut out = Vec::new();
        for first in 0..=d {
            for mut rest in allocations(n - 1, d - first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    fn orders(doors: &[usize], counts: &[u32]) -> Vec<Vec<usize>> {
        // every ordering by nonincreasing count, ties in any order
        if doors.is_empty() {
            return vec![Vec::new()];
        }
        let top = doors.iter().map(|&x| counts[x]).max().unwrap();
        let mut out = Vec::new();
        for (i, &door) in doors.iter().enumerate() {
            if counts[door] != top {
                continue;
            }
            let mut rest = doors.to_vec();
            rest.remove(i);
            for mut tail in orders(&rest, counts) {
                tail.insert(0, door);
                out.push(tail);
            }
        }
        out
    }
    let mut freq = std::collections::BTreeMap::new();
    for mu in allocations(n, d as u32) {
        let doors: Vec<usize> = (0..n).filter(|&x| mu[x] > 0).collect();
        let all = orders(&doors, &mu);
        let w = ratio(1, all.len() as i64);
        for order in all {
            let path: Vec<usize> = order.iter().flat_map(|&x| std::iter::repeat(x).take(mu[x] as usize)).collect();
            for t in 1..d {
                let mut diagram: Vec<u32> = Vec::new();
                for i in 0..t {
                    if i > 0 && path[i] == path[i - 1] {
                        *diagram.last_mut().unwrap() += 1;
                    } else {
                        diagram.push(1);
                    }
                }
                let entry = freq.entry(diagram).or_insert((ratio(0, 1), ratio(0, 1)));
                entry.1 += &w;
                if path[t] == path[t - 1] {
                    entry.0 += &w;
                }
            }
        }
    }
    freq
}

fn c6() -> Check {
    for n in 1..=6 {
        for d in 2..=4 {
            let freq = mimic_frequencies(n, d);
            for lambda in table_diagrams(n, d) {
                let p = p_lambda_base(n, d, &lambda).map_err(fail)?;
                let expected = match freq.get(lambda.parts()) {
                    Some((cont, total)) => cont / total,
                    None => ratio(0, 1),
                };
                ensure(p == expected, || format!("n={n} d={d} {lambda}: {p} vs {expected}"))?;
            }
        }
    }
    Ok(())
}

fn constant_value(c: &GameConfig, s: &dyn SearcherStrategy, expected: &Rational) -> Check {
    for a in enumerate_allocations(c.n, c.d, c.occupancy) {
        let v = evaluate_exact(c, s, &a, &Budget::default()).map_err(fail)?;
        ensure(v == *expected, || format!("{c} {a}: {v}, expected {expected}"))?;
    }
    Ok(())
}

fn c7() -> Check {
    for (n, d, k, expected) in [(3, 2, 1, ratio(1, 6)), (4, 2, 2, ratio(4, 10)), (9, 3, 2, ratio(8, 165))] {
        let c = multi(n, d, k);
        constant_value(&c, &PTableSearcher::scaled(&c).map_err(fail)?, &expected)?;
    }
    for (n, d, k, expected) in [(4, 2, 2, ratio(4, 6)), (6, 3, 2, ratio(8, 20))] {
        let c = single(n, d, k);
        constant_value(&c, &PTableSearcher::fresh_k(&c).map_err(fail)?, &expected)?;
    }
    Ok(())
}

fn c8() -> Check {
    for c in [single(4, 2, 2), multi(3, 3, 2)] {
        let bound = c.k.pow(c.d as u32);
        for seed in 0..1000u64 {
            let s = DeterministicSearcher::seeded(&c, seed);
            let w = deterministic_win_set(&c, &s).map_err(fail)?;
            ensure(w.len() <= bound, || format!("{c} seed {seed}: {} allocations", w.len()))?;
        }
    }
    let c = single(4, 2, 2);
    let w = deterministic_win_set(&c, &DeterministicSearcher::fresh_lowest(&c)).map_err(fail)?;
    ensure(w.len() == 4, || format!("fresh-door strategy wins {} allocations", w.len()))
}

fn c9() -> Check {
    let c = multi(5, 3, 2);
    let h = HiderStrategy::all_in_one(&c).map_err(fail)?;
    let v = searcher_best_response_value(&c, &h, &Budget::default()).map_err(fail)?.value;
    ensure(v == ratio(2, 5), || format!("best reply to all-in-one: {v}"))
}

fn c10() -> Check {
    let mut values = std::collections::BTreeMap::new();
    for n in 1..=4usize {
        for d in 1..=3usize {
            for k in 1..=3usize.min(n) {
                match sequence_form_value(&multi(n, d, k), &Budget::default()) {
                    Ok(r) => {
                        values.insert((n, d, k), r.value);
                    }
                    Err(Error::BudgetExceeded { .. }) => {}
                    Err(e) => return Err(e.to_string()),
                }
            }
        }
    }
    for (&(n, d, k), v) in &values {
        for (other, relation) in [((n + 1, d, k), "n"), ((n, d + 1, k), "d")] {
            if let Some(w) = values.get(&other) {
                ensure(w <= v, || format!("value rises in {relation} from {:?}={v} to {other:?}={w}", (n, d, k)))?;
            }
        }
        if let Some(w) = values.get(&(n, d, k + 1)) {
            ensure(w >= v, || format!("value falls in k at {:?}", (n, d, k)))?;
        }
    }
    ensure(values.len() >= 20, || format!("only {} configurations solved", values.len()))
}

fn c11() -> Check {
    let c = multi(9, 3, 2).with_reveal(RevealRule::LowestIndex);
    let s = PTableSearcher::scaled(&c).map_err(fail)?;
    let h = HiderStrategy::uniform(&c).map_err(fail)?;
    let r = run_mc(&c, &s, &h, 1_000_000, 20_240_601).map_err(fail)?;
    let cmp = compare_to_exact(&r, &ratio(8, 165));
    ensure(cmp.pass, || format!("(9,3,2): estimate {} z {}", r.estimate_decimal, cmp.z_score))?;
    let c = single(4, 2, 2).with_reveal(RevealRule::LowestIndex);
    let s = PTableSearcher::fresh_k(&c).map_err(fail)?;
    let h = HiderStrategy::uniform(&c).map_err(fail)?;
    let r = run_mc(&c, &s, &h, 1_000_000, 20_240_601).map_err(fail)?;
    let cmp = compare_to_exact(&r, &ratio(2, 3));
    ensure(cmp.pass, || format!("(4,2,2): estimate {} z {}", r.estimate_decimal, cmp.z_score))
}

fn c12() -> Check {
    let c = multi(4, 3, 2);
    let v = sequence_form_value(&c, &Budget::default()).map_err(fail)?.value;
    let mut bundled: Vec<Box<dyn SearcherStrategy>> = vec![Box::new(DeterministicSearcher::fresh_lowest(&c))];
    if let Ok(s) = PTableSearcher::fresh_k(&c) {
        bundled.push(Box::new(s));
    }
    if let Ok(s) = PTableSearcher::scaled(&c) {
        bundled.push(Box::new(s));
    }
    let mut best = ratio(0, 1);
    for s in &bundled {
        let r = hider_best_response_value(&c, s.as_ref(), &Budget::default()).map_err(fail)?;
        best = best.max(r.value);
    }
    let upper = ratio(8, 20).min(ratio(2, 4));
    ensure(best <= v && v <= upper, || format!("{best} <= {v} <= {upper} fails"))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, u64, fn() -> Check); 12] = [
        ("1 single (4,2,2): closed form = lp = 2/3", 30, c1),
        ("2 lp values (multi,3,3,2) = 2/3 and (multi,3,2,2) = 2/3", 600, c2),
        ("3 scaled table certifies (9,3,2), (4,2,2), (5,2,2) tight", 300, c3),
        ("4 custom tables certify 8/35 and 1/7, equalizing", 300, c4),
        ("5 p-table values, ExceedsUnit at (6,3,2), min_valid_n(3,2) = 9", 10, c5),
        ("6 p_lambda_base matches mimic expansion for n <= 6, d <= 4", 120, c6),
        ("7 equalizing strategies have constant value", 600, c7),
        ("8 deterministic win sets <= k^d; fresh-door strategy wins 4", 60, c8),
        ("9 best reply to all-in-one hider at (5,3,2) = 2/5", 60, c9),
        ("10 lp values monotone in n, d, k for n <= 4, d <= 3, k <= 3", 1800, c10),
        ("11 Monte Carlo within 4 sigma at (9,3,2) and single (4,2,2)", 120, c11),
        ("12 lp at (4,3,2) between bundled guarantees and 2/5", 1800, c12),
    ];
    let mut failed = Vec::new();
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = result.and_then(|()| {
            ensure(elapsed <= Duration::from_secs(limit), || format!("took {elapsed:.1?}, limit {limit} s"))
        });
        let line = match &result {
            Ok(()) => format!("PASS criterion {name} ({elapsed:.2?})\n"),
            Err(why) => format!("FAIL criterion {name} ({elapsed:.2?}): {why}\n"),
        };
        // written straight to stderr so the line shows even when output is captured
        let _ = std::io::stderr().write_all(line.as_bytes());
        if result.is_err() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
