//! Exact primal simplex for `max c·x` subject to `A x <= b`, `x >= 0` with
//! `b >= 0`, so the slack basis is feasible from the start.
//!
//! Pricing is Dantzig's largest reduced profit until a run of degenerate
//! pivots, after which the smallest-index rule takes over for good and
//! cycling is impossible. Every solution is checked against the original
//! data: primal and dual feasibility and equal objective values.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Consecutive degenerate pivots tolerated before switching to the
/// smallest-index rule.
const DEGENERATE_STREAK: usize = 50;

/// A sparse row `Σ a_j x_j <= rhs`.
#[derive(Clone, Debug, Default)]
pub struct Row {
    pub coefficients: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

#[derive(Clone, Debug, Default)]
pub struct Problem {
    pub variables: usize,
    /// Sparse objective, maximized.
    pub objective: Vec<(usize, Rational)>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub value: Rational,
    pub x: Vec<Rational>,
    /// One multiplier per row; an optimal solution of the dual
    /// `min b·y` subject to `Aᵀ y >= c`, `y >= 0`.
    pub y: Vec<Rational>,
    pub pivots: u64,
}

impl Problem {
    pub fn new(variables: usize) -> Self {
        Problem { variables, ..Default::default() }
    }

    /// Adds a row, merging repeated columns and dropping zero coefficients.
    pub fn push_row(&mut self, mut coefficients: Vec<(usize, Rational)>, rhs: Rational) {
        coefficients.sort_by_key(|(j, _)| *j);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(coefficients.len());
        for (j, a) in coefficients {
            match merged.last_mut() {
                Some((last, acc)) if *last == j => *acc += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_zero());
        self.rows.push(Row { coefficients: merged, rhs });
    }

    fn check(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.rhs.is_negative() {
                return Err(Error::Internal(format!("row {i} has negative right-hand side")));
            }
            if row.coefficients.iter().any(|(j, _)| *j >= self.variables) {
                return Err(Error::Internal(format!("row {i} names an unknown column")));
            }
        }
        if self.objective.iter().any(|(j, _)| *j >= self.variables) {
            return Err(Error::Internal("objective names an unknown column".into()));
        }
        Ok(())
    }
}

struct Tableau {
    /// Rows over structural columns `0..n` and slack columns `n..n+m`,
    /// sorted by column.
    rows: Vec<Vec<(usize, Rational)>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced profits `c_j - z_j`, dense.
    profit: Vec<Rational>,
    value: Rational,
}

/// Solves `problem` exactly. `max_pivots` bounds the work.
pub fn maximize(problem: &Problem, max_pivots: u64) -> Result<Solution> {
    problem.check()?;
    let n = problem.variables;
    let m = problem.rows.len();
    let mut t = Tableau {
        rows: problem
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = r.coefficients.clone();
                row.push((n + i, Rational::from_integer(1.into())));
                row
            })
            .collect(),
        rhs: problem.rows.iter().map(|r| r.rhs.clone()).collect(),
        basis: (n..n + m).collect(),
        profit: vec![Rational::zero(); n + m],
        value: Rational::zero(),
    };
    for (j, c) in &problem.objective {
        t.profit[*j] += c;
    }
    let mut bland = false;
    let mut streak = 0usize;
    let mut pivots = 0u64;
    loop {
        let entering = if bland {
            t.profit.iter().position(|p| p.is_positive())
        } else {
            let mut best: Option<usize> = None;
            for (j, p) in t.profit.iter().enumerate() {
                if p.is_positive() && best.is_none_or(|b| *p > t.profit[b]) {
                    best = Some(j);
                }
            }
            best
        };
        let Some(e) = entering else { break };
        let mut leaving: Option<(usize, Rational)> = None;
        for i in 0..m {
            let Some(a) = entry(&t.rows[i], e) else { continue };
            if !a.is_positive() {
                continue;
            }
            let r = &t.rhs[i] / a;
            let better = match &leaving {
                None => true,
                Some((l, best)) => r < *best || (r == *best && t.basis[i] < t.basis[*l]),
            };
            if better {
                leaving = Some((i, r));
            }
        }
        let Some((l, step)) = leaving else {
            return Err(Error::Internal("linear program is unbounded".into()));
        };
        if step.is_zero() {
            streak += 1;
            if streak >= DEGENERATE_STREAK {
                bland = true;
            }
        } else {
            streak = 0;
        }
        pivot(&mut t, l, e);
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::BudgetExceeded { what: "simplex pivot", limit: max_pivots });
        }
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs[i].clone();
        }
    }
    let y: Vec<Rational> = (0..m).map(|i| -t.profit[n + i].clone()).collect();
    let solution = Solution { value: t.value, x, y, pivots };
    verify(problem, &solution)?;
    Ok(solution)
}

fn entry(row: &[(usize, Rational)], col: usize) -> Option<&Rational> {
    row.binary_search_by_key(&col, |(j, _)| *j).ok().map(|k| &row[k].1)
}

fn pivot(t: &mut Tableau, l: usize, e: usize) {
    let a = entry(&t.rows[l], e).expect("pivot entry").clone();
    for (_, v) in t.rows[l].iter_mut() {
        *v /= &a;
    }
    t.rhs[l] /= &a;
    let prow = std::mem::take(&mut t.rows[l]);
    let prhs = t.rhs[l].clone();
    for i in 0..t.rows.len() {
        if i == l {
            continue;
        }
        let Some(f) = entry(&t.rows[i], e).cloned() else { continue };
        t.rows[i] = axpy(&t.rows[i], &f, &prow);
        let delta = &f * &prhs;
        t.rhs[i] -= delta;
    }
    let f = t.profit[e].clone();
    if !f.is_zero() {
        for (j, v) in &prow {
            t.profit[*j] -= &f * v;
        }
        t.value += &f * &prhs;
    }
    t.rows[l] = prow;
    t.basis[l] = e;
}

/// `row - f * prow` for sorted sparse rows.
fn axpy(row: &[(usize, Rational)], f: &Rational, prow: &[(usize, Rational)]) -> Vec<(usize, Rational)> {
    let mut out = Vec::with_capacity(row.len() + prow.len());
    let (mut i, mut k) = (0, 0);
    while i < row.len() || k < prow.len() {
        let ci = row.get(i).map_or(usize::MAX, |(j, _)| *j);
        let ck = prow.get(k).map_or(usize::MAX, |(j, _)| *j);
        if ci < ck {
            out.push(row[i].clone());
            i += 1;
        } else if ck < ci {
            out.push((ck, -(f * &prow[k].1)));
            k += 1;
        } else {
            let v = &row[i].1 - f * &prow[k].1;
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            k += 1;
        }
    }
    out
}

/// Exact optimality check against the original data.
pub fn verify(problem: &Problem, s: &Solution) -> Result<()> {
    let fail = |what: &str| Err(Error::Internal(format!("simplex certificate failed: {what}")));
    if s.x.iter().any(|v| v.is_negative()) || s.y.iter().any(|v| v.is_negative()) {
        return fail("negative variable");
    }
    let mut column_sums = vec![Rational::zero(); problem.variables];
    let mut dual_value = Rational::zero();
    for (row, y) in problem.rows.iter().zip(&s.y) {
        let mut lhs = Rational::zero();
        for (j, a) in &row.coefficients {
            lhs += a * &s.x[*j];
            if !y.is_zero() {
                column_sums[*j] += a * y;
            }
        }
        if lhs > row.rhs {
            return fail("primal row violated");
        }
        dual_value += &row.rhs * y;
    }
    let mut c = vec![Rational::zero(); problem.variables];
    let mut primal_value = Rational::zero();
    for (j, v) in &problem.objective {
        c[*j] += v;
        primal_value += v * &s.x[*j];
    }
    if column_sums.iter().zip(&c).any(|(lhs, c)| lhs < c) {
        return fail("dual row violated");
    }
    if primal_value != s.value || dual_value != s.value {
        return fail("objective values differ");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn r(v: i64) -> Rational {
        ratio(v, 1)
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let mut p = Problem::new(2);
        p.objective = vec![(0, r(3)), (1, r(5))];
        p.push_row(vec![(0, r(1))], r(4));
        p.push_row(vec![(1, r(2))], r(12));
        p.push_row(vec![(0, r(3)), (1, r(2))], r(18));
        let s = maximize(&p, 1000).unwrap();
        assert_eq!(s.value, r(36));
        assert_eq!(s.x, vec![r(2), r(6)]);
        assert_eq!(s.y, vec![r(0), ratio(3, 2), r(1)]);
    }

    #[test]
    fn matching_pennies() {
        // max v s.t. v <= x1 - x2 + 1 ... shifted payoffs to keep x >= 0
        // payoff matrix [[2,0],[0,1]] for the row player: value 2/3
        let mut p = Problem::new(3);
        p.objective = vec![(0, r(1))];
        p.push_row(vec![(0, r(1)), (1, r(-2))], r(0));
        p.push_row(vec![(0, r(1)), (2, r(-1))], r(0));
        p.push_row(vec![(1, r(1)), (2, r(1))], r(1));
        let s = maximize(&p, 1000).unwrap();
        assert_eq!(s.value, ratio(2, 3));
        assert_eq!(s.x[1], ratio(1, 3));
        assert_eq!(&s.y[0] + &s.y[1], r(1));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // a classic cycling example for the largest-coefficient rule
        let mut p = Problem::new(4);
        p.objective = vec![(0, ratio(3, 4)), (1, r(-150)), (2, ratio(1, 50)), (3, r(-6))];
        p.push_row(vec![(0, ratio(1, 4)), (1, r(-60)), (2, ratio(-1, 25)), (3, r(9))], r(0));
        p.push_row(vec![(0, ratio(1, 2)), (1, r(-90)), (2, ratio(-1, 50)), (3, r(3))], r(0));
        p.push_row(vec![(2, r(1))], r(1));
        let s = maximize(&p, 10_000).unwrap();
        assert_eq!(s.value, ratio(1, 20));
    }

    #[test]
    fn unbounded_is_an_error() {
        let mut p = Problem::new(2);
        p.objective = vec![(0, r(1))];
        p.push_row(vec![(0, r(1)), (1, r(-1))], r(1));
        assert!(maximize(&p, 100).is_err());
    }

    #[test]
    fn pivot_budget() {
        let mut p = Problem::new(2);
        p.objective = vec![(0, r(1)), (1, r(1))];
        p.push_row(vec![(0, r(1))], r(1));
        p.push_row(vec![(1, r(1))], r(1));
        assert!(matches!(maximize(&p, 1), Err(Error::BudgetExceeded { .. })));
    }
}
