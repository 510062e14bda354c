//! A dense two-phase simplex over exact rationals.
//!
//! Variables are nonnegative and the objective is maximized. Pivoting follows
//! Bland's rule, so the method terminates on degenerate problems.

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub rel: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn set_objective(&mut self, coeffs: Vec<Rational>) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.objective = coeffs;
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, rel: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn maximize(&self) -> LpOutcome {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    num_vars: usize,
    /// first artificial column; columns from here on are artificial
    art_start: usize,
    cols: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let m = lp.constraints.len();
        let n = lp.num_vars;
        let normalized: Vec<(Vec<Rational>, Relation, Rational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), flipped, -c.rhs.clone())
                } else {
                    (c.coeffs.clone(), c.rel, c.rhs.clone())
                }
            })
            .collect();
        let slack_count = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let art_count = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let art_start = n + slack_count;
        let cols = art_start + art_count;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut s, mut a) = (n, art_start);
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![Rational::zero(); cols + 1];
            row[..n].clone_from_slice(&coeffs);
            row[cols] = rhs;
            match rel {
                Relation::Le => {
                    row[s] = Rational::one();
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -Rational::one();
                    s += 1;
                    row[a] = Rational::one();
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = Rational::one();
                    basis.push(a);
                    a += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            num_vars: n,
            art_start,
            cols,
        }
    }

    fn pivot(&mut self, r: usize, c: usize, reduced: &mut [Rational]) {
        let p = self.rows[r][c].clone();
        if p != Rational::one() {
            let inv = p.recip().expect("nonzero pivot");
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &factor * y;
                }
            }
        }
        let factor = reduced[c].clone();
        if !factor.is_zero() {
            for (x, y) in reduced.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &factor * y;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c_j − c_B·column_j`, with the negated objective value in the
    /// last slot.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut red: Vec<Rational> = cost.to_vec();
        red.push(Rational::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (x, y) in red.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= cb * y;
                }
            }
        }
        red
    }

    /// Runs simplex iterations over columns `< allowed`; false when unbounded.
    fn iterate(&mut self, reduced: &mut Vec<Rational>, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| reduced[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(Rational, usize, usize)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[self.cols] / &row[c];
                let better = match &best {
                    None => true,
                    Some((q, _, b)) => ratio < *q || (ratio == *q && self.basis[r] < *b),
                };
                if better {
                    best = Some((ratio, r, self.basis[r]));
                }
            }
            let Some((_, r, _)) = best else {
                return false;
            };
            self.pivot(r, c, reduced);
        }
    }

    fn solve(mut self, objective: &[Rational]) -> LpOutcome {
        if self.art_start < self.cols {
            let mut phase1 = vec![Rational::zero(); self.cols];
            for c in phase1.iter_mut().skip(self.art_start) {
                *c = -Rational::one();
            }
            let mut red = self.reduced_costs(&phase1);
            self.iterate(&mut red, self.cols);
            let infeasibility: Rational = self
                .rows
                .iter()
                .zip(&self.basis)
                .filter(|(_, &b)| b >= self.art_start)
                .map(|(row, _)| row[self.cols].clone())
                .sum();
            if infeasibility.is_positive() {
                return LpOutcome::Infeasible;
            }
            // drive zero-valued artificials out of the basis, dropping redundant rows
            let mut r = 0;
            while r < self.rows.len() {
                if self.basis[r] >= self.art_start {
                    match (0..self.art_start).find(|&j| !self.rows[r][j].is_zero()) {
                        Some(c) => {
                            self.pivot(r, c, &mut red);
                            r += 1;
                        }
                        None => {
                            self.rows.remove(r);
                            self.basis.remove(r);
                        }
                    }
                } else {
                    r += 1;
                }
            }
        }
        let mut cost = vec![Rational::zero(); self.cols];
        cost[..self.num_vars].clone_from_slice(objective);
        let mut red = self.reduced_costs(&cost);
        if !self.iterate(&mut red, self.art_start) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); self.num_vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.num_vars {
                x[b] = row[self.cols].clone();
            }
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { value, x }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64) -> Rational {
        Rational::int(p)
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![r(3), r(5)]);
        lp.add(vec![r(1), r(0)], Relation::Le, r(4));
        lp.add(vec![r(0), r(2)], Relation::Le, r(12));
        lp.add(vec![r(3), r(2)], Relation::Le, r(18));
        assert_eq!(
            lp.maximize(),
            LpOutcome::Optimal {
                value: r(36),
                x: vec![r(2), r(6)]
            }
        );
    }

    #[test]
    fn equality_and_lower_bounds() {
        // max −x − y s.t. x + y = 1, x ≥ 1/3
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![r(-1), r(-1)]);
        lp.add(vec![r(1), r(1)], Relation::Eq, r(1));
        lp.add(vec![r(1), r(0)], Relation::Ge, Rational::frac(1, 3));
        match lp.maximize() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, r(-1));
                assert!(x[0] >= Rational::frac(1, 3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add(vec![r(1)], Relation::Ge, r(2));
        lp.add(vec![r(1)], Relation::Le, r(1));
        assert_eq!(lp.maximize(), LpOutcome::Infeasible);
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![r(1), r(0)]);
        lp.add(vec![r(1), r(-1)], Relation::Le, r(1));
        assert_eq!(lp.maximize(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // −x ≤ −2 is x ≥ 2; duplicated equality rows are redundant
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![r(-1), r(0)]);
        lp.add(vec![r(-1), r(0)], Relation::Le, r(-2));
        lp.add(vec![r(1), r(1)], Relation::Eq, r(5));
        lp.add(vec![r(2), r(2)], Relation::Eq, r(10));
        assert_eq!(
            lp.maximize(),
            LpOutcome::Optimal {
                value: r(-2),
                x: vec![r(2), r(3)]
            }
        );
    }
}
