//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Solves `max c.x  s.t.  A x = b, x >= 0`. Sizes here are tiny (at most
//! a few dozen rows and a few hundred columns), so a full tableau is fine.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) type Q = BigRational;

#[derive(Debug, Clone)]
pub(crate) enum LpOutcome {
    Optimal {
        x: Vec<Q>,
        value: Q,
    },
    /// Farkas certificate: `y.A_j <= 0` for every column and `y.b > 0`.
    Infeasible {
        y: Vec<Q>,
    },
    Unbounded,
}

pub(crate) fn q_int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Exact rational value of a finite float.
pub(crate) fn q_float(v: f64) -> Q {
    Q::from_float(v).expect("finite float")
}

pub(crate) fn q_to_f64(q: &Q) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    n_struct: usize,
    n_art: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.n_struct + self.n_art
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        let width = self.rhs() + 1;
        let support: Vec<usize> = (0..width).filter(|&j| !self.rows[r][j].is_zero()).collect();
        for &j in &support {
            self.rows[r][j] = &self.rows[r][j] * &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &support {
                row[j] = &row[j] - &f * &pivot_row[j];
            }
        }
        self.basis[r] = c;
    }

    /// Reduced cost of column `j` for cost vector `cost` (indexed over all
    /// columns), maximization convention.
    fn reduced_cost(&self, cost: &[Q], j: usize) -> Q {
        let mut d = cost[j].clone();
        for (i, row) in self.rows.iter().enumerate() {
            if !row[j].is_zero() && !cost[self.basis[i]].is_zero() {
                d -= &cost[self.basis[i]] * &row[j];
            }
        }
        d
    }

    /// Runs primal simplex maximizing `cost` over the allowed columns.
    /// Returns false if unbounded.
    fn optimize(&mut self, cost: &[Q], allowed: usize) -> bool {
        loop {
            let entering = (0..allowed)
                .find(|&j| !self.basis.contains(&j) && self.reduced_cost(cost, j).is_positive());
            let Some(c) = entering else {
                return true;
            };
            let rhs = self.rhs();
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[rhs] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Solves `max c.x s.t. A x = b, x >= 0`. With `c = None` only
/// feasibility is decided and the objective value is zero.
pub(crate) fn solve(a: &[Vec<Q>], b: &[Q], c: Option<&[Q]>) -> LpOutcome {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut flipped = vec![false; m];
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let neg = b[i].is_negative();
        flipped[i] = neg;
        let mut row: Vec<Q> = Vec::with_capacity(n + m + 1);
        for v in &a[i] {
            row.push(if neg { -v.clone() } else { v.clone() });
        }
        for k in 0..m {
            row.push(if k == i { Q::one() } else { Q::zero() });
        }
        row.push(if neg { -b[i].clone() } else { b[i].clone() });
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        n_struct: n,
        n_art: m,
    };

    // Phase 1: maximize -sum(artificials).
    let mut cost1 = vec![Q::zero(); n + m];
    for c in cost1.iter_mut().skip(n) {
        *c = -Q::one();
    }
    t.optimize(&cost1, n + m);
    let rhs = t.rhs();
    let infeasibility: Q = t
        .rows
        .iter()
        .zip(&t.basis)
        .filter(|(_, &bi)| bi >= n)
        .map(|(row, _)| row[rhs].clone())
        .sum();
    if infeasibility.is_positive() {
        // y_k = c_B^T B^{-1} e_k with phase-1 costs of +1 on artificials.
        let y = (0..m)
            .map(|k| {
                let mut acc = Q::zero();
                for (i, row) in t.rows.iter().enumerate() {
                    if t.basis[i] >= n {
                        acc += &row[n + k];
                    }
                }
                if flipped[k] {
                    -acc
                } else {
                    acc
                }
            })
            .collect();
        return LpOutcome::Infeasible { y };
    }

    // Drive zero-valued artificials out of the basis where possible.
    for i in 0..m {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, j);
            }
        }
    }

    let value = match c {
        None => Q::zero(),
        Some(c) => {
            let mut cost = c.to_vec();
            cost.resize(n + m, Q::zero());
            if !t.optimize(&cost, n) {
                return LpOutcome::Unbounded;
            }
            t.rows
                .iter()
                .zip(&t.basis)
                .filter(|(_, &bi)| bi < n)
                .map(|(row, &bi)| &cost[bi] * &row[rhs])
                .sum()
        }
    };
    let mut x = vec![Q::zero(); n];
    for (i, &bi) in t.basis.iter().enumerate() {
        if bi < n {
            x[bi] = t.rows[i][rhs].clone();
        }
    }
    LpOutcome::Optimal { x, value }
}
