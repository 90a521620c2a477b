//! Fraction-free integer elimination used for rank tests.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Row-echelon basis over the integers. Each stored row is primitive and has
/// a pivot column where every later row is zero.
#[derive(Debug, Clone, Default)]
pub(crate) struct IntegerBasis {
    rows: Vec<(usize, Vec<i128>)>,
}

fn primitive(v: &mut [i128]) {
    let g = v.iter().fold(0i128, |g, &x| g.gcd(&x));
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
}

impl IntegerBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis and stores it if independent.
    pub fn insert(&mut self, v: &[i64]) -> Result<bool> {
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for (p, row) in &self.rows {
            let b = w[*p];
            if b == 0 {
                continue;
            }
            let a = row[*p];
            for (wi, ri) in w.iter_mut().zip(row) {
                let lhs = wi.checked_mul(a).ok_or(Error::Overflow)?;
                let rhs = ri.checked_mul(b).ok_or(Error::Overflow)?;
                *wi = lhs.checked_sub(rhs).ok_or(Error::Overflow)?;
            }
            primitive(&mut w);
        }
        match w.iter().position(|&x| x != 0) {
            Some(p) => {
                self.rows.push((p, w));
                Ok(true)
            }
            None => Ok(false),
        }
    }
}

fn rank_bigint(rows: &[Vec<i64>]) -> usize {
    let mut basis: Vec<(usize, Vec<BigInt>)> = Vec::new();
    for v in rows {
        let mut w: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        for (p, row) in &basis {
            if w[*p].is_zero() {
                continue;
            }
            let a = row[*p].clone();
            let b = w[*p].clone();
            for (wi, ri) in w.iter_mut().zip(row) {
                *wi = &*wi * &a - ri * &b;
            }
            let g = w.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            if !g.is_zero() && g.abs() != BigInt::from(1) {
                w.iter_mut().for_each(|x| *x = &*x / &g);
            }
        }
        if let Some(p) = w.iter().position(|x| !x.is_zero()) {
            basis.push((p, w));
        }
    }
    basis.len()
}

/// Exact rank of an integer matrix given by rows.
pub(crate) fn rank(rows: &[Vec<i64>]) -> usize {
    let mut basis = IntegerBasis::new();
    for r in rows {
        if basis.insert(r).is_err() {
            return rank_bigint(rows);
        }
    }
    basis.rank()
}

/// Affine rank (dimension of the affine hull) of a point set.
pub(crate) fn affine_rank(points: &[Vec<i64>]) -> usize {
    let Some(first) = points.first() else {
        return 0;
    };
    let diffs: Vec<Vec<i64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    rank(&diffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_simple_matrices() {
        assert_eq!(rank(&[vec![1, 0], vec![0, 1], vec![1, 1]]), 2);
        assert_eq!(rank(&[vec![2, 4], vec![1, 2]]), 1);
        assert_eq!(rank(&[vec![0, 0]]), 0);
        assert_eq!(
            affine_rank(&[vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]),
            2
        );
        assert_eq!(affine_rank(&[vec![3, 3]]), 0);
    }

    #[test]
    fn bigint_fallback_agrees() {
        let rows = vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]];
        assert_eq!(rank_bigint(&rows), 3);
        assert_eq!(rank(&rows), 3);
    }
}
