//! Double description method for the facets of a full-dimensional polytope
//! given by integer vertices.
//!
//! The inequality `W.p <= w` is encoded as the ray `h = (w, W)` of the cone
//! `{h : h.(1, -v) >= 0 for every vertex v}`. That cone is pointed when the
//! vertices affinely span the space, and its extreme rays are the facets.
//! Rays are kept as primitive integer vectors, so the output is exact.

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::exact::IntegerBasis;
use super::lp::{q_int, Q};
use crate::error::{Error, Result};

/// Maximum number of vertices; zero sets are stored as `u128` masks.
pub(crate) const MAX_DD_VERTICES: usize = 128;

#[derive(Debug, Clone)]
struct Ray {
    h: Vec<i128>,
    zeros: u128,
}

fn dot(a: &[i64], h: &[i128]) -> Result<i128> {
    let mut acc: i128 = 0;
    for (&x, &y) in a.iter().zip(h) {
        if x != 0 {
            acc = acc
                .checked_add((x as i128).checked_mul(y).ok_or(Error::Overflow)?)
                .ok_or(Error::Overflow)?;
        }
    }
    Ok(acc)
}

fn make_primitive(h: &mut [i128]) {
    let g = h.iter().fold(0i128, |g, &x| g.gcd(&x));
    if g > 1 {
        h.iter_mut().for_each(|x| *x /= g);
    }
}

fn zero_set(rows: &[Vec<i64>], h: &[i128]) -> Result<u128> {
    let mut z = 0u128;
    for (j, a) in rows.iter().enumerate() {
        if dot(a, h)? == 0 {
            z |= 1 << j;
        }
    }
    Ok(z)
}

/// Inverts a square integer matrix over the rationals and returns its
/// columns scaled to primitive integer vectors.
fn inverse_columns(m: &[Vec<i64>]) -> Result<Vec<Vec<i128>>> {
    let k = m.len();
    let mut aug: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<Q> = row.iter().map(|&x| q_int(x)).collect();
            r.extend((0..k).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..k {
        let p = (col..k)
            .find(|&r| !aug[r][col].is_zero())
            .ok_or_else(|| Error::validation("initial constraint block is singular"))?;
        aug.swap(col, p);
        let inv = aug[col][col].recip();
        for x in aug[col].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x = &*x - &f * p;
                }
            }
        }
    }
    let mut cols = Vec::with_capacity(k);
    for j in 0..k {
        let entries: Vec<Q> = (0..k).map(|i| aug[i][k + j].clone()).collect();
        let lcm = entries
            .iter()
            .fold(num_bigint::BigInt::one(), |l, q| l.lcm(q.denom()));
        let mut col = Vec::with_capacity(k);
        for q in &entries {
            let v = (q.numer() * (&lcm / q.denom()))
                .to_i128()
                .ok_or(Error::Overflow)?;
            col.push(v);
        }
        make_primitive(&mut col);
        cols.push(col);
    }
    Ok(cols)
}

/// Returns every facet as `(W, w)` meaning `W.p <= w`, sorted.
pub(crate) fn facets(points: &[Vec<i64>]) -> Result<Vec<(Vec<i64>, i64)>> {
    let m = points.len();
    if m == 0 {
        return Err(Error::validation("vertex list is empty"));
    }
    if m > MAX_DD_VERTICES {
        return Err(Error::UnsupportedScenario(format!(
            "double description is limited to {MAX_DD_VERTICES} vertices, got {m}"
        )));
    }
    let d = points[0].len();
    let rows: Vec<Vec<i64>> = points
        .iter()
        .map(|v| std::iter::once(1).chain(v.iter().map(|&x| -x)).collect())
        .collect();

    let mut basis = IntegerBasis::new();
    let mut initial = Vec::new();
    for (j, r) in rows.iter().enumerate() {
        if basis.insert(r)? {
            initial.push(j);
            if initial.len() == d + 1 {
                break;
            }
        }
    }
    if initial.len() < d + 1 {
        return Err(Error::validation(format!(
            "vertices span an affine space of dimension {} < {d}; polytope is not full-dimensional",
            initial.len().saturating_sub(1)
        )));
    }

    let block: Vec<Vec<i64>> = initial.iter().map(|&j| rows[j].clone()).collect();
    let mut rays = Vec::with_capacity(d + 1);
    for h in inverse_columns(&block)? {
        let zeros = zero_set(&rows, &h)?;
        rays.push(Ray { h, zeros });
    }
    let mut processed: u128 = initial.iter().fold(0, |acc, &j| acc | (1 << j));

    for (j, a) in rows.iter().enumerate() {
        if processed >> j & 1 == 1 {
            continue;
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut keep = Vec::with_capacity(rays.len());
        for (k, r) in rays.iter().enumerate() {
            let s = dot(a, &r.h)?;
            match s.signum() {
                1 => {
                    pos.push((k, s));
                    keep.push(k);
                }
                -1 => neg.push((k, s)),
                _ => keep.push(k),
            }
        }
        let mut fresh = Vec::new();
        for &(p, sp) in &pos {
            for &(q, sq) in &neg {
                let common = rays[p].zeros & rays[q].zeros & processed;
                if (common.count_ones() as usize) + 1 < d {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, r)| k == p || k == q || r.zeros & common != common);
                if !adjacent {
                    continue;
                }
                let mut h = Vec::with_capacity(d + 1);
                for (x, y) in rays[q].h.iter().zip(&rays[p].h) {
                    let l = sp.checked_mul(*x).ok_or(Error::Overflow)?;
                    let r = sq.checked_mul(*y).ok_or(Error::Overflow)?;
                    h.push(l.checked_sub(r).ok_or(Error::Overflow)?);
                }
                make_primitive(&mut h);
                let zeros = zero_set(&rows, &h)?;
                fresh.push(Ray { h, zeros });
            }
        }
        let mut next: Vec<Ray> = keep.into_iter().map(|k| rays[k].clone()).collect();
        next.extend(fresh);
        rays = next;
        processed |= 1 << j;
    }

    let mut out = Vec::with_capacity(rays.len());
    for r in rays {
        let bound = i64::try_from(r.h[0]).map_err(|_| Error::Overflow)?;
        let w = r.h[1..]
            .iter()
            .map(|&x| i64::try_from(x).map_err(|_| Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        out.push((w, bound));
    }
    out.sort();
    out.dedup();
    Ok(out)
}
