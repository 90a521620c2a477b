//! Relabeling symmetries of witnesses: input permutations on either side,
//! exchange of the parties, and global outcome relabeling.
//!
//! Outcome relabeling sends `P -> 1 - P`, so `W.P <= w` becomes
//! `(-W).P <= w - sum(W)`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::scenario::{Coefficients, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymmetryOp {
    pub alice_perm: Vec<usize>,
    pub bob_perm: Vec<usize>,
    pub swap_parties: bool,
    pub negate: bool,
}

impl SymmetryOp {
    pub fn identity(n: usize) -> Self {
        Self {
            alice_perm: (0..n).collect(),
            bob_perm: (0..n).collect(),
            swap_parties: false,
            negate: false,
        }
    }

    pub fn n(&self) -> usize {
        self.alice_perm.len()
    }

    /// `out[x*N + y]` is read from `source[x*N + y]` of the input.
    ///
    /// Without a swap the entry at `(x, y)` comes from
    /// `(alice_perm[x], bob_perm[y])`; with a swap it comes from
    /// `(alice_perm[y], bob_perm[x])`.
    pub fn source_indices(&self) -> Vec<usize> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let (r, c) = if self.swap_parties {
                    (self.alice_perm[y], self.bob_perm[x])
                } else {
                    (self.alice_perm[x], self.bob_perm[y])
                };
                out.push(r * n + c);
            }
        }
        out
    }

    /// The op equal to applying `other` first and then `self`.
    pub fn compose(&self, other: &SymmetryOp) -> SymmetryOp {
        let after = |p: &[usize], q: &[usize]| -> Vec<usize> { q.iter().map(|&i| p[i]).collect() };
        let (alice_perm, bob_perm) = if other.swap_parties {
            (
                after(&other.alice_perm, &self.bob_perm),
                after(&other.bob_perm, &self.alice_perm),
            )
        } else {
            (
                after(&other.alice_perm, &self.alice_perm),
                after(&other.bob_perm, &self.bob_perm),
            )
        };
        SymmetryOp {
            alice_perm,
            bob_perm,
            swap_parties: self.swap_parties != other.swap_parties,
            negate: self.negate != other.negate,
        }
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Every group element, `4 (N!)^2` of them, identity first.
pub fn all_ops(n: usize) -> Vec<SymmetryOp> {
    let perms = permutations(n);
    let mut out = Vec::with_capacity(4 * perms.len() * perms.len());
    for negate in [false, true] {
        for swap_parties in [false, true] {
            for a in &perms {
                for b in &perms {
                    out.push(SymmetryOp {
                        alice_perm: a.clone(),
                        bob_perm: b.clone(),
                        swap_parties,
                        negate,
                    });
                }
            }
        }
    }
    out
}

pub fn apply(op: &SymmetryOp, w: &Witness) -> Witness {
    assert_eq!(op.n(), w.n(), "symmetry op and witness disagree on N");
    let coefficients = w.coefficients().gather(&op.source_indices(), op.negate);
    let bound = w.classical_bound().map(|b| {
        if op.negate {
            b - w.coefficients().sum()
        } else {
            b
        }
    });
    Witness::new(w.n(), coefficients, bound).expect("same shape")
}

fn compare(a: &Witness, b: &Witness) -> Ordering {
    let ord = match (a.coefficients(), b.coefficients()) {
        (Coefficients::Integer(x), Coefficients::Integer(y)) => x.cmp(y),
        _ => {
            let x = a.coefficients().to_f64();
            let y = b.coefficients().to_f64();
            x.iter()
                .zip(&y)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        }
    };
    ord.then_with(|| match (a.classical_bound(), b.classical_bound()) {
        (Some(p), Some(q)) => p.total_cmp(&q),
        (p, q) => p.is_some().cmp(&q.is_some()),
    })
}

/// Lexicographic minimum of the orbit, comparing the row-major
/// coefficients first and the bound last.
pub fn canonical_form(w: &Witness) -> Witness {
    canonical_form_with(w, &all_ops(w.n()))
}

/// [`canonical_form`] with a precomputed group.
pub fn canonical_form_with(w: &Witness, ops: &[SymmetryOp]) -> Witness {
    let mut best = w.clone();
    for op in ops {
        let cand = apply(op, w);
        if compare(&cand, &best) == Ordering::Less {
            best = cand;
        }
    }
    best
}

pub fn equivalent(a: &Witness, b: &Witness) -> bool {
    a.n() == b.n() && canonical_form(a) == canonical_form(b)
}

/// Distinct images of `w` under the group.
pub fn orbit(w: &Witness) -> Vec<Witness> {
    let mut out: Vec<Witness> = all_ops(w.n()).iter().map(|op| apply(op, w)).collect();
    out.sort_by(compare);
    out.dedup();
    out
}

/// Precomputed index tables for fast canonicity tests on small integer
/// coefficient arrays, used by the scan.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    n: usize,
    sources: Vec<Vec<u8>>,
    negate: Vec<bool>,
}

impl OrbitTable {
    pub fn new(n: usize) -> Self {
        let ops = all_ops(n);
        Self {
            n,
            sources: ops
                .iter()
                .map(|op| op.source_indices().into_iter().map(|i| i as u8).collect())
                .collect(),
            negate: ops.iter().map(|op| op.negate).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// True iff no group element maps `w` to a lexicographically smaller
    /// coefficient array.
    pub fn is_minimal(&self, w: &[i8]) -> bool {
        for (src, &neg) in self.sources.iter().zip(&self.negate) {
            for (k, &s) in src.iter().enumerate() {
                let v = if neg { -w[s as usize] } else { w[s as usize] };
                match v.cmp(&w[k]) {
                    Ordering::Less => return false,
                    Ordering::Greater => break,
                    Ordering::Equal => {}
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_leaves_witness_unchanged() {
        let w = Witness::integer_rows(&[&[1, -2], &[0, 3]], Some(4)).unwrap();
        assert_eq!(apply(&SymmetryOp::identity(2), &w), w);
    }

    #[test]
    fn negation_on_interval() {
        let w = Witness::integer(1, vec![1], Some(1)).unwrap();
        let op = SymmetryOp {
            negate: true,
            ..SymmetryOp::identity(1)
        };
        assert_eq!(
            apply(&op, &w),
            Witness::integer(1, vec![-1], Some(0)).unwrap()
        );
    }

    #[test]
    fn group_order() {
        assert_eq!(all_ops(3).len(), 144);
        assert_eq!(all_ops(4).len(), 2304);
    }

    #[test]
    fn canonical_form_is_idempotent() {
        let w = Witness::integer_rows(&[&[-1, -1, 0], &[-1, 1, 1], &[1, -1, 1]], Some(2)).unwrap();
        let c = canonical_form(&w);
        assert_eq!(canonical_form(&c), c);
    }

    #[test]
    fn orbit_table_agrees_with_canonical_form() {
        let table = OrbitTable::new(2);
        for code in 0..81u32 {
            let mut w = [0i8; 4];
            let mut c = code;
            for k in (0..4).rev() {
                w[k] = (c % 3) as i8 - 1;
                c /= 3;
            }
            let wit = Witness::integer(2, w.iter().map(|&x| x as i64).collect(), None).unwrap();
            let minimal = canonical_form(&wit).coefficients() == wit.coefficients();
            assert_eq!(table.is_minimal(&w), minimal, "{w:?}");
        }
    }
}
