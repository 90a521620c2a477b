//! The classical polytope of the N22 scenario.
//!
//! Vertices are the tables produced by deterministic strategies: Alice and
//! Bob each forward one bit chosen by their input, and Charlie applies a
//! fixed Boolean function to the two bits.

pub(crate) mod dd;
pub(crate) mod exact;
pub(crate) mod lp;
pub mod scan;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{ProbabilityTable, Scenario, Witness};
use lp::{q_float, q_int, q_to_f64, LpOutcome, Q};

/// A deterministic classical strategy and the 0/1 table it induces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyVertex {
    pub alice_map: Vec<u8>,
    pub bob_map: Vec<u8>,
    pub charlie_map: [[u8; 2]; 2],
    n: usize,
    bits: u64,
}

impl StrategyVertex {
    fn from_maps(alice_map: Vec<u8>, bob_map: Vec<u8>, charlie_map: [[u8; 2]; 2]) -> Self {
        let n = alice_map.len();
        let mut bits = 0u64;
        for x in 0..n {
            for y in 0..n {
                if charlie_map[alice_map[x] as usize][bob_map[y] as usize] == 0 {
                    bits |= 1 << (x * n + y);
                }
            }
        }
        Self {
            alice_map,
            bob_map,
            charlie_map,
            n,
            bits,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Bit `x * N + y` is set iff `P(0|x,y) = 1`.
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn entry(&self, x: usize, y: usize) -> u8 {
        (self.bits >> (x * self.n + y) & 1) as u8
    }

    pub fn entries(&self) -> Vec<i64> {
        (0..self.n * self.n)
            .map(|k| (self.bits >> k & 1) as i64)
            .collect()
    }

    pub fn table(&self) -> ProbabilityTable {
        ProbabilityTable::new(
            self.n,
            self.entries().into_iter().map(|v| v as f64).collect(),
        )
        .expect("0/1 entries are valid probabilities")
    }

    /// `W.P` for integer coefficients.
    pub fn dot_int(&self, w: &[i64]) -> i64 {
        let mut acc = 0;
        let mut b = self.bits;
        while b != 0 {
            let k = b.trailing_zeros() as usize;
            acc += w[k];
            b &= b - 1;
        }
        acc
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        let mut acc = 0.0;
        let mut b = self.bits;
        while b != 0 {
            let k = b.trailing_zeros() as usize;
            acc += w[k];
            b &= b - 1;
        }
        acc
    }
}

/// Lists the extremal deterministic tables, sorted by their bit pattern.
pub fn enumerate_vertices(s: &Scenario) -> Result<Vec<StrategyVertex>> {
    let n = s.n_inputs;
    if s.dim != 2 || s.n_outcomes != 2 || n > 6 {
        return Err(Error::UnsupportedScenario(format!(
            "vertex enumeration supports D = 2, K = 2, N <= 6 (got N = {n})"
        )));
    }
    let mut seen = BTreeMap::new();
    for a in 0u32..(1 << n) {
        let alice: Vec<u8> = (0..n).map(|x| (a >> x & 1) as u8).collect();
        for b in 0u32..(1 << n) {
            let bob: Vec<u8> = (0..n).map(|y| (b >> y & 1) as u8).collect();
            for c in 0u8..16 {
                let charlie = [[c & 1, c >> 1 & 1], [c >> 2 & 1, c >> 3 & 1]];
                let v = StrategyVertex::from_maps(alice.clone(), bob.clone(), charlie);
                seen.entry(v.bits).or_insert(v);
            }
        }
    }
    let candidates: Vec<StrategyVertex> = seen.into_values().collect();
    let points: Vec<Vec<i64>> = candidates.iter().map(StrategyVertex::entries).collect();
    let mut out = Vec::with_capacity(candidates.len());
    for (k, v) in candidates.iter().enumerate() {
        if is_extreme(k, &points)? {
            out.push(v.clone());
        }
    }
    Ok(out)
}

/// Decides whether `points[k]` lies outside the hull of the others.
///
/// For a 0/1 point the hyperplane `(2p - 1).q <= |p| - 1` strictly separates
/// it from every other 0/1 point; this is a dual certificate for the
/// extremality LP and is checked exactly. Other points go through the LP.
fn is_extreme(k: usize, points: &[Vec<i64>]) -> Result<bool> {
    let p = &points[k];
    if p.iter().all(|&x| x == 0 || x == 1) {
        let w: Vec<i64> = p.iter().map(|&x| 2 * x - 1).collect();
        let ones: i64 = p.iter().sum();
        let separated = points
            .iter()
            .enumerate()
            .all(|(j, q)| j == k || w.iter().zip(q).map(|(a, b)| a * b).sum::<i64>() < ones);
        if separated {
            return Ok(true);
        }
    }
    let others: Vec<Vec<i64>> = points
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, q)| q.clone())
        .collect();
    let target: Vec<Q> = p.iter().map(|&x| q_int(x)).collect();
    Ok(!matches!(
        hull_lp(&others, &target, None),
        LpOutcome::Optimal { .. }
    ))
}

/// Builds and solves `sum_j l_j v_j = target, sum_j l_j = 1, l >= 0`.
fn hull_lp(points: &[Vec<i64>], target: &[Q], objective: Option<&[Q]>) -> LpOutcome {
    let d = target.len();
    let mut a: Vec<Vec<Q>> = (0..d)
        .map(|i| points.iter().map(|v| q_int(v[i])).collect())
        .collect();
    a.push(vec![Q::one(); points.len()]);
    let mut b = target.to_vec();
    b.push(Q::one());
    lp::solve(&a, &b, objective)
}

fn check_shape(n: usize, vertices: &[StrategyVertex]) -> Result<()> {
    if let Some(v) = vertices.first() {
        if v.n != n {
            return Err(Error::ShapeMismatch(format!(
                "witness has N = {n} but vertices have N = {}",
                v.n
            )));
        }
    }
    Ok(())
}

/// Maximum of `W.P` over integer-coefficient vertices, exactly.
pub fn classical_max_int(coeffs: &[i64], vertices: &[StrategyVertex]) -> i64 {
    vertices
        .iter()
        .map(|v| v.dot_int(coeffs))
        .max()
        .unwrap_or(0)
}

/// Maximum of `W.P` over the vertices. Exact for integer witnesses.
pub fn classical_max(w: &Witness, vertices: &[StrategyVertex]) -> Result<f64> {
    check_shape(w.n(), vertices)?;
    if vertices.is_empty() {
        return Err(Error::validation("vertex list is empty"));
    }
    Ok(match w.integer_coefficients() {
        Some(c) => classical_max_int(c, vertices) as f64,
        None => {
            let c = w.coefficients().to_f64();
            vertices
                .iter()
                .map(|v| v.dot(&c))
                .fold(f64::NEG_INFINITY, f64::max)
        }
    })
}

/// `W` with its bound replaced by the classical maximum.
pub fn with_classical_bound(w: Witness, vertices: &[StrategyVertex]) -> Result<Witness> {
    let b = classical_max(&w, vertices)?;
    Ok(w.with_bound(Some(b)))
}

/// Maximizes `W.P` over the hull by linear programming, exactly.
pub fn lp_max(w: &[i64], vertices: &[StrategyVertex]) -> Result<f64> {
    let points: Vec<Vec<i64>> = vertices.iter().map(StrategyVertex::entries).collect();
    // Free variable P is eliminated: P = sum_j l_j v_j, so W.P = sum_j l_j (W.v_j).
    let obj: Vec<Q> = points
        .iter()
        .map(|v| q_int(v.iter().zip(w).map(|(a, b)| a * b).sum()))
        .collect();
    let a = vec![vec![Q::one(); points.len()]];
    match lp::solve(&a, &[Q::one()], Some(&obj)) {
        LpOutcome::Optimal { value, .. } => Ok(q_to_f64(&value)),
        _ => Err(Error::validation("hull LP is infeasible or unbounded")),
    }
}

/// A facet inequality and the vertices lying on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub witness: Witness,
    pub tight_vertices: Vec<usize>,
}

impl Facet {
    pub fn is_positivity(&self) -> bool {
        let Some(c) = self.witness.integer_coefficients() else {
            return false;
        };
        self.witness.classical_bound() == Some(0.0)
            && c.iter().filter(|&&x| x != 0).count() == 1
            && c.contains(&-1)
    }
}

/// Result of a facet test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetCheck {
    pub is_facet: bool,
    pub valid: bool,
    pub tight_vertices: usize,
    pub affine_rank: usize,
}

const REAL_TIGHT_TOL: f64 = 1e-9;

/// Valid and tight on an affinely `N^2 - 1`-dimensional vertex set.
pub fn is_facet(w: &Witness, vertices: &[StrategyVertex]) -> Result<FacetCheck> {
    check_shape(w.n(), vertices)?;
    let bound = w
        .classical_bound()
        .ok_or_else(|| Error::validation("facet test needs a classical bound"))?;
    let target = w.n() * w.n() - 1;
    let (valid, tight): (bool, Vec<&StrategyVertex>) = match w.integer_coefficients() {
        Some(c) if bound.fract() == 0.0 => {
            let b = bound as i64;
            let vals: Vec<i64> = vertices.iter().map(|v| v.dot_int(c)).collect();
            (
                vals.iter().all(|&x| x <= b),
                vertices
                    .iter()
                    .zip(&vals)
                    .filter(|(_, &x)| x == b)
                    .map(|(v, _)| v)
                    .collect(),
            )
        }
        _ => {
            let c = w.coefficients().to_f64();
            let vals: Vec<f64> = vertices.iter().map(|v| v.dot(&c)).collect();
            (
                vals.iter().all(|&x| x <= bound + REAL_TIGHT_TOL),
                vertices
                    .iter()
                    .zip(&vals)
                    .filter(|(_, &x)| (x - bound).abs() <= REAL_TIGHT_TOL)
                    .map(|(v, _)| v)
                    .collect(),
            )
        }
    };
    let points: Vec<Vec<i64>> = tight.iter().map(|v| v.entries()).collect();
    let affine_rank = exact::affine_rank(&points);
    Ok(FacetCheck {
        is_facet: valid && affine_rank == target,
        valid,
        tight_vertices: tight.len(),
        affine_rank,
    })
}

/// Complete H-representation of the hull of the given vertices.
///
/// Intended for N <= 3; larger scenarios are refused.
pub fn enumerate_facets(vertices: &[StrategyVertex]) -> Result<Vec<Facet>> {
    let Some(first) = vertices.first() else {
        return Err(Error::validation("vertex list is empty"));
    };
    let n = first.n;
    if n >= 4 {
        return Err(Error::UnsupportedScenario(format!(
            "exact facet enumeration for N = {n} ({} vertices in dimension {}) is out of reach; \
             use the integer-coefficient scan instead",
            vertices.len(),
            n * n
        )));
    }
    let points: Vec<Vec<i64>> = vertices.iter().map(StrategyVertex::entries).collect();
    let raw = dd::facets(&points)?;
    raw.into_iter()
        .map(|(w, b)| {
            let tight_vertices = vertices
                .iter()
                .enumerate()
                .filter(|(_, v)| v.dot_int(&w) == b)
                .map(|(k, _)| k)
                .collect();
            Ok(Facet {
                witness: Witness::integer(n, w, Some(b))?,
                tight_vertices,
            })
        })
        .collect()
}

/// A symmetry class of facets.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetClass {
    /// Canonical representative.
    pub witness: Witness,
    pub members: usize,
    pub tight_vertices: usize,
}

/// Facets grouped into symmetry classes.
///
/// `trivial` counts the facets that are not positivity constraints
/// themselves but map onto one under outcome relabeling (`P_xy <= 1`);
/// `classes` holds only the remaining, nontrivial classes.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetSummary {
    pub total: usize,
    pub positivity: usize,
    pub trivial: usize,
    pub classes: Vec<FacetClass>,
}

pub fn classify_facets(facets: &[Facet]) -> FacetSummary {
    let Some(first) = facets.first() else {
        return FacetSummary {
            total: 0,
            positivity: 0,
            trivial: 0,
            classes: Vec::new(),
        };
    };
    let ops = crate::symmetry::all_ops(first.witness.n());
    let mut positivity = 0;
    let mut trivial = 0;
    let mut classes: Vec<FacetClass> = Vec::new();
    let mut index: BTreeMap<(Vec<i64>, i64), usize> = BTreeMap::new();
    for f in facets {
        if f.is_positivity() {
            positivity += 1;
            continue;
        }
        let canon = crate::symmetry::canonical_form_with(&f.witness, &ops);
        let as_facet = Facet {
            witness: canon.clone(),
            tight_vertices: Vec::new(),
        };
        if as_facet.is_positivity() {
            trivial += 1;
            continue;
        }
        let key = (
            canon
                .integer_coefficients()
                .expect("integer facet")
                .to_vec(),
            canon.classical_bound().expect("bounded") as i64,
        );
        match index.get(&key) {
            Some(&k) => classes[k].members += 1,
            None => {
                index.insert(key, classes.len());
                classes.push(FacetClass {
                    witness: canon,
                    members: 1,
                    tight_vertices: f.tight_vertices.len(),
                });
            }
        }
    }
    classes.sort_by(|a, b| {
        a.witness
            .integer_coefficients()
            .cmp(&b.witness.integer_coefficients())
    });
    FacetSummary {
        total: facets.len(),
        positivity,
        trivial,
        classes,
    }
}

/// Outcome of the membership test.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    /// Convex weights on vertex indices; `exact` holds them as reduced
    /// fractions `"p/q"`.
    Inside {
        weights: Vec<(usize, f64)>,
        exact: Vec<(usize, String)>,
    },
    /// An integer inequality valid on every vertex and violated by the table.
    Outside { separator: Witness, value: f64 },
}

impl Membership {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Membership::Inside { .. })
    }
}

/// Decides `P in conv(vertices)` by exact linear programming.
pub fn membership(p: &ProbabilityTable, vertices: &[StrategyVertex]) -> Result<Membership> {
    check_shape(p.n(), vertices)?;
    let points: Vec<Vec<i64>> = vertices.iter().map(StrategyVertex::entries).collect();
    let target: Vec<Q> = p.entries().iter().map(|&x| q_float(x)).collect();
    match hull_lp(&points, &target, None) {
        LpOutcome::Optimal { x, .. } => {
            let mut weights = Vec::new();
            let mut exact_weights = Vec::new();
            for (k, l) in x.iter().enumerate() {
                if !l.is_zero() {
                    weights.push((k, q_to_f64(l)));
                    exact_weights.push((k, format!("{}/{}", l.numer(), l.denom())));
                }
            }
            Ok(Membership::Inside {
                weights,
                exact: exact_weights,
            })
        }
        LpOutcome::Infeasible { y } => {
            // y.(v, 1) <= 0 on vertices and y.(P, 1) > 0; W = y[..d] scaled
            // to integers separates.
            let d = p.n() * p.n();
            let lcm = y[..d].iter().fold(BigInt::one(), |l, q| l.lcm(q.denom()));
            let g = y[..d]
                .iter()
                .map(|q| q.numer() * (&lcm / q.denom()))
                .fold(BigInt::zero(), |g, v| g.gcd(&v));
            let g = if g.is_zero() { BigInt::one() } else { g };
            let w: Vec<i64> = y[..d]
                .iter()
                .map(|q| {
                    (q.numer() * (&lcm / q.denom()) / &g)
                        .to_i64()
                        .ok_or(Error::Overflow)
                })
                .collect::<Result<_>>()?;
            let bound = classical_max_int(&w, vertices);
            let value: Q = w.iter().zip(&target).map(|(&a, t)| q_int(a) * t).sum();
            if value <= q_int(bound) {
                return Err(Error::validation(
                    "separating hyperplane failed exact verification",
                ));
            }
            Ok(Membership::Outside {
                separator: Witness::integer(p.n(), w, Some(bound))?,
                value: q_to_f64(&value),
            })
        }
        LpOutcome::Unbounded => unreachable!("feasibility LP has no objective"),
    }
}
