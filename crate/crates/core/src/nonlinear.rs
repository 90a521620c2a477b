//! A nonlinear witness for three preparations per side.
//!
//! If `M` is separable and the preparations are qubit states, then for all
//! `k, l`
//!
//! ```text
//! 4 (P11 + P22 + P33) / (1 - R)^2 - P_kl >= 0
//! ```
//!
//! where `R` bounds the pairwise overlaps of the preparations and is itself
//! computed from the table through [`fidelity_bound`]. A negative value
//! certifies that the measurement is entangled.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{tensor_product, HermitianOperator, PovmElement, PureState};
use crate::scenario::ProbabilityTable;

/// `R` values at or above this are treated as 1 (vacuous bound).
pub const R_DEGENERATE: f64 = 1.0 - 1e-12;

fn check_unit(p: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::validation(format!("{name} = {p} is outside [0, 1]")));
    }
    Ok(())
}

/// `sqrt(p1 p2) + sqrt((1 - p1)(1 - p2))`: the largest root fidelity two
/// states can have when some effect accepts them with probabilities `p1`
/// and `p2`.
pub fn fidelity_bound(p1: f64, p2: f64) -> Result<f64> {
    check_unit(p1, "p1")?;
    check_unit(p2, "p2")?;
    Ok(((p1 * p2).sqrt() + ((1.0 - p1) * (1.0 - p2)).sqrt()).min(1.0))
}

fn require_three(p: &ProbabilityTable) -> Result<()> {
    if p.n() != 3 {
        return Err(Error::UnsupportedScenario(format!(
            "the nonlinear witness needs N = 3, got N = {}",
            p.n()
        )));
    }
    Ok(())
}

/// Largest overlap bound over pairs of preparations on either side.
pub fn overlap_bound_r(p: &ProbabilityTable) -> Result<f64> {
    require_three(p)?;
    let mut r: f64 = 0.0;
    for j in 0..3 {
        for k in 0..3 {
            if j == k {
                continue;
            }
            let mut alice = f64::INFINITY;
            let mut bob = f64::INFINITY;
            for l in 0..3 {
                alice = alice.min(fidelity_bound(p.get(j, l), p.get(k, l))?);
                bob = bob.min(fidelity_bound(p.get(l, j), p.get(l, k))?);
            }
            r = r.max(alice).max(bob);
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearReport {
    pub r_value: f64,
    /// `[k][l]` holds `4 (P11 + P22 + P33) / (1 - R)^2 - P_kl`; empty when
    /// the report is inconclusive.
    pub witness_values: Vec<Vec<f64>>,
    pub min_value: f64,
    pub certified_entangled: bool,
    pub reason: String,
}

pub fn evaluate_nonlinear_witness(p: &ProbabilityTable) -> Result<NonlinearReport> {
    let r = overlap_bound_r(p)?;
    if r >= R_DEGENERATE {
        return Ok(NonlinearReport {
            r_value: r,
            witness_values: Vec::new(),
            min_value: f64::INFINITY,
            certified_entangled: false,
            reason: format!("inconclusive: R = {r} leaves the bound vacuous"),
        });
    }
    let diag = p.get(0, 0) + p.get(1, 1) + p.get(2, 2);
    let lead = 4.0 * diag / ((1.0 - r) * (1.0 - r));
    let values: Vec<Vec<f64>> = (0..3)
        .map(|k| (0..3).map(|l| lead - p.get(k, l)).collect())
        .collect();
    let min_value = values
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let certified = min_value < 0.0;
    let reason = if certified {
        format!("violated by {min_value}: no separable measurement reproduces the table")
    } else {
        "satisfied: the table is compatible with a separable measurement".to_string()
    };
    Ok(NonlinearReport {
        r_value: r,
        witness_values: values,
        min_value,
        certified_entangled: certified,
        reason,
    })
}

/// Whether `tr(w1 w2) <= f(tr(A w1), tr(A w2))^2 + 1e-9`.
pub fn check_prop1(
    a: &HermitianOperator,
    omega1: &HermitianOperator,
    omega2: &HermitianOperator,
) -> Result<bool> {
    let d = a.dim();
    if ![2, 4].contains(&d) || omega1.dim() != d || omega2.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if omega1.dim() != d {
                omega1.dim()
            } else {
                omega2.dim()
            },
        });
    }
    let spectrum = a.eigenvalues();
    if spectrum[0] < -1e-9 || spectrum[d - 1] > 1.0 + 1e-9 {
        return Err(Error::validation("A must satisfy 0 <= A <= I"));
    }
    for (name, w) in [("omega1", omega1), ("omega2", omega2)] {
        if !w.is_density(1e-9) {
            return Err(Error::validation(format!(
                "{name} is not a density operator"
            )));
        }
    }
    let p1 = a.inner(omega1).clamp(0.0, 1.0);
    let p2 = a.inner(omega2).clamp(0.0, 1.0);
    let f = fidelity_bound(p1, p2)?;
    Ok(omega1.inner(omega2) <= f * f + 1e-9)
}

/// One rank-one product term `lambda |u><u| (x) |v><v|` together with
/// three preparations per side.
#[derive(Debug, Clone)]
pub struct SeparableTerm {
    pub lambda: f64,
    pub u: PureState,
    pub v: PureState,
}

impl SeparableTerm {
    pub fn new(lambda: f64, u: PureState, v: PureState) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::validation("lambda must be positive"));
        }
        if u.dim() != 2 || v.dim() != 2 {
            return Err(Error::validation("u and v must be qubit states"));
        }
        Ok(Self { lambda, u, v })
    }

    pub fn operator(&self) -> HermitianOperator {
        tensor_product(&self.u.projector(), &self.v.projector()).scale(self.lambda)
    }
}

/// Tightest `C` and `c` for an instance: the largest pairwise overlap on
/// either side and the largest diagonal weight `tr(w rho_j (x) sigma_j)`.
pub fn prop2_constants(
    term: &SeparableTerm,
    rho: &[PureState; 3],
    sigma: &[PureState; 3],
) -> (f64, f64) {
    let mut big_c: f64 = 0.0;
    for j in 0..3 {
        for k in (j + 1)..3 {
            big_c = big_c
                .max(rho[j].overlap(&rho[k]))
                .max(sigma[j].overlap(&sigma[k]));
        }
    }
    let small_c = (0..3)
        .map(|j| term.lambda * term.u.overlap(&rho[j]) * term.v.overlap(&sigma[j]))
        .fold(0.0, f64::max);
    (big_c, small_c)
}

/// Whether `lambda <= 4c / (1 - sqrt(C))^2 + 1e-9` for the tightest `C`
/// and `c` of the instance. Instances with `C >= 1` are rejected.
pub fn check_prop2(
    term: &SeparableTerm,
    rho: &[PureState; 3],
    sigma: &[PureState; 3],
) -> Result<bool> {
    let (big_c, small_c) = prop2_constants(term, rho, sigma);
    if big_c >= 1.0 - 1e-12 {
        return Err(Error::validation(format!(
            "overlap bound C = {big_c} is vacuous"
        )));
    }
    let s = 1.0 - big_c.sqrt();
    Ok(term.lambda <= 4.0 * small_c / (s * s) + 1e-9)
}

/// A random effect `0 <= A <= I` on `C^d`: Haar eigenbasis, uniform
/// eigenvalues.
pub fn random_effect<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator {
    let mut basis: Vec<PureState> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut amps = PureState::haar_random(rng, d).amplitudes().clone();
        for b in &basis {
            let proj = b.amplitudes().dotc(&amps);
            amps -= b.amplitudes() * proj;
        }
        if let Ok(s) = PureState::normalized(amps) {
            basis.push(s);
        }
    }
    let mut a = HermitianOperator::zeros(d);
    for b in &basis {
        a.add_scaled(rng.gen::<f64>(), &b.projector());
    }
    a
}

/// A random mixed state on `C^d`: a convex mixture of `d` Haar states.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator {
    let weights: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let mut rho = HermitianOperator::zeros(d);
    for w in weights {
        rho.add_scaled(w / total, &PureState::haar_random(rng, d).projector());
    }
    rho
}

/// Random qubit preparations and a random separable effect
/// `M = sum_i l_i |u_i><u_i| (x) |v_i><v_i|`, rescaled so that `M <= I`.
pub fn random_separable_experiment<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
) -> (Vec<HermitianOperator>, Vec<HermitianOperator>, PovmElement) {
    let terms = rng.gen_range(1..=4);
    let mut m = HermitianOperator::zeros(4);
    for _ in 0..terms {
        let u = PureState::haar_random(rng, 2).projector();
        let v = PureState::haar_random(rng, 2).projector();
        m.add_scaled(rng.gen::<f64>() + 1e-3, &tensor_product(&u, &v));
    }
    let top = m.max_eigenvalue();
    let m = m.scale(rng.gen_range(0.05..=1.0) / top);
    let rho = (0..n)
        .map(|_| PureState::haar_random(rng, 2).projector())
        .collect();
    let sigma = (0..n)
        .map(|_| PureState::haar_random(rng, 2).projector())
        .collect();
    (
        rho,
        sigma,
        PovmElement::new(m).expect("rescaled into [0, I]"),
    )
}

/// A random instance for [`check_prop2`] whose overlap bound `C` is below
/// one and whose diagonal weight `c` is positive.
pub fn random_prop2_instance<R: Rng + ?Sized>(
    rng: &mut R,
) -> (SeparableTerm, [PureState; 3], [PureState; 3]) {
    loop {
        let term = SeparableTerm::new(
            rng.gen_range(1e-3..4.0),
            PureState::haar_random(rng, 2),
            PureState::haar_random(rng, 2),
        )
        .expect("positive lambda");
        let rho = std::array::from_fn(|_| PureState::haar_random(rng, 2));
        let sigma = std::array::from_fn(|_| PureState::haar_random(rng, 2));
        let (big_c, small_c) = prop2_constants(&term, &rho, &sigma);
        if big_c < 1.0 - 1e-9 && small_c > 0.0 {
            return (term, rho, sigma);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_table() -> ProbabilityTable {
        ProbabilityTable::from_rows(&[
            vec![0.0, 0.25, 0.25],
            vec![0.25, 0.0, 0.25],
            vec![0.25, 0.25, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn fidelity_examples() {
        assert_eq!(fidelity_bound(0.0, 1.0).unwrap(), 0.0);
        assert!((fidelity_bound(0.3, 0.3).unwrap() - 1.0).abs() < 1e-15);
        assert!((fidelity_bound(0.0, 0.25).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(fidelity_bound(-0.1, 0.5).is_err());
    }

    #[test]
    fn example_is_certified() {
        let rep = evaluate_nonlinear_witness(&example_table()).unwrap();
        assert!((rep.r_value - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((rep.min_value + 0.25).abs() < 1e-12);
        assert!(rep.certified_entangled);
    }

    #[test]
    fn flat_table_is_inconclusive() {
        let rep = evaluate_nonlinear_witness(&ProbabilityTable::constant(3, 0.5).unwrap()).unwrap();
        assert!(!rep.certified_entangled);
        assert!(rep.reason.starts_with("inconclusive"));
    }

    #[test]
    fn wrong_size_rejected() {
        assert!(matches!(
            overlap_bound_r(&ProbabilityTable::constant(2, 0.5).unwrap()),
            Err(Error::UnsupportedScenario(_))
        ));
    }

    #[test]
    fn prop1_saturation() {
        let a = PureState::basis(2, 0).projector();
        let state = |p: f64| {
            PureState::from_real(&[p.sqrt(), (1.0 - p).sqrt()])
                .unwrap()
                .projector()
        };
        let (w1, w2) = (state(0.2), state(0.7));
        let f = fidelity_bound(0.2, 0.7).unwrap();
        assert!((w1.inner(&w2) - f * f).abs() < 1e-12);
        assert!(check_prop1(&a, &w1, &w2).unwrap());
    }
}
