//! The N22 prepare-and-measure scenario: probability tables and linear
//! witnesses over them.
//!
//! Only the outcome-0 probabilities `P(0|x,y)` are stored; the outcome-1
//! table is `1 - P`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::qcore::{tensor_product, HermitianOperator, PovmElement};

pub const MAX_INPUTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_inputs: usize,
    pub dim: usize,
    pub n_outcomes: usize,
}

impl Scenario {
    /// The N22 scenario. With `N <= 2` every table is classically
    /// reachable, so that case is allowed but logged.
    pub fn new(n_inputs: usize) -> Result<Self> {
        Self::with_params(n_inputs, 2, 2)
    }

    pub fn with_params(n_inputs: usize, dim: usize, n_outcomes: usize) -> Result<Self> {
        if dim != 2 || n_outcomes != 2 {
            return Err(Error::UnsupportedScenario(format!(
                "only D = 2, K = 2 is supported (got D = {dim}, K = {n_outcomes})"
            )));
        }
        if n_inputs == 0 {
            return Err(Error::Validation("N must be at least 1".into()));
        }
        if n_inputs > MAX_INPUTS {
            return Err(Error::UnsupportedScenario(format!(
                "N must lie in 1..={MAX_INPUTS}, got {n_inputs}"
            )));
        }
        if n_inputs <= dim {
            log::warn!("N = {n_inputs} <= D = {dim}: every table is classically reachable");
        }
        Ok(Self {
            n_inputs,
            dim,
            n_outcomes,
        })
    }

    pub fn cells(&self) -> usize {
        self.n_inputs * self.n_inputs
    }
}

/// `N x N` table of `P(0|x,y)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    n: usize,
    entries: Vec<f64>,
}

const PROB_TOL: f64 = 1e-12;

impl ProbabilityTable {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for N = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some((k, p)) = entries
            .iter()
            .enumerate()
            .find(|(_, p)| !(**p >= -PROB_TOL && **p <= 1.0 + PROB_TOL))
        {
            return Err(Error::validation(format!(
                "probability {p} at ({}, {}) is outside [0, 1]",
                k / n,
                k % n
            )));
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(
                "probability table must be square".into(),
            ));
        }
        Self::new(n, rows.concat())
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(n, vec![value; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[x * self.n + y]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn to_json(&self) -> TableFile {
        TableFile {
            n: self.n,
            entries: self.rows(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(s)?;
        if file.entries.len() != file.n {
            return Err(Error::ShapeMismatch(format!(
                "declared n = {} but found {} rows",
                file.n,
                file.entries.len()
            )));
        }
        Self::from_rows(&file.entries)
    }
}

/// On-disk form of a probability table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableFile {
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
}

/// Witness coefficients, kept exact when every entry is an integer.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Integer(Vec<i64>),
    Real(Vec<f64>),
}

impl Coefficients {
    pub fn len(&self) -> usize {
        match self {
            Coefficients::Integer(v) => v.len(),
            Coefficients::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, k: usize) -> f64 {
        match self {
            Coefficients::Integer(v) => v[k] as f64,
            Coefficients::Real(v) => v[k],
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.get(k)).collect()
    }

    pub fn sum(&self) -> f64 {
        match self {
            Coefficients::Integer(v) => v.iter().sum::<i64>() as f64,
            Coefficients::Real(v) => v.iter().sum(),
        }
    }

    /// Reorders entries so that `out[k] = self[source[k]]`, optionally negated.
    pub(crate) fn gather(&self, source: &[usize], negate: bool) -> Coefficients {
        match self {
            Coefficients::Integer(v) => Coefficients::Integer(
                source
                    .iter()
                    .map(|&s| if negate { -v[s] } else { v[s] })
                    .collect(),
            ),
            Coefficients::Real(v) => Coefficients::Real(
                source
                    .iter()
                    .map(|&s| if negate { -v[s] } else { v[s] })
                    .collect(),
            ),
        }
    }
}

/// A linear functional `sum W_xy P_xy` with its classical maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    n: usize,
    coefficients: Coefficients,
    classical_bound: Option<f64>,
}

impl Witness {
    pub fn new(n: usize, coefficients: Coefficients, classical_bound: Option<f64>) -> Result<Self> {
        if coefficients.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients for N = {n}, got {}",
                n * n,
                coefficients.len()
            )));
        }
        if let Coefficients::Real(v) = &coefficients {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::validation("witness coefficients must be finite"));
            }
        }
        Ok(Self {
            n,
            coefficients,
            classical_bound,
        })
    }

    pub fn integer(n: usize, coefficients: Vec<i64>, classical_bound: Option<i64>) -> Result<Self> {
        Self::new(
            n,
            Coefficients::Integer(coefficients),
            classical_bound.map(|b| b as f64),
        )
    }

    pub fn integer_rows(rows: &[&[i64]], classical_bound: Option<i64>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("witness must be square".into()));
        }
        Self::integer(n, rows.concat(), classical_bound)
    }

    pub fn real(n: usize, coefficients: Vec<f64>, classical_bound: Option<f64>) -> Result<Self> {
        Self::new(n, Coefficients::Real(coefficients), classical_bound)
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            coefficients: Coefficients::Integer(vec![0; n * n]),
            classical_bound: Some(0.0),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    pub fn coefficient(&self, x: usize, y: usize) -> f64 {
        self.coefficients.get(x * self.n + y)
    }

    pub fn integer_coefficients(&self) -> Option<&[i64]> {
        match &self.coefficients {
            Coefficients::Integer(v) => Some(v),
            Coefficients::Real(_) => None,
        }
    }

    pub fn classical_bound(&self) -> Option<f64> {
        self.classical_bound
    }

    pub fn with_bound(mut self, bound: Option<f64>) -> Self {
        self.classical_bound = bound;
        self
    }

    pub fn is_zero(&self) -> bool {
        (0..self.coefficients.len()).all(|k| self.coefficients.get(k) == 0.0)
    }

    /// Embeds into a larger scenario with zero coefficients on new inputs.
    /// The classical bound is unchanged.
    pub fn zero_padded(&self, n: usize) -> Result<Self> {
        if n < self.n {
            return Err(Error::ShapeMismatch(format!(
                "cannot pad N = {} down to {n}",
                self.n
            )));
        }
        let coefficients = match &self.coefficients {
            Coefficients::Integer(v) => {
                let mut out = vec![0; n * n];
                for x in 0..self.n {
                    for y in 0..self.n {
                        out[x * n + y] = v[x * self.n + y];
                    }
                }
                Coefficients::Integer(out)
            }
            Coefficients::Real(v) => {
                let mut out = vec![0.0; n * n];
                for x in 0..self.n {
                    for y in 0..self.n {
                        out[x * n + y] = v[x * self.n + y];
                    }
                }
                Coefficients::Real(out)
            }
        };
        Self::new(n, coefficients, self.classical_bound)
    }

    pub fn to_json(&self) -> WitnessFile {
        let n = self.n;
        let rows = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| match &self.coefficients {
                        Coefficients::Integer(v) => Value::from(v[x * n + y]),
                        Coefficients::Real(v) => Value::from(v[x * n + y]),
                    })
                    .collect()
            })
            .collect();
        let bound = self.classical_bound.map(|b| {
            if self.integer_coefficients().is_some() && b.fract() == 0.0 && b.abs() < 9.0e15 {
                Value::from(b as i64)
            } else {
                Value::from(b)
            }
        });
        WitnessFile {
            n,
            coefficients: rows,
            classical_bound: bound.unwrap_or(Value::Null),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("witness serializes")
    }

    pub fn from_file(file: &WitnessFile) -> Result<Self> {
        let n = file.n;
        if file.coefficients.len() != n || file.coefficients.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(format!(
                "coefficients must be {n}x{n}"
            )));
        }
        let flat: Vec<&Value> = file.coefficients.iter().flatten().collect();
        let coefficients = if flat.iter().all(|v| v.is_i64()) {
            Coefficients::Integer(flat.iter().map(|v| v.as_i64().expect("checked")).collect())
        } else {
            Coefficients::Real(
                flat.iter()
                    .map(|v| {
                        v.as_f64()
                            .ok_or_else(|| Error::validation("coefficient is not a number"))
                    })
                    .collect::<Result<_>>()?,
            )
        };
        let classical_bound = match &file.classical_bound {
            Value::Null => None,
            v => Some(
                v.as_f64()
                    .ok_or_else(|| Error::validation("classical_bound is not a number"))?,
            ),
        };
        Self::new(n, coefficients, classical_bound)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(s)?)
    }
}

/// On-disk form of a witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub n: usize,
    pub coefficients: Vec<Vec<Value>>,
    #[serde(default)]
    pub classical_bound: Value,
}

/// `P(0|x,y) = tr(rho_x (x) sigma_y M)`.
pub fn evaluate_probabilities(
    rho: &[HermitianOperator],
    sigma: &[HermitianOperator],
    m: &PovmElement,
) -> Result<ProbabilityTable> {
    let n = rho.len();
    if sigma.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} preparations for Alice but {} for Bob",
            n,
            sigma.len()
        )));
    }
    for (side, states) in [("rho", rho), ("sigma", sigma)] {
        for (k, s) in states.iter().enumerate() {
            if s.dim() != 2 || !s.is_density(1e-9) {
                return Err(Error::validation(format!(
                    "{side}[{k}] is not a qubit density matrix"
                )));
            }
        }
    }
    let mut entries = Vec::with_capacity(n * n);
    for r in rho {
        for s in sigma {
            let prod = tensor_product(r, s);
            let p = prod.inner(m.operator());
            // POVM elements carry 1e-9 spectral slack; absorb it here.
            let p = if (-1e-9..=1.0 + 1e-9).contains(&p) {
                p.clamp(0.0, 1.0)
            } else {
                p
            };
            entries.push(p);
        }
    }
    ProbabilityTable::new(n, entries)
}

/// `sum_xy W_xy P_xy`.
pub fn witness_value(w: &Witness, p: &ProbabilityTable) -> Result<f64> {
    if w.n() != p.n() {
        return Err(Error::ShapeMismatch(format!(
            "witness has N = {} but table has N = {}",
            w.n(),
            p.n()
        )));
    }
    Ok(p.entries()
        .iter()
        .enumerate()
        .map(|(k, &v)| w.coefficients().get(k) * v)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_bounds() {
        assert!(Scenario::new(0).is_err());
        assert!(Scenario::new(7).is_err());
        assert!(Scenario::with_params(3, 3, 2).is_err());
        assert_eq!(Scenario::new(3).unwrap().cells(), 9);
        assert!(Scenario::new(2).is_ok());
    }

    #[test]
    fn table_range_checked() {
        assert!(ProbabilityTable::new(1, vec![1.5]).is_err());
        assert!(ProbabilityTable::new(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn zero_witness_value() {
        let p = ProbabilityTable::constant(3, 0.3).unwrap();
        assert_eq!(witness_value(&Witness::zero(3), &p).unwrap(), 0.0);
        assert!(witness_value(&Witness::zero(2), &p).is_err());
    }

    #[test]
    fn integer_witness_round_trip_is_exact() {
        let text = r#"{"n":2,"coefficients":[[1,-2],[0,3]],"classical_bound":4}"#;
        let w = Witness::from_json_str(text).unwrap();
        assert!(w.integer_coefficients().is_some());
        assert_eq!(w.to_json_string(), text);
        let text = r#"{"n":1,"coefficients":[[0.5]],"classical_bound":null}"#;
        let w = Witness::from_json_str(text).unwrap();
        assert!(w.integer_coefficients().is_none());
        assert_eq!(w.to_json_string(), text);
    }

    #[test]
    fn rejects_non_density_inputs() {
        let rho = vec![HermitianOperator::identity(2)];
        let sigma = vec![HermitianOperator::identity(2).scale(0.5)];
        let m = PovmElement::new(HermitianOperator::identity(4)).unwrap();
        let err = evaluate_probabilities(&rho, &sigma, &m).unwrap_err();
        assert!(err.to_string().contains("rho[0]"));
    }
}
