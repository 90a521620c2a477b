//! Reference witnesses with their known values, shipped as data files.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scenario::{ProbabilityTable, Witness};

const TABLE1: &str = include_str!("../data/table1.json");
const TABLE2: &str = include_str!("../data/table2.json");

/// One reference witness and the values recorded for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRow {
    pub case: usize,
    pub w_c: i64,
    pub w_unent: f64,
    pub w_ent: f64,
    pub vertices: usize,
    /// Negative eigenvalue of the partially transposed optimal `M`, where
    /// recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    pub coefficients: Vec<Vec<i64>>,
}

impl CatalogRow {
    pub fn witness(&self) -> Witness {
        let rows: Vec<&[i64]> = self.coefficients.iter().map(Vec::as_slice).collect();
        Witness::integer_rows(&rows, Some(self.w_c)).expect("catalog rows are square")
    }
}

#[derive(Debug, Deserialize)]
struct CatalogFile {
    n: usize,
    rows: Vec<CatalogRow>,
}

fn parse(src: &str) -> Vec<CatalogRow> {
    let file: CatalogFile = serde_json::from_str(src).expect("bundled catalog is valid JSON");
    debug_assert!(file.rows.iter().all(|r| r.coefficients.len() == file.n));
    file.rows
}

/// The thirteen facet classes of the three-input polytope, excluding
/// positivity.
pub fn table1() -> Vec<CatalogRow> {
    parse(TABLE1)
}

/// Ten four-input facets on which entangled measurements beat
/// unentangled ones.
pub fn table2() -> Vec<CatalogRow> {
    parse(TABLE2)
}

/// `-P11 - P12 + P13 + P21 + P23 + P31 - P32 - P33 <= 2`, the only
/// three-input facet separating entangled from unentangled measurements.
pub fn wit322() -> Witness {
    Witness::integer_rows(&[&[-1, -1, 1], &[1, 0, 1], &[1, -1, -1]], Some(2)).expect("3x3")
}

/// `(2 + 3 sqrt 6) / 4`, the unentangled optimum of [`wit322`].
pub fn wit322_unentangled_value() -> f64 {
    (2.0 + 3.0 * 6f64.sqrt()) / 4.0
}

/// Zeros on the diagonal and `1/4` elsewhere: reachable with a Bell-state
/// projector but not with any separable measurement.
pub fn bell_example_table() -> Result<ProbabilityTable> {
    ProbabilityTable::from_rows(&[
        vec![0.0, 0.25, 0.25],
        vec![0.25, 0.0, 0.25],
        vec![0.25, 0.25, 0.0],
    ])
}

/// Statistics of the entangled optimum of [`wit322`].
pub fn wit322_entangled_table() -> Result<ProbabilityTable> {
    ProbabilityTable::from_rows(&[
        vec![0.125, 0.25, 0.875],
        vec![0.75, 0.5, 0.75],
        vec![0.875, 0.25, 0.125],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(table1().len(), 13);
        assert_eq!(table2().len(), 10);
        assert!(table2().iter().all(|r| r.lambda1.is_some()));
        assert_eq!(table1()[3].witness().n(), 3);
    }

    #[test]
    fn entangled_table_reaches_two_and_a_half() {
        let p = wit322_entangled_table().unwrap();
        let v = crate::scenario::witness_value(&wit322(), &p).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
    }
}
