//! Exhaustive scan of witnesses with coefficients in {-1, 0, 1}.
//!
//! Candidates are numbered `0..3^(N^2)` by reading the row-major
//! coefficients as base-3 digits (digit `d` stands for `d - 1`), most
//! significant first, so index order is lexicographic order. Only orbit
//! minima under the symmetry group are tested, which makes every emitted
//! witness its own canonical form.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exact::IntegerBasis;
use super::{classical_max_int, StrategyVertex};
use crate::error::{Error, Result};
use crate::scenario::{Witness, WitnessFile};
use crate::symmetry::{all_ops, canonical_form_with, OrbitTable, SymmetryOp};

pub const CHECKPOINT_VERSION: u32 = 1;

pub fn total_candidates(n: usize) -> u64 {
    3u64.pow((n * n) as u32)
}

pub fn decode(index: u64, n: usize) -> Vec<i8> {
    let cells = n * n;
    let mut out = vec![0i8; cells];
    let mut c = index;
    for k in (0..cells).rev() {
        out[k] = (c % 3) as i8 - 1;
        c /= 3;
    }
    out
}

pub fn encode(coeffs: &[i8]) -> u64 {
    coeffs.iter().fold(0u64, |acc, &c| acc * 3 + (c + 1) as u64)
}

/// A facet-defining candidate found by the scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanHit {
    pub index: u64,
    pub witness: Witness,
    pub tight_vertices: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct HitRecord {
    index: u64,
    tight_vertices: usize,
    witness: WitnessFile,
}

impl ScanHit {
    fn to_record(&self) -> HitRecord {
        HitRecord {
            index: self.index,
            tight_vertices: self.tight_vertices,
            witness: self.witness.to_json(),
        }
    }

    fn from_record(r: &HitRecord) -> Result<Self> {
        Ok(Self {
            index: r.index,
            tight_vertices: r.tight_vertices,
            witness: Witness::from_file(&r.witness)?,
        })
    }
}

/// Shared per-scan data.
pub struct ScanContext {
    n: usize,
    vertices: Vec<StrategyVertex>,
    points: Vec<Vec<i64>>,
    orbit: OrbitTable,
    ops: Vec<SymmetryOp>,
}

impl ScanContext {
    pub fn new(vertices: Vec<StrategyVertex>) -> Result<Self> {
        let n = vertices
            .first()
            .map(StrategyVertex::n)
            .ok_or_else(|| Error::validation("vertex list is empty"))?;
        Ok(Self {
            n,
            points: vertices.iter().map(StrategyVertex::entries).collect(),
            vertices,
            orbit: OrbitTable::new(n),
            ops: all_ops(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Facet test for one integer coefficient array, returning the bound
    /// and tight-vertex count when facet-defining.
    pub fn facet_bound(&self, coeffs: &[i64]) -> Result<Option<(i64, usize)>> {
        let target = self.n * self.n - 1;
        let bound = classical_max_int(coeffs, &self.vertices);
        let tight: Vec<usize> = self
            .vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.dot_int(coeffs) == bound)
            .map(|(k, _)| k)
            .collect();
        if tight.len() < target + 1 {
            return Ok(None);
        }
        let base = &self.points[tight[0]];
        let mut basis = IntegerBasis::new();
        for &k in &tight[1..] {
            let diff: Vec<i64> = self.points[k]
                .iter()
                .zip(base)
                .map(|(a, b)| a - b)
                .collect();
            basis.insert(&diff)?;
            if basis.rank() == target {
                return Ok(Some((bound, tight.len())));
            }
        }
        Ok(None)
    }

    /// Evaluates candidate `index`; `None` if it is not an orbit minimum or
    /// not facet-defining.
    pub fn evaluate(&self, index: u64) -> Result<Option<ScanHit>> {
        let w = decode(index, self.n);
        if w.iter().all(|&c| c == 0) || !self.orbit.is_minimal(&w) {
            return Ok(None);
        }
        let coeffs: Vec<i64> = w.iter().map(|&c| c as i64).collect();
        Ok(self.facet_bound(&coeffs)?.map(|(bound, tight)| {
            let witness = Witness::integer(self.n, coeffs, Some(bound)).expect("shape");
            ScanHit {
                index,
                witness: canonical_form_with(&witness, &self.ops),
                tight_vertices: tight,
            }
        }))
    }

    /// Tests a single witness outside the enumeration order.
    pub fn submit(&self, w: &Witness) -> Result<Option<ScanHit>> {
        let coeffs = w
            .integer_coefficients()
            .ok_or_else(|| Error::validation("scan accepts integer witnesses only"))?;
        if w.n() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "expected N = {}, got {}",
                self.n,
                w.n()
            )));
        }
        if coeffs.iter().all(|&c| c == 0) {
            return Ok(None);
        }
        Ok(self.facet_bound(coeffs)?.map(|(bound, tight)| {
            let witness = Witness::integer(self.n, coeffs.to_vec(), Some(bound)).expect("shape");
            let canon = canonical_form_with(&witness, &self.ops);
            let index = canon
                .integer_coefficients()
                .filter(|c| c.iter().all(|x| (-1..=1).contains(x)))
                .map(|c| encode(&c.iter().map(|&x| x as i8).collect::<Vec<_>>()))
                .unwrap_or(u64::MAX);
            ScanHit {
                index,
                witness: canon,
                tight_vertices: tight,
            }
        }))
    }

    /// Scans `[start, end)` and returns hits in index order.
    pub fn scan_range(&self, start: u64, end: u64) -> Result<Vec<ScanHit>> {
        const CHUNK: u64 = 4096;
        let chunks: Vec<(u64, u64)> = (start..end)
            .step_by(CHUNK as usize)
            .map(|s| (s, (s + CHUNK).min(end)))
            .collect();
        let per_chunk: Vec<Vec<ScanHit>> = chunks
            .par_iter()
            .map(|&(s, e)| {
                let mut hits = Vec::new();
                for i in s..e {
                    if let Some(h) = self.evaluate(i)? {
                        hits.push(h);
                    }
                }
                Ok(hits)
            })
            .collect::<Result<_>>()?;
        Ok(per_chunk.into_iter().flatten().collect())
    }
}

/// Persistent state of a (possibly interrupted) shard.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanState {
    pub n: usize,
    pub start: u64,
    pub end: u64,
    pub next: u64,
    pub hits: Vec<ScanHit>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    version: u32,
    n: usize,
    start: u64,
    end: u64,
    next: u64,
    hits: Vec<HitRecord>,
}

impl ScanState {
    pub fn new(n: usize, start: u64, end: u64) -> Self {
        Self {
            n,
            start,
            end,
            next: start,
            hits: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.next >= self.end
    }

    pub fn to_json_string(&self) -> String {
        let file = CheckpointFile {
            version: CHECKPOINT_VERSION,
            n: self.n,
            start: self.start,
            end: self.end,
            next: self.next,
            hits: self.hits.iter().map(ScanHit::to_record).collect(),
        };
        serde_json::to_string_pretty(&file).expect("checkpoint serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: CheckpointFile = serde_json::from_str(s)?;
        if file.version != CHECKPOINT_VERSION {
            return Err(Error::validation(format!(
                "checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})",
                file.version
            )));
        }
        Ok(Self {
            n: file.n,
            start: file.start,
            end: file.end,
            next: file.next,
            hits: file
                .hits
                .iter()
                .map(ScanHit::from_record)
                .collect::<Result<_>>()?,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.to_json_string())?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }
}

/// Shard description for [`run_shard`].
#[derive(Debug, Clone)]
pub struct ShardConfig {
    pub start: u64,
    pub end: u64,
    /// Candidates processed between checkpoints.
    pub batch: u64,
    pub checkpoint: Option<PathBuf>,
    /// Stop after this many batches (for interruption tests); `None` runs
    /// to completion.
    pub max_batches: Option<usize>,
}

/// Runs a shard, resuming from the checkpoint file when it exists and
/// rewriting it after every batch.
pub fn run_shard(ctx: &ScanContext, cfg: &ShardConfig) -> Result<ScanState> {
    let total = total_candidates(ctx.n());
    let end = cfg.end.min(total);
    let mut state = match &cfg.checkpoint {
        Some(p) if p.exists() => {
            let s = ScanState::load(p)?;
            if s.n != ctx.n() || s.start != cfg.start || s.end != end {
                return Err(Error::validation(format!(
                    "checkpoint {} describes shard N={} [{}, {}), not N={} [{}, {})",
                    p.display(),
                    s.n,
                    s.start,
                    s.end,
                    ctx.n(),
                    cfg.start,
                    end
                )));
            }
            s
        }
        _ => ScanState::new(ctx.n(), cfg.start, end),
    };
    let batch = cfg.batch.max(1);
    let mut done = 0usize;
    while !state.is_complete() {
        if cfg.max_batches.is_some_and(|m| done >= m) {
            break;
        }
        let stop = (state.next + batch).min(state.end);
        let hits = ctx.scan_range(state.next, stop)?;
        state.hits.extend(hits);
        state.next = stop;
        done += 1;
        log::info!(
            "scan progress: {}/{} ({} hits)",
            state.next - state.start,
            state.end - state.start,
            state.hits.len()
        );
        if let Some(p) = &cfg.checkpoint {
            state.save(p)?;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode() {
        for i in [0u64, 1, 17, 43_046_720] {
            assert_eq!(encode(&decode(i, 4)), i);
        }
        assert_eq!(decode(0, 2), vec![-1, -1, -1, -1]);
        assert_eq!(total_candidates(4), 43_046_721);
    }
}
