//! `max tr(M F)` over two-qubit operators with `0 <= M <= I` and
//! `0 <= PT(M) <= I`, i.e. over POVM elements whose element and complement
//! are both separable.
//!
//! The solver is a log-barrier interior-point method over the 16 real
//! coordinates of `M` in an orthonormal Hermitian basis. The barrier
//! Hessian has closed-form entries in the elementary-matrix basis,
//! `tr(S E_rc S E_r'c') = S[c'][r] * S[c][r']`, so a Newton step is a few
//! thousand flops.
//!
//! Any Hermitian `K` gives the upper bound
//! `tr_+(F - PT(K)) + tr_+(K) >= max tr(M F)`; the solver evaluates it at
//! the multipliers of the final central point and reports the gap.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qcore::{partial_transpose, HermitianOperator, PovmElement};

type M4 = [[C64; 4]; 4];

const ZERO: C64 = C64::new(0.0, 0.0);
const N_COORDS: usize = 16;
const BARRIER_WEIGHT: f64 = 16.0;

/// One instance of the separable-POVM subproblem.
#[derive(Debug, Clone)]
pub struct PptProblem {
    pub objective: HermitianOperator,
    /// Target duality gap, absolute.
    pub tolerance: f64,
    /// Budget of Newton steps across all barrier stages.
    pub max_iterations: usize,
}

impl PptProblem {
    pub fn new(objective: HermitianOperator) -> Self {
        Self {
            objective,
            tolerance: 1e-8,
            max_iterations: 500,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub m: PovmElement,
    pub value: f64,
    /// Certified upper bound minus `value`.
    pub duality_gap_or_residual: f64,
    pub iterations: usize,
}

/// One entry `coeff * E_{row,col}` of a basis matrix.
#[derive(Debug, Clone, Copy)]
struct Entry {
    row: usize,
    col: usize,
    coeff: C64,
}

struct Basis {
    direct: Vec<Vec<Entry>>,
    transposed: Vec<Vec<Entry>>,
}

fn pt_index(row: usize, col: usize) -> (usize, usize) {
    let (r1, r2) = (row / 2, row % 2);
    let (c1, c2) = (col / 2, col % 2);
    (r1 * 2 + c2, c1 * 2 + r2)
}

impl Basis {
    fn new() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut direct = Vec::with_capacity(N_COORDS);
        for k in 0..4 {
            direct.push(vec![Entry {
                row: k,
                col: k,
                coeff: C64::new(1.0, 0.0),
            }]);
        }
        for a in 0..4 {
            for b in a + 1..4 {
                direct.push(vec![
                    Entry {
                        row: a,
                        col: b,
                        coeff: C64::new(s, 0.0),
                    },
                    Entry {
                        row: b,
                        col: a,
                        coeff: C64::new(s, 0.0),
                    },
                ]);
                direct.push(vec![
                    Entry {
                        row: a,
                        col: b,
                        coeff: C64::new(0.0, s),
                    },
                    Entry {
                        row: b,
                        col: a,
                        coeff: C64::new(0.0, -s),
                    },
                ]);
            }
        }
        let transposed = direct
            .iter()
            .map(|es| {
                es.iter()
                    .map(|e| {
                        let (row, col) = pt_index(e.row, e.col);
                        Entry {
                            row,
                            col,
                            coeff: e.coeff,
                        }
                    })
                    .collect()
            })
            .collect();
        Self { direct, transposed }
    }

    fn coords(&self, m: &M4) -> [f64; N_COORDS] {
        let mut x = [0.0; N_COORDS];
        for (i, es) in self.direct.iter().enumerate() {
            // <B_i, M> = sum conj(coeff) * M[row][col]
            x[i] = es
                .iter()
                .map(|e| (e.coeff.conj() * m[e.row][e.col]).re)
                .sum();
        }
        x
    }

    fn assemble(&self, x: &[f64; N_COORDS]) -> M4 {
        let mut m = [[ZERO; 4]; 4];
        for (xi, es) in x.iter().zip(&self.direct) {
            for e in es {
                m[e.row][e.col] += e.coeff * *xi;
            }
        }
        m
    }
}

fn to_m4(op: &HermitianOperator) -> M4 {
    let mut m = [[ZERO; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = op.entry(i, j);
        }
    }
    m
}

fn from_m4(m: &M4) -> HermitianOperator {
    HermitianOperator::hermitize(DMatrix::from_fn(4, 4, |i, j| m[i][j]))
}

fn pt4(m: &M4) -> M4 {
    let mut out = [[ZERO; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (r, c) = pt_index(i, j);
            *v = m[r][c];
        }
    }
    out
}

/// Lower Cholesky factor of a Hermitian matrix, or `None` if not positive
/// definite.
fn cholesky(a: &M4) -> Option<M4> {
    let mut l = [[ZERO; 4]; 4];
    for j in 0..4 {
        let mut d = a[j][j].re;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        l[j][j] = C64::new(d, 0.0);
        for i in j + 1..4 {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / d;
        }
    }
    Some(l)
}

fn log_det(l: &M4) -> f64 {
    2.0 * (0..4).map(|i| l[i][i].re.ln()).sum::<f64>()
}

/// `A^{-1}` from its Cholesky factor.
fn chol_inverse(l: &M4) -> M4 {
    // Invert the lower-triangular factor, then form L^{-H} L^{-1}.
    let mut li = [[ZERO; 4]; 4];
    for j in 0..4 {
        li[j][j] = C64::new(1.0 / l[j][j].re, 0.0);
        for i in j + 1..4 {
            let mut s = ZERO;
            for k in j..i {
                s -= l[i][k] * li[k][j];
            }
            li[i][j] = s / l[i][i].re;
        }
    }
    let mut inv = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let mut s = ZERO;
            for k in i..4 {
                s += li[k][i].conj() * li[k][j];
            }
            inv[i][j] = s;
            inv[j][i] = s.conj();
        }
    }
    inv
}

#[derive(Clone, Copy)]
struct Lmi {
    offset: f64,
    sign: f64,
    transposed: bool,
}

const LMIS: [Lmi; 4] = [
    Lmi {
        offset: 0.0,
        sign: 1.0,
        transposed: false,
    },
    Lmi {
        offset: 1.0,
        sign: -1.0,
        transposed: false,
    },
    Lmi {
        offset: 0.0,
        sign: 1.0,
        transposed: true,
    },
    Lmi {
        offset: 1.0,
        sign: -1.0,
        transposed: true,
    },
];

fn lmi_matrix(lmi: Lmi, m: &M4, mt: &M4) -> M4 {
    let src = if lmi.transposed { mt } else { m };
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = src[i][j] * lmi.sign;
        }
        out[i][i] += lmi.offset;
    }
    out
}

/// Cholesky factors of all four constraint matrices at `x`.
fn factor_all(basis: &Basis, x: &[f64; N_COORDS]) -> Option<[M4; 4]> {
    let m = basis.assemble(x);
    let mt = pt4(&m);
    let mut out = [[[ZERO; 4]; 4]; 4];
    for (k, lmi) in LMIS.iter().enumerate() {
        out[k] = cholesky(&lmi_matrix(*lmi, &m, &mt))?;
    }
    Some(out)
}

fn barrier(factors: &[M4; 4]) -> f64 {
    -factors.iter().map(log_det).sum::<f64>()
}

/// Gradient and Hessian of the barrier from the constraint inverses.
fn derivatives(
    basis: &Basis,
    inverses: &[M4; 4],
) -> ([f64; N_COORDS], [[f64; N_COORDS]; N_COORDS]) {
    let mut g = [0.0; N_COORDS];
    let mut h = [[0.0; N_COORDS]; N_COORDS];
    for (lmi, s) in LMIS.iter().zip(inverses) {
        let elems = if lmi.transposed {
            &basis.transposed
        } else {
            &basis.direct
        };
        for (i, ei) in elems.iter().enumerate() {
            let tr: f64 = ei.iter().map(|e| (e.coeff * s[e.col][e.row]).re).sum();
            g[i] -= lmi.sign * tr;
            for (j, ej) in elems.iter().enumerate().take(i + 1) {
                let mut acc = 0.0;
                for a in ei {
                    for b in ej {
                        acc += (a.coeff * b.coeff * s[b.col][a.row] * s[a.col][b.row]).re;
                    }
                }
                h[i][j] += acc;
            }
        }
    }
    for i in 0..N_COORDS {
        for j in 0..i {
            h[j][i] = h[i][j];
        }
    }
    (g, h)
}

/// Solves `H d = r` for symmetric positive definite `H`, with a small
/// diagonal shift if rounding breaks definiteness.
fn spd_solve(h: &[[f64; N_COORDS]; N_COORDS], r: &[f64; N_COORDS]) -> Option<[f64; N_COORDS]> {
    let scale = (0..N_COORDS).map(|i| h[i][i]).fold(0.0, f64::max);
    for shift in [0.0, 1e-14, 1e-12, 1e-10] {
        let mut l = [[0.0; N_COORDS]; N_COORDS];
        let mut ok = true;
        'outer: for j in 0..N_COORDS {
            let mut d = h[j][j] + shift * scale;
            for k in 0..j {
                d -= l[j][k] * l[j][k];
            }
            if !(d > 0.0) {
                ok = false;
                break 'outer;
            }
            let d = d.sqrt();
            l[j][j] = d;
            for i in j + 1..N_COORDS {
                let mut s = h[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / d;
            }
        }
        if !ok {
            continue;
        }
        let mut y = [0.0; N_COORDS];
        for i in 0..N_COORDS {
            let mut s = r[i];
            for k in 0..i {
                s -= l[i][k] * y[k];
            }
            y[i] = s / l[i][i];
        }
        let mut x = [0.0; N_COORDS];
        for i in (0..N_COORDS).rev() {
            let mut s = y[i];
            for k in i + 1..N_COORDS {
                s -= l[k][i] * x[k];
            }
            x[i] = s / l[i][i];
        }
        return Some(x);
    }
    None
}

fn eigenvalues4(m: &M4) -> [f64; 4] {
    let mat = Matrix4::from_fn(|i, j| m[i][j]);
    let eig = SymmetricEigen::new(mat);
    let mut ev = [
        eig.eigenvalues[0],
        eig.eigenvalues[1],
        eig.eigenvalues[2],
        eig.eigenvalues[3],
    ];
    ev.sort_by(f64::total_cmp);
    ev
}

fn positive_trace(m: &M4) -> f64 {
    eigenvalues4(m).iter().filter(|&&l| l > 0.0).sum()
}

/// `tr_+(F - PT(K)) + tr_+(K)`, an upper bound on the PPT optimum for any
/// Hermitian `K`.
pub fn dual_bound(f: &HermitianOperator, k: &HermitianOperator) -> Result<f64> {
    let ptk = partial_transpose(k)?;
    let shifted = to_m4(&f.sub(&ptk));
    Ok(positive_trace(&shifted) + positive_trace(&to_m4(k)))
}

fn inner4(a: &M4, b: &M4) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += (a[i][j] * b[j][i]).re;
        }
    }
    acc
}

/// Maximizes `tr(M F)` subject to `0 <= M <= I` and `0 <= PT(M) <= I`.
pub fn solve_ppt(problem: &PptProblem) -> Result<SdpSolution> {
    let f_op = &problem.objective;
    if f_op.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: f_op.dim(),
        });
    }
    if !(problem.tolerance > 0.0) {
        return Err(Error::validation("tolerance must be positive"));
    }
    let basis = Basis::new();
    let f = to_m4(f_op);
    let norm = f.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let half = {
        let mut m = [[ZERO; 4]; 4];
        (0..4).for_each(|i| m[i][i] = C64::new(0.5, 0.0));
        m
    };
    if norm == 0.0 {
        return Ok(SdpSolution {
            m: PovmElement::new_unchecked(from_m4(&half)),
            value: 0.0,
            duality_gap_or_residual: 0.0,
            iterations: 0,
        });
    }
    let c0 = f[0][0].re;
    let scalar =
        (0..4).all(|i| (0..4).all(|j| f[i][j] == if i == j { C64::new(c0, 0.0) } else { ZERO }));
    if scalar {
        let (m, value) = if c0 > 0.0 {
            (HermitianOperator::identity(4), 4.0 * c0)
        } else {
            (HermitianOperator::zeros(4), 0.0)
        };
        return Ok(SdpSolution {
            m: PovmElement::new_unchecked(m),
            value,
            duality_gap_or_residual: 0.0,
            iterations: 0,
        });
    }
    let mut fn_ = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            fn_[i][j] = f[i][j] / norm;
        }
    }
    let c = basis.coords(&fn_);
    let mut x = basis.coords(&half);
    let mut t = 1.0;
    let mu = 16.0;
    let mut iterations = 0;
    let mut factors = factor_all(&basis, &x).expect("I/2 is strictly feasible");

    loop {
        // Centering.
        for _ in 0..60 {
            let inverses = [
                chol_inverse(&factors[0]),
                chol_inverse(&factors[1]),
                chol_inverse(&factors[2]),
                chol_inverse(&factors[3]),
            ];
            let (gb, h) = derivatives(&basis, &inverses);
            let mut grad = [0.0; N_COORDS];
            let mut neg = [0.0; N_COORDS];
            for i in 0..N_COORDS {
                grad[i] = -t * c[i] + gb[i];
                neg[i] = -grad[i];
            }
            let Some(dx) = spd_solve(&h, &neg) else {
                break;
            };
            let decrement: f64 = -grad.iter().zip(&dx).map(|(a, b)| a * b).sum::<f64>();
            iterations += 1;
            if decrement / 2.0 <= 1e-11 {
                break;
            }
            let phi0 = -t * c.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + barrier(&factors);
            let mut step = 1.0;
            let mut moved = false;
            while step > 1e-14 {
                let mut trial = x;
                for i in 0..N_COORDS {
                    trial[i] += step * dx[i];
                }
                if let Some(tf) = factor_all(&basis, &trial) {
                    let phi =
                        -t * c.iter().zip(&trial).map(|(a, b)| a * b).sum::<f64>() + barrier(&tf);
                    if phi <= phi0 - 0.25 * step * decrement {
                        x = trial;
                        factors = tf;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
            if iterations >= problem.max_iterations {
                break;
            }
        }
        let gap = BARRIER_WEIGHT / t * norm;
        if gap <= problem.tolerance * 0.5 {
            break;
        }
        if iterations >= problem.max_iterations {
            let m = basis.assemble(&x);
            return Err(Error::NonConvergence {
                iterations,
                residual: gap,
                best: Box::new(from_m4(&m)),
            });
        }
        t *= mu;
    }

    let m = basis.assemble(&x);
    let value = inner4(&m, &f);
    // Multipliers of the PT constraints give K = (S4 - S3) * norm / t.
    let s3 = chol_inverse(&factors[2]);
    let s4 = chol_inverse(&factors[3]);
    let mut k = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            k[i][j] = (s4[i][j] - s3[i][j]) * (norm / t);
        }
    }
    let upper = dual_bound(f_op, &from_m4(&k))?;
    Ok(SdpSolution {
        m: PovmElement::new_unchecked(from_m4(&m)),
        value,
        duality_gap_or_residual: (upper - value).max(0.0),
        iterations,
    })
}

/// Projector onto the eigenvectors of `F` with eigenvalue `>= -1e-12`,
/// the optimum of `max tr(M F)` over `0 <= M <= I`.
pub fn solve_unconstrained_entangled(f: &HermitianOperator) -> Result<(PovmElement, f64)> {
    if f.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: f.dim(),
        });
    }
    let (values, _) = f.eigh();
    let m = f.spectral_map(|l| if l >= -1e-12 { 1.0 } else { 0.0 });
    let value = values.iter().filter(|&&l| l > 0.0).sum();
    Ok((PovmElement::new_unchecked(m), value))
}

/// Largest violation of the four spectral constraints (0 if feasible).
pub fn constraint_violation(m: &HermitianOperator) -> Result<f64> {
    let ev = m.eigenvalues();
    let pt = partial_transpose(m)?.eigenvalues();
    Ok([-ev[0], ev[3] - 1.0, -pt[0], pt[3] - 1.0]
        .into_iter()
        .fold(0.0, f64::max))
}
