//! Complex linear algebra for one- and two-qubit operators.
//!
//! Two-qubit operators use the row-major pairing `i = i1 * d2 + i2`, and the
//! partial transpose always acts on the second factor.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute tolerance for Hermiticity of externally supplied matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Spectral slack allowed for POVM elements.
pub const POVM_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A complex Hermitian matrix of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: DMatrix<C64>,
}

impl HermitianOperator {
    /// Validates Hermiticity entrywise within [`HERMITIAN_TOL`].
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let d = mat.nrows();
        for i in 0..d {
            for j in 0..d {
                if (mat[(i, j)] - mat[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::validation(format!(
                        "matrix is not Hermitian at entry ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self::hermitize(mat))
    }

    /// Symmetrizes `(A + A^H) / 2` without validation.
    pub(crate) fn hermitize(mat: DMatrix<C64>) -> Self {
        let adj = mat.adjoint();
        Self {
            mat: (mat + adj).scale(0.5),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::ShapeMismatch(
                "rows must form a square matrix".into(),
            ));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        Self {
            mat: DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    C64::new(values[i], 0.0)
                } else {
                    ZERO
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// `Re tr(self * other)`, the Hilbert-Schmidt inner product.
    pub fn inner(&self, other: &HermitianOperator) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (self.mat[(i, j)] * other.mat[(j, i)]).re;
            }
        }
        acc
    }

    pub fn add(&self, other: &HermitianOperator) -> HermitianOperator {
        Self {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &HermitianOperator) -> HermitianOperator {
        Self {
            mat: &self.mat - &other.mat,
        }
    }

    pub fn scale(&self, factor: f64) -> HermitianOperator {
        Self {
            mat: self.mat.scale(factor),
        }
    }

    /// Adds `factor * other` in place.
    pub fn add_scaled(&mut self, factor: f64, other: &HermitianOperator) {
        self.mat += other.mat.scale(factor);
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn eigh(&self) -> (Vec<f64>, DMatrix<C64>) {
        let eig = SymmetricEigen::new(self.mat.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            eig.eigenvectors[(i, order[j])]
        });
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("non-empty operator")
    }

    /// Reassembles `sum_k f(lambda_k) |v_k><v_k|`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let (values, vectors) = self.eigh();
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for (k, &lam) in values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            let v = vectors.column(k);
            out += (v * v.adjoint()).scale(w);
        }
        Self::hermitize(out)
    }

    /// Checks positivity and unit trace within `tol`.
    pub fn is_density(&self, tol: f64) -> bool {
        (self.trace() - 1.0).abs() <= tol && self.min_eigenvalue() >= -tol
    }

    /// Real and imaginary parts as nested rows, used for JSON export.
    pub fn to_parts(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let d = self.dim();
        let re = (0..d)
            .map(|i| (0..d).map(|j| self.mat[(i, j)].re).collect())
            .collect();
        let im = (0..d)
            .map(|i| (0..d).map(|j| self.mat[(i, j)].im).collect())
            .collect();
        (re, im)
    }
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: DVector<C64>,
}

impl PureState {
    pub fn new(amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!(
                "state has norm {norm}, expected 1"
            )));
        }
        Ok(Self { amps })
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalized(amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::validation("cannot normalize a zero vector"));
        }
        Ok(Self {
            amps: amps.unscale(norm),
        })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::normalized(DVector::from_iterator(
            amps.len(),
            amps.iter().map(|&a| C64::new(a, 0.0)),
        ))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = DVector::zeros(dim);
        amps[index] = ONE;
        Self { amps }
    }

    /// Haar-random state from complex Gaussian amplitudes.
    pub fn haar_random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        loop {
            let amps = DVector::from_fn(dim, |_, _| {
                C64::new(
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                )
            });
            if let Ok(s) = Self::normalized(amps) {
                return s;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator::hermitize(&self.amps * self.amps.adjoint())
    }

    /// `<self|op|self>`, real part.
    pub fn expectation(&self, op: &HermitianOperator) -> f64 {
        (self.amps.adjoint() * op.matrix() * &self.amps)[(0, 0)].re
    }

    pub fn overlap(&self, other: &PureState) -> f64 {
        self.amps.dotc(&other.amps).norm_sqr()
    }

    pub fn kron(&self, other: &PureState) -> PureState {
        PureState {
            amps: self.amps.kronecker(&other.amps),
        }
    }
}

/// A two-qubit POVM element `0 <= M <= I`.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    op: HermitianOperator,
}

impl PovmElement {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        if op.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: op.dim(),
            });
        }
        let ev = op.eigenvalues();
        if ev[0] < -POVM_TOL || ev[3] > 1.0 + POVM_TOL {
            return Err(Error::validation(format!(
                "POVM element spectrum [{:.3e}, {:.3e}] leaves [0, 1]",
                ev[0], ev[3]
            )));
        }
        Ok(Self { op })
    }

    pub(crate) fn new_unchecked(op: HermitianOperator) -> Self {
        Self { op }
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_operator(self) -> HermitianOperator {
        self.op
    }
}

fn require_dim(op: &HermitianOperator, dim: usize) -> Result<()> {
    if op.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: op.dim(),
        });
    }
    Ok(())
}

/// `A (x) B` with `(i1, i2) -> i1 * d2 + i2`.
pub fn tensor_product(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator {
        mat: a.mat.kronecker(&b.mat),
    }
}

/// Transposes the second tensor factor of a 2x2 system.
pub fn partial_transpose(m: &HermitianOperator) -> Result<HermitianOperator> {
    require_dim(m, 4)?;
    Ok(HermitianOperator {
        mat: DMatrix::from_fn(4, 4, |i, j| {
            let (i1, i2) = (i / 2, i % 2);
            let (j1, j2) = (j / 2, j % 2);
            m.mat[(i1 * 2 + j2, j1 * 2 + i2)]
        }),
    })
}

/// Traces out the second qubit.
pub fn partial_trace_second(m: &HermitianOperator) -> Result<HermitianOperator> {
    require_dim(m, 4)?;
    Ok(HermitianOperator {
        mat: DMatrix::from_fn(2, 2, |i, j| {
            m.mat[(i * 2, j * 2)] + m.mat[(i * 2 + 1, j * 2 + 1)]
        }),
    })
}

/// Traces out the first qubit.
pub fn partial_trace_first(m: &HermitianOperator) -> Result<HermitianOperator> {
    require_dim(m, 4)?;
    Ok(HermitianOperator {
        mat: DMatrix::from_fn(2, 2, |i, j| m.mat[(i, j)] + m.mat[(2 + i, 2 + j)]),
    })
}

/// Conjugates by the SWAP gate, exchanging the two qubits.
pub fn swap_qubits(m: &HermitianOperator) -> Result<HermitianOperator> {
    require_dim(m, 4)?;
    let sw = |i: usize| (i % 2) * 2 + i / 2;
    Ok(HermitianOperator {
        mat: DMatrix::from_fn(4, 4, |i, j| m.mat[(sw(i), sw(j))]),
    })
}

/// Largest eigenvalue and a unit eigenvector for it.
pub fn max_eigenpair(h: &HermitianOperator) -> (f64, PureState) {
    let (values, vectors) = h.eigh();
    let k = values.len() - 1;
    let v = vectors.column(k).into_owned();
    let state = PureState::normalized(v).expect("eigenvectors are nonzero");
    (values[k], state)
}

/// Eigenvalues of the partial transpose, ascending.
pub fn pt_eigenvalues(m: &HermitianOperator) -> Result<Vec<f64>> {
    Ok(partial_transpose(m)?.eigenvalues())
}

/// Sum of the magnitudes of the negative eigenvalues of `PT(M)`.
pub fn negativity(m: &HermitianOperator) -> Result<f64> {
    Ok(pt_eigenvalues(m)?
        .iter()
        .filter(|&&l| l < 0.0)
        .fold(0.0, |acc, l| acc - l))
}

/// `|Psi+> = (|00> + |11>) / sqrt 2`.
pub fn psi_plus() -> PureState {
    PureState::from_real(&[1.0, 0.0, 0.0, 1.0]).expect("nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> HermitianOperator {
        let m = DMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        HermitianOperator::hermitize(m)
    }

    #[test]
    fn identity_tensor_identity() {
        let i4 = tensor_product(
            &HermitianOperator::identity(2),
            &HermitianOperator::identity(2),
        );
        assert_eq!(i4, HermitianOperator::identity(4));
    }

    #[test]
    fn basis_tensor_product() {
        let p0 = PureState::basis(2, 0).projector();
        let p1 = PureState::basis(2, 1).projector();
        assert_eq!(
            tensor_product(&p0, &p1),
            HermitianOperator::diagonal(&[0.0, 1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn tensor_product_index_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = random_hermitian(&mut rng, 2);
            let b = random_hermitian(&mut rng, 2);
            let ab = tensor_product(&a, &b);
            for i1 in 0..2 {
                for i2 in 0..2 {
                    for j1 in 0..2 {
                        for j2 in 0..2 {
                            let expect = a.entry(i1, j1) * b.entry(i2, j2);
                            assert_eq!(ab.entry(i1 * 2 + i2, j1 * 2 + j2), expect);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn partial_transpose_examples() {
        let d = HermitianOperator::diagonal(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(partial_transpose(&d).unwrap(), d);
        let bell = psi_plus().projector();
        let ev = pt_eigenvalues(&bell).unwrap();
        assert!((ev[0] + 0.5).abs() < 1e-12);
        assert!((negativity(&bell).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            partial_transpose(&HermitianOperator::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let bell = psi_plus().projector();
        let reduced = partial_trace_second(&bell).unwrap();
        let half = HermitianOperator::identity(2).scale(0.5);
        assert!((&reduced.mat - &half.mat).norm() < 1e-15);
        let full = partial_trace_second(&HermitianOperator::identity(4)).unwrap();
        assert_eq!(full, HermitianOperator::identity(2).scale(2.0));

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 2);
        let ab = tensor_product(&a, &b);
        let expect = a.scale(b.trace());
        assert!((&partial_trace_second(&ab).unwrap().mat - &expect.mat).norm() < 1e-12);
        let expect = b.scale(a.trace());
        assert!((&partial_trace_first(&ab).unwrap().mat - &expect.mat).norm() < 1e-12);
    }

    #[test]
    fn max_eigenpair_diagonal() {
        let (v, s) = max_eigenpair(&HermitianOperator::diagonal(&[0.3, 0.9]));
        assert!((v - 0.9).abs() < 1e-15);
        assert!((s.overlap(&PureState::basis(2, 1)) - 1.0).abs() < 1e-12);
        let (v, s) = max_eigenpair(&HermitianOperator::identity(2));
        assert!((v - 1.0).abs() < 1e-15);
        assert!((s.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn max_eigenpair_rayleigh_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 4] {
            let h = random_hermitian(&mut rng, d);
            let (lam, v) = max_eigenpair(&h);
            let residual = (h.matrix() * v.amplitudes() - v.amplitudes().scale(lam)).norm();
            assert!(residual <= 1e-9);
            for _ in 0..1000 {
                let u = PureState::haar_random(&mut rng, d);
                assert!(lam >= u.expectation(&h) - 1e-12);
            }
        }
    }

    #[test]
    fn povm_validation() {
        assert!(PovmElement::new(HermitianOperator::identity(4)).is_ok());
        assert!(PovmElement::new(HermitianOperator::identity(4).scale(1.1)).is_err());
        assert!(PovmElement::new(HermitianOperator::identity(2)).is_err());
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = ONE;
        assert!(HermitianOperator::new(m).is_err());
    }

    #[test]
    fn swap_exchanges_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 2);
        let swapped = swap_qubits(&tensor_product(&a, &b)).unwrap();
        assert!((&swapped.mat - &tensor_product(&b, &a).mat).norm() < 1e-14);
    }
}
