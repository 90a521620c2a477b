#![allow(dead_code)]

use entcert::qcore::{partial_transpose, HermitianOperator, C64};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> HermitianOperator {
    let a = DMatrix::from_fn(d, d, |_, _| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    HermitianOperator::new(&a + a.adjoint()).unwrap()
}

fn clip(m: &HermitianOperator) -> HermitianOperator {
    m.spectral_map(|l| l.clamp(0.0, 1.0))
}

fn clip_pt(m: &HermitianOperator) -> HermitianOperator {
    partial_transpose(&clip(&partial_transpose(m).unwrap())).unwrap()
}

fn violation(m: &HermitianOperator) -> f64 {
    let pt = partial_transpose(m).unwrap();
    let (a, b) = (m.eigenvalues(), pt.eigenvalues());
    [-a[0], a[3] - 1.0, -b[0], b[3] - 1.0]
        .into_iter()
        .fold(0.0, f64::max)
}

/// PPT optimum by ADMM splitting between `{0 <= M <= I}` and
/// `{0 <= PT(M) <= I}`, then pulled toward `I/2` until exactly feasible.
/// Returns the feasible point and its value, a lower bound on the optimum.
pub fn admm_ppt(f: &HermitianOperator, iterations: usize) -> (HermitianOperator, f64) {
    let scale = f.inner(f).sqrt().max(1e-300);
    let g = f.scale(1.0 / scale);
    let mut y = HermitianOperator::identity(4).scale(0.5);
    let mut u = HermitianOperator::zeros(4);
    for _ in 0..iterations {
        let x = clip(&y.sub(&u).add(&g));
        let y_new = clip_pt(&x.add(&u));
        u = u.add(&x).sub(&y_new);
        let primal = x.sub(&y_new);
        let dual = y_new.sub(&y);
        y = y_new;
        if primal.inner(&primal) < 1e-24 && dual.inner(&dual) < 1e-24 {
            break;
        }
    }
    let center = HermitianOperator::identity(4).scale(0.5);
    let delta = violation(&y);
    let t = if delta > 0.0 {
        delta / (0.5 + delta)
    } else {
        0.0
    };
    let m = y.scale(1.0 - t).add(&center.scale(t));
    assert!(violation(&m) <= 1e-12);
    (m.clone(), m.inner(f))
}
