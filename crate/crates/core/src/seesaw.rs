//! Alternating maximization of `sum_xy W_xy tr(rho_x (x) sigma_y M)`.
//!
//! Each round maximizes over `M` with the states fixed (an SDP in
//! unentangled mode, a spectral projection in entangled mode), then over
//! Alice's states and then Bob's states, each by a top eigenvector. Every
//! step is an exact conditional maximization, so the objective never
//! decreases; the result is a local optimum and a lower bound on the true
//! maximum.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    max_eigenpair, negativity, pt_eigenvalues, tensor_product, HermitianOperator, PovmElement,
    PureState, C64,
};
use crate::scenario::{evaluate_probabilities, witness_value, ProbabilityTable, Witness};
use crate::sdp::{solve_ppt, solve_unconstrained_entangled, PptProblem};

pub const RESULT_SCHEMA: &str = "entcert.seesaw-result/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// POVM elements whose element and complement are PPT (separable).
    Unentangled,
    /// Any `0 <= M <= I`.
    Entangled,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unentangled" => Ok(Mode::Unentangled),
            "entangled" => Ok(Mode::Entangled),
            other => Err(Error::validation(format!("unknown mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Unentangled => "unentangled",
            Mode::Entangled => "entangled",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeeSawConfig {
    pub restarts: usize,
    pub max_rounds: usize,
    /// Stop once the objective gains less than this over a round.
    pub convergence_epsilon: f64,
    pub seed: u64,
    pub mode: Mode,
    /// Duality-gap target of each SDP solve.
    pub sdp_tolerance: f64,
}

impl SeeSawConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            restarts: 200,
            max_rounds: 500,
            convergence_epsilon: 1e-9,
            seed: 0,
            mode,
            sdp_tolerance: 1e-9,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::validation("restarts must be at least 1"));
        }
        if !(self.convergence_epsilon > 0.0) {
            return Err(Error::validation("convergence_epsilon must be positive"));
        }
        Ok(())
    }
}

/// A distinct converged value seen across restarts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalOptimum {
    pub value: f64,
    pub negativity: f64,
    pub restart: usize,
}

#[derive(Debug, Clone)]
pub struct SeeSawResult {
    pub value: f64,
    pub rho: Vec<PureState>,
    pub sigma: Vec<PureState>,
    pub m: PovmElement,
    /// Objective after each round.
    pub trace: Vec<f64>,
    pub converged: bool,
    pub negativity: f64,
    pub mode: Mode,
    /// Index of the restart that produced this result.
    pub restart: usize,
    /// Distinct local optima, best first (at most ten).
    pub local_optima: Vec<LocalOptimum>,
    /// Restarts dropped after an SDP failure.
    pub abandoned: usize,
}

fn projectors(states: &[PureState]) -> Vec<HermitianOperator> {
    states.iter().map(PureState::projector).collect()
}

/// `F = sum_xy W_xy rho_x (x) sigma_y`.
pub fn build_objective_operator(
    w: &Witness,
    rho: &[HermitianOperator],
    sigma: &[HermitianOperator],
) -> Result<HermitianOperator> {
    let n = w.n();
    if rho.len() != n || sigma.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "witness has N = {n} but got {} and {} states",
            rho.len(),
            sigma.len()
        )));
    }
    let mut f = HermitianOperator::zeros(4);
    for x in 0..n {
        for y in 0..n {
            let c = w.coefficient(x, y);
            if c != 0.0 {
                f.add_scaled(c, &tensor_product(&rho[x], &sigma[y]));
            }
        }
    }
    Ok(f)
}

/// `tr_B((I (x) sigma) M)`.
fn reduce_second(sigma: &HermitianOperator, m: &HermitianOperator) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..2 {
            for l in 0..2 {
                acc += sigma.entry(k, l) * m.entry(i * 2 + l, j * 2 + k);
            }
        }
        acc
    })
}

/// `tr_A((rho (x) I) M)`.
fn reduce_first(rho: &HermitianOperator, m: &HermitianOperator) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |k, l| {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                acc += rho.entry(i, j) * m.entry(j * 2 + k, i * 2 + l);
            }
        }
        acc
    })
}

fn best_states(
    n: usize,
    coeff: impl Fn(usize, usize) -> f64,
    reduced: &[DMatrix<C64>],
) -> (Vec<PureState>, f64) {
    let mut states = Vec::with_capacity(n);
    let mut total = 0.0;
    for a in 0..n {
        let mut g = DMatrix::zeros(2, 2);
        for (b, r) in reduced.iter().enumerate() {
            let c = coeff(a, b);
            if c != 0.0 {
                g += r.scale(c);
            }
        }
        let (lam, v) = max_eigenpair(&HermitianOperator::hermitize(g));
        total += lam;
        states.push(v);
    }
    (states, total)
}

/// Best Alice states for fixed `sigma` and `M`: the top eigenvector of
/// `G_x = tr_B(sum_y W_xy (I (x) sigma_y) M)` for each `x`. Returns the
/// states and the resulting objective.
pub fn update_alice_states(
    w: &Witness,
    sigma: &[HermitianOperator],
    m: &PovmElement,
) -> Result<(Vec<PureState>, f64)> {
    if sigma.len() != w.n() {
        return Err(Error::ShapeMismatch(format!(
            "expected {} Bob states",
            w.n()
        )));
    }
    let reduced: Vec<DMatrix<C64>> = sigma
        .iter()
        .map(|s| reduce_second(s, m.operator()))
        .collect();
    Ok(best_states(w.n(), |x, y| w.coefficient(x, y), &reduced))
}

/// Mirror of [`update_alice_states`] for Bob with `rho` and `M` fixed.
pub fn update_bob_states(
    w: &Witness,
    rho: &[HermitianOperator],
    m: &PovmElement,
) -> Result<(Vec<PureState>, f64)> {
    if rho.len() != w.n() {
        return Err(Error::ShapeMismatch(format!(
            "expected {} Alice states",
            w.n()
        )));
    }
    let reduced: Vec<DMatrix<C64>> = rho.iter().map(|r| reduce_first(r, m.operator())).collect();
    Ok(best_states(w.n(), |y, x| w.coefficient(x, y), &reduced))
}

fn measurement_step(
    mode: Mode,
    f: &HermitianOperator,
    tolerance: f64,
) -> Result<(PovmElement, f64)> {
    match mode {
        Mode::Entangled => solve_unconstrained_entangled(f),
        Mode::Unentangled => {
            let sol = solve_ppt(&PptProblem::new(f.clone()).with_tolerance(tolerance))?;
            Ok((sol.m, sol.value))
        }
    }
}

/// Outcome of one restart.
#[derive(Debug, Clone)]
struct Run {
    value: f64,
    rho: Vec<PureState>,
    sigma: Vec<PureState>,
    m: PovmElement,
    trace: Vec<f64>,
    converged: bool,
}

fn run_restart(w: &Witness, cfg: &SeeSawConfig, restart: usize) -> Result<Run> {
    let n = w.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let mut rho: Vec<PureState> = (0..n)
        .map(|_| PureState::haar_random(&mut rng, 2))
        .collect();
    let mut sigma: Vec<PureState> = (0..n)
        .map(|_| PureState::haar_random(&mut rng, 2))
        .collect();
    let mut m: Option<PovmElement> = None;
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_rounds {
        let rho_ops = projectors(&rho);
        let sigma_ops = projectors(&sigma);
        let f = build_objective_operator(w, &rho_ops, &sigma_ops)?;
        let (mut m_new, mut m_value) = measurement_step(cfg.mode, &f, cfg.sdp_tolerance)?;
        if let Some(prev) = &m {
            let prev_value = prev.operator().inner(&f);
            if prev_value >= m_value {
                m_new = prev.clone();
                m_value = prev_value;
            }
        }
        let (new_rho, _) = update_alice_states(w, &sigma_ops, &m_new)?;
        let rho_ops = projectors(&new_rho);
        let (new_sigma, value) = update_bob_states(w, &rho_ops, &m_new)?;
        rho = new_rho;
        sigma = new_sigma;
        m = Some(m_new);
        let previous = trace.last().copied().unwrap_or(m_value);
        trace.push(value);
        if (value - previous).abs() < cfg.convergence_epsilon {
            converged = true;
            break;
        }
    }
    let m = m.expect("at least one round");
    let value = *trace.last().expect("at least one round");
    Ok(Run {
        value,
        rho,
        sigma,
        m,
        trace,
        converged,
    })
}

/// Best of `cfg.restarts` independent see-saw runs.
///
/// Restarts are seeded from `(cfg.seed, restart index)` and merged by
/// value with ties going to the lowest index, so the result depends only on
/// the configuration.
pub fn optimize(w: &Witness, cfg: &SeeSawConfig) -> Result<SeeSawResult> {
    cfg.validate()?;
    if cfg.max_rounds == 0 {
        return Err(Error::validation("max_rounds must be at least 1"));
    }
    let runs: Vec<(usize, Result<Run>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| (r, run_restart(w, cfg, r)))
        .collect();
    let mut ok: Vec<(usize, Run)> = Vec::with_capacity(runs.len());
    let mut abandoned = 0;
    let mut last_err = None;
    for (r, run) in runs {
        match run {
            Ok(run) => ok.push((r, run)),
            Err(e) => {
                log::warn!("restart {r} abandoned: {e}");
                abandoned += 1;
                last_err = Some(e);
            }
        }
    }
    if ok.is_empty() {
        return Err(last_err.expect("restarts >= 1"));
    }
    let mut local_optima: Vec<LocalOptimum> = Vec::new();
    let mut by_value: Vec<&(usize, Run)> = ok.iter().filter(|(_, run)| run.converged).collect();
    by_value.sort_by(|a, b| b.1.value.total_cmp(&a.1.value).then(a.0.cmp(&b.0)));
    for (r, run) in by_value {
        if local_optima
            .iter()
            .all(|o| (o.value - run.value).abs() > 1e-6)
        {
            local_optima.push(LocalOptimum {
                value: run.value,
                negativity: negativity(run.m.operator())?,
                restart: *r,
            });
            if local_optima.len() == 10 {
                break;
            }
        }
    }
    let (restart, best) = ok
        .into_iter()
        .reduce(|a, b| if b.1.value > a.1.value { b } else { a })
        .expect("non-empty");
    Ok(SeeSawResult {
        value: best.value,
        negativity: negativity(best.m.operator())?,
        rho: best.rho,
        sigma: best.sigma,
        m: best.m,
        trace: best.trace,
        converged: best.converged,
        mode: cfg.mode,
        restart,
        local_optima,
        abandoned,
    })
}

/// Amplitudes of a pure state, split into real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl StateRecord {
    fn from_state(s: &PureState) -> Self {
        Self {
            re: s.amplitudes().iter().map(|z| z.re).collect(),
            im: s.amplitudes().iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_state(&self) -> Result<PureState> {
        let amps = nalgebra::DVector::from_iterator(
            self.re.len(),
            self.re.iter().zip(&self.im).map(|(&r, &i)| C64::new(r, i)),
        );
        PureState::normalized(amps)
    }
}

/// Explicit states, measurement and statistics behind a see-saw value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub mode: Mode,
    pub value: f64,
    pub rho: Vec<StateRecord>,
    pub sigma: Vec<StateRecord>,
    pub m_real: Vec<Vec<f64>>,
    pub m_imag: Vec<Vec<f64>>,
    pub m_eigenvalues: Vec<f64>,
    pub pt_eigenvalues: Vec<f64>,
    pub negativity: f64,
    pub probabilities: Vec<Vec<f64>>,
}

impl Certificate {
    pub fn measurement(&self) -> Result<PovmElement> {
        let d = self.m_real.len();
        let mat = DMatrix::from_fn(d, d, |i, j| C64::new(self.m_real[i][j], self.m_imag[i][j]));
        PovmElement::new(HermitianOperator::new(mat)?)
    }

    pub fn table(&self) -> Result<ProbabilityTable> {
        let rho: Vec<HermitianOperator> = self
            .rho
            .iter()
            .map(|s| s.to_state().map(|s| s.projector()))
            .collect::<Result<_>>()?;
        let sigma: Vec<HermitianOperator> = self
            .sigma
            .iter()
            .map(|s| s.to_state().map(|s| s.projector()))
            .collect::<Result<_>>()?;
        evaluate_probabilities(&rho, &sigma, &self.measurement()?)
    }

    /// Witness value recomputed from the stored states and measurement.
    pub fn reevaluate(&self, w: &Witness) -> Result<f64> {
        witness_value(w, &self.table()?)
    }
}

pub fn extract_certificate(result: &SeeSawResult) -> Result<Certificate> {
    let rho = projectors(&result.rho);
    let sigma = projectors(&result.sigma);
    let table = evaluate_probabilities(&rho, &sigma, &result.m)?;
    let (m_real, m_imag) = result.m.operator().to_parts();
    Ok(Certificate {
        mode: result.mode,
        value: result.value,
        rho: result.rho.iter().map(StateRecord::from_state).collect(),
        sigma: result.sigma.iter().map(StateRecord::from_state).collect(),
        m_real,
        m_imag,
        m_eigenvalues: result.m.operator().eigenvalues(),
        pt_eigenvalues: pt_eigenvalues(result.m.operator())?,
        negativity: result.negativity,
        probabilities: table.rows(),
    })
}

/// Versioned JSON export of an optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultExport {
    pub schema: String,
    pub witness: crate::scenario::WitnessFile,
    pub mode: Mode,
    pub seed: u64,
    pub restarts: usize,
    pub value: f64,
    pub negativity: f64,
    pub converged: bool,
    pub trace_length: usize,
    pub m_eigenvalues: Vec<f64>,
    pub pt_eigenvalues: Vec<f64>,
    pub probabilities: Vec<Vec<f64>>,
    pub local_optima: Vec<LocalOptimum>,
    pub certificate: Certificate,
}

impl ResultExport {
    pub fn new(w: &Witness, cfg: &SeeSawConfig, result: &SeeSawResult) -> Result<Self> {
        let certificate = extract_certificate(result)?;
        Ok(Self {
            schema: RESULT_SCHEMA.to_string(),
            witness: w.to_json(),
            mode: cfg.mode,
            seed: cfg.seed,
            restarts: cfg.restarts,
            value: result.value,
            negativity: result.negativity,
            converged: result.converged,
            trace_length: result.trace.len(),
            m_eigenvalues: certificate.m_eigenvalues.clone(),
            pt_eigenvalues: certificate.pt_eigenvalues.clone(),
            probabilities: certificate.probabilities.clone(),
            local_optima: result.local_optima.clone(),
            certificate,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_witness_objective() {
        let rho = vec![PureState::basis(2, 0).projector(); 3];
        let f = build_objective_operator(&Witness::zero(3), &rho, &rho).unwrap();
        assert_eq!(f, HermitianOperator::zeros(4));
    }

    #[test]
    fn single_product_term() {
        let w = Witness::integer(1, vec![1], None).unwrap();
        let f = build_objective_operator(
            &w,
            &[PureState::basis(2, 0).projector()],
            &[PureState::basis(2, 1).projector()],
        )
        .unwrap();
        assert_eq!(f, HermitianOperator::diagonal(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn degenerate_alice_update() {
        let w = Witness::integer(1, vec![1], None).unwrap();
        let p0 = PureState::basis(2, 0).projector();
        let m = PovmElement::new(tensor_product(&HermitianOperator::identity(2), &p0)).unwrap();
        let (states, value) = update_alice_states(&w, &[p0], &m).unwrap();
        assert!((value - 1.0).abs() < 1e-12);
        assert_eq!(states.len(), 1);
    }

    #[test]
    fn zero_witness_converges_immediately() {
        for mode in [Mode::Entangled, Mode::Unentangled] {
            let cfg = SeeSawConfig::new(mode).with_restarts(2);
            let r = optimize(&Witness::zero(3), &cfg).unwrap();
            assert_eq!(r.value, 0.0);
            assert!(r.converged);
            assert_eq!(r.trace.len(), 1);
        }
    }
}
