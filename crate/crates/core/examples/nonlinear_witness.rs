//! Builds the Bell-state experiment whose statistics violate the nonlinear
//! witness, then checks a batch of separable experiments for comparison.
use entcert::nonlinear::{evaluate_nonlinear_witness, random_separable_experiment};
use entcert::qcore::{psi_plus, PovmElement, PureState, C64};
use entcert::scenario::evaluate_probabilities;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn qubit(a: C64, b: C64) -> entcert::qcore::HermitianOperator {
    PureState::normalized(DVector::from_vec(vec![a, b]))
        .expect("nonzero")
        .projector()
}

fn main() -> entcert::Result<()> {
    let (one, zero, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    let rho = [qubit(one, zero), qubit(one, one), qubit(one, i)];
    let sigma = [qubit(zero, one), qubit(one, -one), qubit(one, i)];
    let m = PovmElement::new(psi_plus().projector())?;
    let p = evaluate_probabilities(&rho, &sigma, &m)?;
    let report = evaluate_nonlinear_witness(&p)?;
    println!("table {:?}", p.rows());
    println!(
        "R = {:.6}, min = {}, {}",
        report.r_value, report.min_value, report.reason
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let certified = (0..1000)
        .filter(|_| {
            let (rho, sigma, m) = random_separable_experiment(&mut rng, 3);
            let p = evaluate_probabilities(&rho, &sigma, &m).expect("valid experiment");
            evaluate_nonlinear_witness(&p)
                .expect("valid table")
                .certified_entangled
        })
        .count();
    println!("separable experiments certified: {certified} / 1000");
    Ok(())
}
