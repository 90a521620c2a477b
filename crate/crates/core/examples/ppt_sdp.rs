//! Maximizes tr(M F) over PPT effects for a few objectives and compares
//! with the unconstrained optimum, the projector onto the positive part.
use entcert::qcore::{negativity, psi_plus, tensor_product, HermitianOperator, PureState};
use entcert::sdp::{solve_ppt, solve_unconstrained_entangled, PptProblem};

fn main() -> entcert::Result<()> {
    let zero = PureState::basis(2, 0).projector();
    let objectives = [
        ("Bell projector", psi_plus().projector()),
        (
            "Bell minus product",
            psi_plus()
                .projector()
                .sub(&tensor_product(&zero, &zero).scale(0.5)),
        ),
        ("identity", HermitianOperator::identity(4)),
    ];
    for (name, f) in objectives {
        let sol = solve_ppt(&PptProblem::new(f.clone()))?;
        let (_, unconstrained) = solve_unconstrained_entangled(&f)?;
        println!(
            "{name:<20} PPT {:.8}  unconstrained {:.8}  gap {:.1e}  negativity {:.1e}",
            sol.value,
            unconstrained,
            sol.duality_gap_or_residual,
            negativity(sol.m.operator())?
        );
    }
    Ok(())
}
