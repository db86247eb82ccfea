//! Sparse-large / dense-small Sylvester equations against a Kronecker solve.

use faer::Mat;
use tdmor::bench::{random_stable_system, RandomSystemSpec};
use tdmor::orthopoly::{build_e_hat, PolynomialFamily};
use tdmor::reducers::syltdmor2_problem;
use tdmor::sylvester::{solve_kronecker_strict, solve_sylvester};

fn main() -> tdmor::Result<()> {
    let sys = random_stable_system(&RandomSystemSpec::new(40, 3));
    let r = 6;
    for fam in [PolynomialFamily::Legendre, PolynomialFamily::Laguerre] {
        let prob = syltdmor2_problem(&sys, fam, r)?;
        let sol = solve_sylvester(&prob)?;
        // A V E_hat + E V = B e_1^T
        let e_hat = build_e_hat(fam, r)?.e_small;
        let rhs = Mat::from_fn(sys.order(), r, |i, j| if j == 0 { sys.b[i] } else { 0.0 });
        let x = solve_kronecker_strict(
            sys.a.to_dense().as_ref(),
            sys.e.to_dense().as_ref(),
            e_hat.as_ref(),
            Mat::<f64>::identity(r, r).as_ref(),
            rhs.as_ref(),
        )?;
        let gap = (&sol.v - &x).norm_l2() / x.norm_l2();
        println!(
            "{fam:<9} path {:?}  backward residual {:.2e}  gap to Kronecker {gap:.2e}",
            sol.path, sol.backward_residual
        );
    }
    Ok(())
}
