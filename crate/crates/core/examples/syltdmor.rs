//! Time-domain reduction of the FOM benchmark with both Sylvester variants.

use tdmor::bench::build_fom;
use tdmor::orthopoly::PolynomialFamily;
use tdmor::reducers::{syltdmor1, syltdmor2};
use tdmor::timesim::{implicit_euler, relative_error_details, InputSignal};

fn main() -> tdmor::Result<()> {
    let sys = build_fom();
    let u = InputSignal::default();
    let y = implicit_euler(&sys, &u, 0.0, 1.0, 1e-3, None, false)?;

    for fam in [PolynomialFamily::Legendre, PolynomialFamily::Chebyshev1, PolynomialFamily::Laguerre] {
        for r in [10, 20, 30] {
            let rep = syltdmor2(&sys, fam, r)?;
            let yr = implicit_euler(&rep.model, &u, 0.0, 1.0, 1e-3, None, false)?;
            let err = relative_error_details(&y, &yr)?;
            let res = rep.diagnostics.sylvester_residual.unwrap_or(f64::NAN);
            println!("syltdmor2 {fam:<10} r = {r:2}  rel err {:.3e}  residual {res:.1e}", err.value);
        }
    }

    // the first variant needs an invertible E_tilde: odd r for Legendre
    let rep = syltdmor1(&sys, PolynomialFamily::Legendre, 21, 0.0)?;
    let yr = implicit_euler(&rep.model, &u, 0.0, 1.0, 1e-3, None, false)?;
    println!("syltdmor1 legendre   r = 21  rel err {:.3e}", relative_error_details(&y, &yr)?.value);
    Ok(())
}
