//! Recurrences, small coefficient matrices and the invertibility table.

use tdmor::orthopoly::{build_e_hat, eval_poly, is_regular, recurrence_coeffs, PolynomialFamily, Variant};

fn main() -> tdmor::Result<()> {
    let fam = PolynomialFamily::Legendre;
    for i in 1..4 {
        let c = recurrence_coeffs(fam, i)?;
        println!("{fam} i = {i}: alpha {:.4} beta {:.4} gamma {:.4}", c.alpha, c.beta, c.gamma);
    }
    println!("P_3(0.5) = {}", eval_poly(fam, 3, 0.5));
    println!("E_hat for r = 4:\n{:?}", build_e_hat(fam, 4)?.e_small);

    println!("{:<12} {:>24} {:>24}", "family", "E_tilde regular r=1..12", "E_hat regular r=1..12");
    for f in PolynomialFamily::CLASSICAL {
        let row = |v: Variant| -> tdmor::Result<String> {
            (1..=12).map(|r| Ok(if is_regular(f, v, r, 0.0)? { 'x' } else { '.' })).collect()
        };
        println!("{:<12} {:>24} {:>24}", f.name(), row(Variant::Tdmor1)?, row(Variant::Tdmor2)?);
    }
    Ok(())
}
