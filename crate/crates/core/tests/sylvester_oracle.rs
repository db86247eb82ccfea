use faer::Mat;
use proptest::prelude::*;
use tdmor::bench::{random_stable_system, RandomSystemSpec};
use tdmor::orthopoly::{is_regular, PolynomialFamily, Variant};
use tdmor::verify::kronecker_gap;

fn family(i: usize) -> PolynomialFamily {
    [
        PolynomialFamily::Legendre,
        PolynomialFamily::Chebyshev1,
        PolynomialFamily::Chebyshev2,
        PolynomialFamily::Laguerre,
        PolynomialFamily::Hermite,
        PolynomialFamily::Jacobi { a: 0.5, b: 1.5 },
    ][i]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sweep_matches_kronecker(
        n in 5usize..40,
        seed in 0u64..10_000,
        fam in 0usize..6,
        second in any::<bool>(),
        r in 1usize..7,
        descriptor in any::<bool>(),
    ) {
        let fam = family(fam);
        let variant = if second { Variant::Tdmor2 } else { Variant::Tdmor1 };
        prop_assume!(variant == Variant::Tdmor2 || r >= 2);
        prop_assume!(is_regular(fam, variant, r, 0.0).unwrap());
        let sys = random_stable_system(&RandomSystemSpec { descriptor, ..RandomSystemSpec::new(n, seed) });
        let gap = kronecker_gap(&sys, fam, variant, r).unwrap();
        prop_assert!(gap < 1e-7, "{fam} {variant} r = {r}: {gap:e}");
    }
}

#[test]
fn kronecker_oracle_flags_singular_operators() {
    let a = Mat::<f64>::identity(3, 3);
    let e = Mat::<f64>::identity(3, 3);
    let es = Mat::<f64>::identity(2, 2);
    let as_ = -Mat::<f64>::identity(2, 2);
    let f = Mat::<f64>::zeros(3, 2);
    let sol = tdmor::sylvester::solve_kronecker_oracle(a.as_ref(), e.as_ref(), es.as_ref(), as_.as_ref(), f.as_ref()).unwrap();
    assert!(sol.singular);
}
