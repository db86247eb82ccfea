//! The bundled benchmark models and their spectra.

use tdmor::bench::{build_fom, build_mini_gyro, build_triple_chain_system, TripleChainParams};
use tdmor::lti::DescriptorSystem;
use tdmor::numkernel::generalized_eigenvalues;

fn describe(name: &str, sys: &DescriptorSystem) -> tdmor::Result<()> {
    let sp = generalized_eigenvalues(sys.a.to_dense().as_ref(), sys.e.to_dense().as_ref())?;
    let poles = sp.finite_values();
    let max_re = poles.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
    let max_im = poles.iter().map(|p| p.im.abs()).fold(0.0, f64::max);
    println!(
        "{name:<13} n = {:4}  nnz(A) = {:5}  max Re = {max_re:+.3e}  max |Im| = {max_im:.3e}",
        sys.order(),
        sys.a.nnz()
    );
    Ok(())
}

fn main() -> tdmor::Result<()> {
    describe("fom", &build_fom())?;
    describe("mini_gyro", &build_mini_gyro())?;
    let chain = TripleChainParams {
        chain_length: 40,
        ..Default::default()
    };
    describe("triple_chain", &build_triple_chain_system(&chain)?)?;
    Ok(())
}
