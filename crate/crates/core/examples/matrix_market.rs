//! Round trip of a second-order model through Matrix Market files.

use tdmor::bench::{build_triple_chain, load_matrix_market, write_matrix_market, MmSymmetry, TripleChainParams, VectorSource};
use tdmor::lti::{lift_second_order, LiftForm};
use tdmor::reducers::{irka, IrkaOptions};

fn main() -> tdmor::Result<()> {
    let dir = std::env::temp_dir().join("tdmor-mm");
    std::fs::create_dir_all(&dir)?;
    let sos = build_triple_chain(&TripleChainParams {
        chain_length: 20,
        ..Default::default()
    })?;
    write_matrix_market(&dir.join("m.mtx"), &sos.m, MmSymmetry::Symmetric)?;
    write_matrix_market(&dir.join("d.mtx"), &sos.d, MmSymmetry::Symmetric)?;
    write_matrix_market(&dir.join("k.mtx"), &sos.k, MmSymmetry::Symmetric)?;

    let back = load_matrix_market(
        &dir.join("m.mtx"),
        &dir.join("d.mtx"),
        &dir.join("k.mtx"),
        &VectorSource::Ones,
        &VectorSource::Ones,
    )?;
    println!("{} DOF, K has {} stored entries", back.dofs(), back.k.nnz());
    let sys = lift_second_order(&back, LiftForm::Chain)?;
    let rep = irka(&sys, 8, &IrkaOptions::default())?;
    println!("irka r = 8 on the lifted {}-state model: converged {}", sys.order(), rep.diagnostics.converged);
    Ok(())
}
