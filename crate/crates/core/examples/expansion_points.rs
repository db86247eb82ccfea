//! Expansion points implied by each polynomial family, and their
//! observability.

use tdmor::duality::{check_observability, expansion_points, observability_pair, OBSERVABILITY_RANK_TOL};
use tdmor::numkernel::RankTol;
use tdmor::orthopoly::{PolynomialFamily, Variant};

fn main() -> tdmor::Result<()> {
    let r = 12;
    for fam in PolynomialFamily::CLASSICAL {
        let rep = expansion_points(fam, r, Variant::Tdmor2, 0.0)?;
        let pts = rep.finite();
        if pts.is_empty() {
            println!("{fam:<10} all {r} points at infinity");
        } else {
            let near = pts.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
            println!(
                "{fam:<10} {} finite points, |s| >= {near:.3}, min distance {:.3e}",
                pts.len(),
                rep.min_pairwise_distance
            );
        }
        let pair = observability_pair(fam, Variant::Tdmor2, r, 0.0)?;
        let ob = check_observability(pair.s.as_ref(), &pair.l, RankTol::Absolute(OBSERVABILITY_RANK_TOL))?;
        println!("{:<10} Ob rank {} of {r} ({:?} pair)", "", ob.rank, pair.kind);
    }
    Ok(())
}
