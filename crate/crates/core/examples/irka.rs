//! IRKA on the FOM benchmark, one- and two-sided.

use tdmor::bench::build_fom;
use tdmor::lti::Lti;
use tdmor::reducers::{irka, IrkaOptions, Sided};

fn main() -> tdmor::Result<()> {
    let sys = build_fom();
    for sided in [Sided::One, Sided::Two] {
        let opts = IrkaOptions {
            sided,
            seed: 1,
            ..Default::default()
        };
        let rep = irka(&sys, 12, &opts)?;
        let d = &rep.diagnostics;
        println!(
            "{sided:?}-sided: {} iterations, {} restarts, converged {}",
            d.iterations, d.restarts, d.converged
        );
        let mut poles = rep.model.poles()?;
        poles.sort_by(|a, b| a.im.total_cmp(&b.im));
        for p in poles.iter().filter(|p| p.im >= 0.0) {
            println!("  pole {:+.4e} {:+.4e}i", p.re, p.im);
        }
        let s = faer::c64::new(0.0, 100.0);
        let g = sys.transfer(s)?;
        println!("  |G - G_r| at 100i: {:.3e}", (g - rep.model.transfer(s)?).norm());
    }
    Ok(())
}
