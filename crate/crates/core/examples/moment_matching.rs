//! One- and two-sided moment matching at a single real shift.

use faer::c64;
use tdmor::bench::{random_stable_system, RandomSystemSpec};
use tdmor::lti::Lti;
use tdmor::reducers::{moment_matching, ShiftSet, Sided};

fn main() -> tdmor::Result<()> {
    let sys = random_stable_system(&RandomSystemSpec::new(50, 7));
    let s0 = c64::new(1.0, 0.0);
    let r = 6;
    let shifts = ShiftSet::single(1.0, r)?;
    let full = sys.moments(s0, 2 * r)?;

    for (sided, matched) in [(Sided::One, r), (Sided::Two, 2 * r)] {
        let rom = moment_matching(&sys, &shifts, sided)?.model;
        let red = rom.moments(s0, 2 * r)?;
        println!("{sided:?}-sided, r = {r}");
        for k in 0..=matched {
            let rel = (full.values[k] - red.values[k]).norm() / full.values[k].norm();
            let tag = if k == matched { "  (not matched)" } else { "" };
            println!("  M_{k:<2} full {:+.6e}  rom {:+.6e}  rel {rel:.1e}{tag}", full.values[k].re, red.values[k].re);
        }
    }
    Ok(())
}
