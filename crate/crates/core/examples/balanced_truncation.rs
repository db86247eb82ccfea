//! Hankel singular values, the a-priori bound and the sampled error.

use faer::c64;
use tdmor::bench::build_fom;
use tdmor::lti::Lti;
use tdmor::reducers::{bt_error_bound, BalancedTruncator};

fn main() -> tdmor::Result<()> {
    let sys = build_fom();
    let bt = BalancedTruncator::new(&sys)?;
    let hsv = bt.hankel_singular_values();
    println!("leading Hankel singular values:");
    for (i, s) in hsv.iter().take(12).enumerate() {
        println!("  {:2} {s:.4e}", i + 1);
    }
    for r in [10, 20, 30] {
        let rom = bt.truncate(r)?.model;
        let mut worst: f64 = 0.0;
        for k in 0..50 {
            let w = 10f64.powf(-1.0 + 5.0 * k as f64 / 49.0);
            let s = c64::new(0.0, w);
            worst = worst.max((sys.transfer(s)? - rom.transfer(s)?).norm());
        }
        println!("r = {r}: max |G - G_r| {worst:.4e}  bound {:.4e}", bt_error_bound(hsv, r));
    }
    Ok(())
}
