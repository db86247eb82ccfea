//! Implicit Euler on a model with a physical time scale, mapped to [0, 1].

use tdmor::bench::{build_mini_gyro, MINI_GYRO_HORIZON, MINI_GYRO_STEP, MINI_GYRO_TAU};
use tdmor::experiment::{PreparedModel, TimeSettings};
use tdmor::reducers::balanced_truncation;
use tdmor::timesim::{relative_error_details, trajectory_csv, InputSignal};

fn main() -> tdmor::Result<()> {
    let time = TimeSettings {
        tf: MINI_GYRO_HORIZON,
        tau: MINI_GYRO_TAU,
        input: InputSignal::SmoothStep {
            ta: MINI_GYRO_STEP.0,
            tb: MINI_GYRO_STEP.1,
        },
    };
    let prep = PreparedModel::new("mini_gyro", &build_mini_gyro(), &time)?;
    println!(
        "{} samples, unit step {:.1e}, {:.3e} s",
        prep.reference.times.len(),
        prep.map.unit_tau,
        prep.reference_seconds
    );
    let rom = balanced_truncation(&prep.system, 10)?.model;
    let yr = prep.simulate(&rom)?;
    let err = relative_error_details(&prep.reference, &yr)?;
    println!("bt r = 10: rel err {:.3e} ({} samples skipped)", err.value, err.skipped);

    let csv = trajectory_csv(&prep.to_physical(&prep.reference));
    for line in csv.lines().step_by(100).take(6) {
        println!("  {line}");
    }
    Ok(())
}
