use proptest::prelude::*;
use tdmor::bench::{random_stable_system, RandomSystemSpec};
use tdmor::lti::{DescriptorSystem, SparseMatrix};
use tdmor::timesim::{
    implicit_euler, relative_error_2norm, rescale_system, rescale_time, sample_count, InputSignal, Trajectory,
};

fn scalar(a: f64) -> DescriptorSystem {
    DescriptorSystem::new(SparseMatrix::identity(1), SparseMatrix::diagonal(&[a]), vec![1.0], vec![1.0]).unwrap()
}

#[test]
fn euler_converges_with_order_one() {
    // y' = -y + 1, y(0) = 0: y(1) = 1 - e^-1
    let sys = scalar(-1.0);
    let exact = 1.0 - (-1.0f64).exp();
    let taus = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let errs: Vec<f64> = taus
        .iter()
        .map(|&tau| {
            let t = implicit_euler(&sys, &InputSignal::Constant(1.0), 0.0, 1.0, tau, None, false).unwrap();
            (t.outputs.last().unwrap() - exact).abs()
        })
        .collect();
    let n = taus.len() as f64;
    let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((0.9..=1.1).contains(&slope), "slope {slope}");
}

#[test]
fn equilibrium_is_kept_exactly() {
    let sys = random_stable_system(&RandomSystemSpec::new(20, 3));
    // x* = -A^{-1} B for u = 1
    let a = sys.a.to_dense();
    let b = faer::Mat::from_fn(20, 1, |i, _| -sys.b[i]);
    let x = tdmor::numkernel::solve_dense(a.as_ref(), b.as_ref()).unwrap();
    let x0: Vec<f64> = (0..20).map(|i| x[(i, 0)]).collect();
    let y0: f64 = sys.c.iter().zip(&x0).map(|(c, x)| c * x).sum();
    let t = implicit_euler(&sys, &InputSignal::Constant(1.0), 0.0, 1.0, 1e-2, Some(&x0), false).unwrap();
    for y in &t.outputs {
        assert!((y - y0).abs() <= 1e-12 * y0.abs().max(1.0));
    }
}

#[test]
fn relative_error_closed_form() {
    let n = 1001;
    let times: Vec<f64> = (0..n).map(|i| i as f64 * 1e-3).collect();
    let y = Trajectory {
        times: times.clone(),
        outputs: vec![1.0; n],
        states: None,
    };
    let yr = Trajectory {
        times,
        outputs: vec![1.0 + 1e-3; n],
        states: None,
    };
    let e = relative_error_2norm(&y, &yr).unwrap();
    assert!((e - 0.0316).abs() < 1e-4, "{e}");
}

#[test]
fn sample_count_tolerates_round_off() {
    assert_eq!(sample_count(0.0, 1.0, 1e-3), 1001);
    assert_eq!(sample_count(0.0, 0.005, 5e-6), 1001);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rescaling_preserves_trajectories(len in 0.01f64..100.0, seed in 0u64..100) {
        let sys = random_stable_system(&RandomSystemSpec::new(8, seed));
        let tau = len / 200.0;
        let sig = InputSignal::SmoothStep { ta: 0.1 * len, tb: 0.2 * len };
        let phys = implicit_euler(&sys, &sig, 0.0, len, tau, None, false).unwrap();
        let map = rescale_time(0.0, len, tau).unwrap();
        let unit_sys = rescale_system(&sys, &map).unwrap();
        let unit = implicit_euler(&unit_sys, &InputSignal::SmoothStep { ta: 0.1, tb: 0.2 }, 0.0, 1.0, map.unit_tau, None, false).unwrap();
        prop_assert_eq!(phys.outputs.len(), unit.outputs.len());
        let scale = phys.outputs.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(1e-300);
        for (a, b) in phys.outputs.iter().zip(&unit.outputs) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
    }
}
