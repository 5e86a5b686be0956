use conformable::calculus::left_deriv;
use conformable::dissipative::*;
use conformable::variational::generalized_el_residual;
use conformable::{FunctionHandle, GridFunction, Order, VariationalProblem};
use conformable::{Anchor, Error};

fn harmonic(k: f64) -> FunctionHandle {
    FunctionHandle::new(move |x| 0.5 * k * x * x).with_deriv1(move |x| k * x)
}

fn damped_oscillator(t: f64) -> f64 {
    // x'' + x'/2 + x = 0, x(0) = 1, x'(0) = 0
    let w = 0.9375f64.sqrt();
    (-0.25 * t).exp() * ((w * t).cos() + 0.25 / w * (w * t).sin())
}

#[test]
fn limit_recovers_damped_oscillator() {
    let sys = DissipativeSystem::new(1.0, 0.5, harmonic(1.0), 1.0, 0.0).unwrap();
    let out = simulate_with_limit(&sys, 5.0, &LimitSchedule::default()).unwrap();
    let d = &out.report.distances;
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert!(out.reference.sup_distance(damped_oscillator) < 1e-8);
    let err = out.trajectory.sup_distance(damped_oscillator);
    assert!(err < 1e-3, "{err}");
    // halving the width roughly halves the error
    for w in d.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.5..3.0).contains(&ratio), "{ratio}");
    }
}

#[test]
fn conservative_system_ignores_width() {
    let sys = DissipativeSystem::new(2.0, 0.0, harmonic(3.0), 0.5, -1.0).unwrap();
    let out = simulate_with_limit(&sys, 5.0, &LimitSchedule::default()).unwrap();
    assert!(out.report.distances.iter().all(|&d| d <= 1e-6));
    // energy along each width
    for run in &out.per_width {
        let v = run.derivative();
        let e: Vec<f64> = run
            .ys()
            .iter()
            .zip(&v)
            .map(|(x, v)| canonical_energy(&sys, *x, *v, 0.0).h)
            .collect();
        let e0 = 0.5 * 2.0 * 1.0 + 0.5 * 3.0 * 0.25;
        let drift = e.iter().fold(0.0f64, |m, x| m.max((x - e0).abs()));
        // grid differentiation of the sampled trajectory limits this check
        assert!(drift < 1e-5, "{drift}");
    }
}

#[test]
fn free_particle_with_friction_settles() {
    let u = FunctionHandle::constant(0.0).with_deriv1(|_| 0.0);
    let sys = DissipativeSystem::new(1.0, 1.0, u, 0.0, 1.0).unwrap();
    let out = simulate_with_limit(&sys, 4.0, &LimitSchedule::default()).unwrap();
    let exact = |t: f64| 1.0 - (-t).exp();
    assert!(out.trajectory.sup_distance(exact) < 1e-4);
}

#[test]
fn no_extrapolation_returns_the_finest_run() {
    let sys = DissipativeSystem::new(1.0, 0.5, harmonic(1.0), 1.0, 0.0).unwrap();
    let sched = LimitSchedule::new(vec![0.1, 0.05], Extrapolation::None).unwrap();
    let out = simulate_with_limit(&sys, 2.0, &sched).unwrap();
    assert_eq!(out.trajectory.ys(), out.per_width[1].ys());
}

#[test]
fn free_motion_has_zero_residual() {
    let u = FunctionHandle::constant(0.0).with_deriv1(|_| 0.0);
    let sys = DissipativeSystem::new(1.0, 0.0, u, 0.0, 0.0).unwrap();
    let ts: Vec<f64> = (0..=50).map(|i| i as f64 * 0.02).collect();
    let x = GridFunction::from_fn(ts, |t| 2.0 + 3.0 * t, Order::ONE, Anchor::left(0.0)).unwrap();
    assert!(equation_of_motion_residual(&sys, 0.0, &x).unwrap().max_abs() < 1e-8);
}

#[test]
fn conservative_oscillator_residual() {
    let (m, k) = (2.0, 8.0);
    let w = (k / m as f64).sqrt();
    let sys = DissipativeSystem::new(m, 0.0, harmonic(k), 1.0, 0.0).unwrap();
    let ts: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.001).collect();
    let x = GridFunction::from_fn(ts, |t| (w * t).cos(), Order::ONE, Anchor::left(0.0)).unwrap();
    assert!(equation_of_motion_residual(&sys, 0.0, &x).unwrap().max_abs() < 1e-6);
}

#[test]
fn windowed_trajectory_solves_the_friction_equation() {
    // one window of width 1 with anchor 0: the simulated trajectory must
    // satisfy the friction equation of motion
    let sys = DissipativeSystem::new(1.3, 0.7, harmonic(2.0), 0.4, 0.9).unwrap();
    let sched = LimitSchedule {
        widths: vec![1.0],
        extrapolation: Extrapolation::None,
        samples: 401,
    };
    let out = simulate_with_limit(&sys, 1.0, &sched).unwrap();
    let r = equation_of_motion_residual(&sys, 0.0, &out.per_width[0]).unwrap();
    assert!(r.max_abs() < 1e-6, "{}", r.max_abs());
}

#[test]
fn friction_el_is_the_negated_equation_of_motion() {
    let sys = DissipativeSystem::new(1.3, 0.7, harmonic(2.0), 0.4, 0.9).unwrap();
    let l = friction_lagrangian(&sys);
    let a = 0.0;
    let ts: Vec<f64> = (1..=200).map(|i| i as f64 * 0.005).collect();
    let traj = |t: f64| (1.1 * t).sin() + 0.3 * t * t;
    let y = GridFunction::from_fn(ts, traj, FRICTION_ORDER, Anchor::left(a)).unwrap();
    let p = VariationalProblem::new(l, a, 1.0, FRICTION_ORDER, traj(a), traj(1.0)).unwrap();
    let gel = generalized_el_residual(&p, &y).unwrap();
    let eom = equation_of_motion_residual(&sys, a, &y).unwrap();
    for (g, e) in gel.ys().iter().zip(eom.ys()).skip(2).take(190) {
        assert!((g + e).abs() < 1e-5, "{g} {e}");
    }
}

#[test]
fn lagrangian_partials_match_finite_differences() {
    let sys = DissipativeSystem::new(2.0, 1.5, harmonic(1.0), 0.0, 0.0).unwrap();
    let l = friction_lagrangian(&sys);
    let h = 1e-6;
    let (t, x, xp, v) = (0.3, 0.7, -0.2, 1.1);
    let fd = (l.value(t, x, xp, v + h) - l.value(t, x, xp, v - h)) / (2.0 * h);
    let dv = l.partial(conformable::MixedLagrangian::V, t, x, xp, v).unwrap();
    assert!((fd - dv).abs() < 1e-8);
    assert!((dv - 1.5 * v).abs() < 1e-14);
}

#[test]
fn canonical_energy_examples() {
    let u = FunctionHandle::new(|x| x * x).with_deriv1(|x| 2.0 * x);
    let sys = DissipativeSystem::new(2.0, 1.0, u, 0.0, 0.0).unwrap();
    let e = canonical_energy(&sys, 1.0, 1.0, 0.5);
    assert!((e.h - 2.125).abs() < 1e-15);
    assert_eq!(e.p1, 2.0);
    assert_eq!(e.p_half, 0.5);
    let free = DissipativeSystem::new(3.0, 0.0, harmonic(1.0), 0.0, 0.0).unwrap();
    assert_eq!(canonical_energy(&free, 2.0, 1.0, 7.0).h, 1.5 + 2.0);
}

#[test]
fn half_order_momentum_vanishes_at_the_anchor() {
    let u = FunctionHandle::constant(0.0).with_deriv1(|_| 0.0);
    let sys = DissipativeSystem::new(1.0, 2.0, u, 0.0, 0.0).unwrap();
    let a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..8 {
        let t = a + 10f64.powi(-k);
        let p = canonical_energy(&sys, 0.0, 3.0, half_order_velocity(a, t, 3.0)).p_half;
        assert!(p < last);
        last = p;
    }
    assert!(last < 1e-2);
}

#[test]
fn friction_energy_is_first_order_in_the_window() {
    // γ/2 (x^(1/2))² against γ/2 x'² (t−a) at window midpoints, with the
    // half-order velocity taken from its limit definition
    let sys = DissipativeSystem::new(1.0, 0.5, harmonic(1.0), 1.0, 0.0).unwrap();
    let sched = LimitSchedule {
        widths: vec![0.05],
        extrapolation: Extrapolation::None,
        samples: 401,
    };
    let out = simulate_with_limit(&sys, 2.0, &sched).unwrap();
    let run = out.per_width[0].clone();
    let xp = run.derivative();
    for k in 0..40 {
        let a = k as f64 * 0.05;
        let mid = a + 0.025;
        let r = run.clone();
        let f = FunctionHandle::new(move |t| r.interpolate(t));
        let v = left_deriv(&f, FRICTION_ORDER, a, mid).unwrap();
        let i = run.xs().iter().position(|&t| (t - mid).abs() < 1e-12).unwrap();
        let lhs = 0.5 * sys.gamma * v * v;
        let rhs = 0.5 * sys.gamma * xp[i] * xp[i] * (mid - a);
        if rhs.abs() > 1e-8 {
            assert!((lhs - rhs).abs() <= 0.05 * rhs.abs(), "{lhs} {rhs}");
        }
    }
}

#[test]
fn invalid_inputs() {
    assert!(DissipativeSystem::new(0.0, 0.0, harmonic(1.0), 0.0, 0.0).is_err());
    assert!(DissipativeSystem::new(1.0, -1.0, harmonic(1.0), 0.0, 0.0).is_err());
    let sys = DissipativeSystem::new(1.0, 0.0, harmonic(1.0), 0.0, 0.0).unwrap();
    assert!(matches!(
        simulate_with_limit(&sys, -1.0, &LimitSchedule::default()),
        Err(Error::InvalidArgument(_))
    ));
}
