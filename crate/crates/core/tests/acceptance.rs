//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs as part of `cargo test`.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::corpus::{corpus, identity_residuals, CORPUS_ALPHAS};
use common::{green_corpus, poly, riccati_oracle, tanh_sinh};
use conformable::calculus::{left_deriv, left_integral, right_deriv, right_integral, Order};
use conformable::control::{
    oc_noether_charge, oc_noether_residual, oc_generator, solve_pontryagin, ControlProblem,
    OCTransformationFamily, Terminal,
};
use conformable::dissipative::{simulate_with_limit, DissipativeSystem, LimitSchedule};
use conformable::grid::conformable_grid;
use conformable::multidim::{
    el2d_residual, green_residual, Axis, Field2D, Lagrangian2D, Rectangle, Slot2D,
};
use conformable::noether::{
    drift, generator, noether_balance_residual, probe_invariance, time_invariant_charge,
    TransformationFamily,
};
use conformable::variational::{energy_function, solve_extremal, Lagrangian, Momentum};
use conformable::{
    Anchor, FunctionHandle, GridFunction, QuadratureSettings, ScalarField, SolverSettings,
    VariationalProblem,
};

type Outcome = Result<String, String>;

fn ord(alpha: f64) -> Order {
    Order::new(alpha).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f();
    let t = start.elapsed();
    let note = format!("{:.2}s of {}s", t.as_secs_f64(), limit.as_secs());
    match out {
        Ok(d) if t <= limit => Ok(format!("{d}; {note}")),
        Ok(d) => Err(format!("{d}; too slow: {note}")),
        Err(d) => Err(format!("{d}; {note}")),
    }
}

fn spread(g: &GridFunction) -> f64 {
    let ys = g.ys();
    let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}

fn dirichlet() -> Lagrangian {
    Lagrangian::new(|_, _, v| v * v).with_dv(|_, _, v| 2.0 * v)
}

fn lq() -> Lagrangian {
    Lagrangian::new(|_, y, v| v * v + y * y)
        .with_dy(|_, y, _| 2.0 * y)
        .with_dv(|_, _, v| 2.0 * v)
}

/// `ȳ = y + ε (x−a)^α/(2α)` with gauge `Λ = y`.
fn half_slope_family(alpha: f64) -> TransformationFamily {
    TransformationFamily::identity()
        .with_xi(
            generator(move |x, _| x.powf(alpha) / (2.0 * alpha))
                .with_partial(0, move |z| 0.5 * z[0].powf(alpha - 1.0))
                .with_partial(1, |_| 0.0),
        )
        .with_gauge(generator(|_, y| y).with_partial(0, |_| 0.0).with_partial(1, |_| 1.0))
}

fn power_rule() -> Outcome {
    let mut worst = 0.0f64;
    for p in [0.5, 1.0, 2.0, 3.0] {
        for alpha in [0.25, 0.5, 0.75, 1.0] {
            for a in [0.0, 1.0] {
                for gap in [0.5f64, 1.0, 2.0] {
                    let f = FunctionHandle::new(move |u: f64| (u - a).powf(p));
                    let got = left_deriv(&f, ord(alpha), a, a + gap).map_err(|e| e.to_string())?;
                    let want = p * gap.powf(p - alpha);
                    worst = worst.max(((got - want) / want).abs());
                }
            }
        }
    }
    check(worst <= 1e-8, format!("max relative error {worst:.1e}"))
}

fn operator_identities() -> Outcome {
    let fs = corpus(7, 20);
    let mut worst = (0.0f64, "", 0, 0.0);
    for (i, &f) in fs.iter().enumerate() {
        let g = fs[(i + 1) % fs.len()];
        for alpha in CORPUS_ALPHAS {
            for (name, r) in identity_residuals(f, g, alpha) {
                if !(r <= worst.0) {
                    worst = (r, name, i, alpha);
                }
            }
        }
    }
    let (r, name, i, alpha) = worst;
    check(
        r <= 1e-6,
        format!("20 functions × 5 orders, max residual {r:.1e} ({name}, function {i}, α = {alpha})"),
    )
}

fn sqrt_problem() -> VariationalProblem {
    VariationalProblem::new(dirichlet(), 0.0, 1.0, ord(0.5), 0.0, 1.0).unwrap()
}

fn closed_form_extremal() -> Outcome {
    let e = solve_extremal(&sqrt_problem(), &SolverSettings::default()).map_err(|e| e.to_string())?;
    let d = e.y.sup_distance(f64::sqrt);
    check(
        d <= 1e-4 && e.el_residual_max <= 1e-5,
        format!("sup |y − √x| = {d:.1e}, EL residual {:.1e}", e.el_residual_max),
    )
}

fn autonomous_energy() -> Outcome {
    let p = sqrt_problem();
    let e = solve_extremal(&p, &SolverSettings::default()).map_err(|e| e.to_string())?;
    let q = energy_function(&p, &e.y).map_err(|e| e.to_string())?;
    let d = spread(&q);
    check(d <= 1e-5, format!("drift of L − L_v·v = {d:.1e}"))
}

fn worked_invariance() -> Outcome {
    let (alpha, ya, yb) = (0.5, 0.3, 1.3);
    let order = ord(alpha);
    let p = VariationalProblem::new(dirichlet(), 0.0, 1.0, order, ya, yb).unwrap();
    let c = (yb - ya) * alpha;
    let xs = conformable_grid(0.0, 1.0, order, 201).unwrap();
    let y = GridFunction::from_fn(xs, |x| ya + c * x.powf(alpha) / alpha, order, Anchor::left(0.0))
        .unwrap();
    let fam = half_slope_family(alpha);
    let r = probe_invariance(&p, &fam, &y).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = r.first_order_slopes.windows(2).map(|w| w[0] / w[1]).collect();
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let charge = time_invariant_charge(&p, &fam).map_err(|e| e.to_string())?;
    let d = drift(&charge, &y, order, 0.0);
    let x = y.xs()[100];
    let value = charge.eval(x, y.interpolate(x), c * x.powf(alpha - 1.0) * x.powf(1.0 - alpha));
    check(
        min_ratio >= 5.0 && d <= 1e-5 && (value + ya).abs() <= 1e-10,
        format!("defect slope ratio per decade ≥ {min_ratio:.1}, charge drift {d:.1e}, charge {value:.6} (−y_a = {})", -ya),
    )
}

fn noether_balance() -> Outcome {
    let s = SolverSettings::default();
    let (mut worst, mut worst_id) = (0.0f64, 0.0f64);
    for (alpha, ya, yb) in [(0.5, 0.3, 1.3), (0.8, -1.0, 2.0), (1.0, 0.0, 1.0)] {
        let p = VariationalProblem::new(dirichlet(), 0.0, 1.0, ord(alpha), ya, yb).unwrap();
        let e = solve_extremal(&p, &s).map_err(|e| e.to_string())?;
        let r = noether_balance_residual(&p, &half_slope_family(alpha), &e).map_err(|e| e.to_string())?;
        worst = worst.max(r.max_abs());
        let id = noether_balance_residual(&p, &TransformationFamily::identity(), &e)
            .map_err(|e| e.to_string())?;
        worst_id = worst_id.max(id.max_abs());
    }
    check(
        worst <= 1e-4 && worst_id <= 1e-12,
        format!("balance residual {worst:.1e}, identity family {worst_id:.1e}"),
    )
}

fn damped_oscillator(t: f64) -> f64 {
    // x'' + x'/2 + x = 0, x(0) = 1, x'(0) = 0
    let w = 0.9375f64.sqrt();
    (-0.25 * t).exp() * ((w * t).cos() + 0.25 / w * (w * t).sin())
}

fn dissipative_demo() -> Outcome {
    let harmonic = FunctionHandle::new(|x| 0.5 * x * x).with_deriv1(|x| x);
    let schedule = LimitSchedule::default();
    let sys = DissipativeSystem::new(1.0, 0.5, harmonic.clone(), 1.0, 0.0).unwrap();
    let out = simulate_with_limit(&sys, 5.0, &schedule).map_err(|e| e.to_string())?;
    let d = &out.report.distances;
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    let err = out.trajectory.sup_distance(damped_oscillator);

    let free = DissipativeSystem::new(1.0, 0.0, harmonic, 1.0, 0.0).unwrap();
    let cons = simulate_with_limit(&free, 5.0, &schedule).map_err(|e| e.to_string())?;
    let cons_worst = cons
        .per_width
        .iter()
        .map(|run| run.sup_distance(f64::cos))
        .fold(0.0f64, f64::max);
    check(
        decreasing && err <= 1e-3 && cons_worst <= 1e-6,
        format!(
            "widths {:?}: distances {:?}, extrapolated {err:.1e}, γ = 0 worst {cons_worst:.1e}",
            schedule.widths,
            d.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>()
        ),
    )
}

fn control_reduction() -> Outcome {
    let s = SolverSettings::default();
    let (mut dy_max, mut dp_max) = (0.0f64, 0.0f64);
    for alpha in [0.5, 0.75, 1.0] {
        let order = ord(alpha);
        let cp = ControlProblem::from_variational(lq(), 0.0, 1.0, order, 0.0, 1.0).unwrap();
        let t = solve_pontryagin(&cp, &s).map_err(|e| e.to_string())?;
        let p = VariationalProblem::new(lq(), 0.0, 1.0, order, 0.0, 1.0).unwrap();
        let e = solve_extremal(&p, &s).map_err(|e| e.to_string())?;
        let mom = Momentum::along(&p, &e.y).map_err(|e| e.to_string())?;
        dy_max = dy_max.max(t.y.sup_distance(|x| e.y.interpolate(x)));
        dp_max = dp_max.max(t.p.sup_distance(|x| mom.p.interpolate(x)));
    }
    let (ya, b) = (1.5, 2.0);
    let phi = ScalarField::new(3, |z| z[2]);
    let cp = ControlProblem::new(lq(), phi, 0.0, b, Order::ONE, ya, Terminal::Free).unwrap();
    let t = solve_pontryagin(&cp, &s).map_err(|e| e.to_string())?;
    let riccati = t.y.sup_distance(riccati_oracle(ya, b, 200_000));
    check(
        dy_max <= 1e-5 && dp_max <= 1e-5 && riccati <= 1e-5,
        format!("reduction |Δy| {dy_max:.1e}, |Δp| {dp_max:.1e}; LQ vs Riccati {riccati:.1e}"),
    )
}

fn control_noether() -> Outcome {
    let cp = ControlProblem::from_variational(lq(), 0.0, 1.0, Order::ONE, 0.0, 1.0).unwrap();
    let t = solve_pontryagin(&cp, &SolverSettings::default()).map_err(|e| e.to_string())?;
    let fam = OCTransformationFamily::identity().with_tau(oc_generator(|_, _, _, _| 1.0));
    let c = oc_noether_charge(&cp, &fam, &t).map_err(|e| e.to_string())?;
    let d = spread(&c);
    let id = oc_noether_residual(&cp, &OCTransformationFamily::identity(), &t)
        .map_err(|e| e.to_string())?
        .max_abs();
    check(d <= 1e-8 && id == 0.0, format!("drift of −Hτ + pξ = {d:.1e}, identity family {id:e}"))
}

fn green() -> Outcome {
    let q = QuadratureSettings::default();
    let mut worst = 0.0f64;
    for (f, g) in green_corpus() {
        for alpha in [0.25, 0.5, 0.75, 1.0] {
            let r = green_residual(&f, &g, &Rectangle::unit(), ord(alpha), &q).map_err(|e| e.to_string())?;
            worst = worst.max(r);
        }
    }
    let (f, g) = (Field2D::constant(3.0), Field2D::constant(-2.0));
    let constant = green_residual(&f, &g, &Rectangle::unit(), ord(0.5), &q).map_err(|e| e.to_string())?;
    check(
        worst <= 1e-6 && constant <= 1e-10,
        format!("10 pairs × 4 orders, max residual {worst:.1e}; constant pair {constant:.1e}"),
    )
}

fn dirichlet_2d() -> Lagrangian2D {
    Lagrangian2D::new(1, |z| z[3] * z[3] + z[4] * z[4])
        .unwrap()
        .with_partial(Slot2D::V(0, Axis::X1), |z| 2.0 * z[3])
        .unwrap()
        .with_partial(Slot2D::V(0, Axis::X2), |z| 2.0 * z[4])
        .unwrap()
}

fn el2d() -> Outcome {
    let r = Rectangle::unit();
    let mut worst = 0.0f64;
    for alpha in [0.3, 0.5, 0.75] {
        let analytic = Field2D::new(move |x1, _| x1.powf(alpha))
            .with_partial(Axis::X1, move |x1, _| alpha * x1.powf(alpha - 1.0))
            .with_partial(Axis::X2, |_, _| 0.0);
        let numeric = Field2D::new(move |x1, _| x1.powf(alpha));
        for y in [analytic, numeric] {
            let res = el2d_residual(&dirichlet_2d(), &[y], &r, ord(alpha)).map_err(|e| e.to_string())?;
            worst = worst.max(res[0].max_abs);
        }
    }
    check(worst <= 1e-6, format!("max residual over the 33×33 lattice {worst:.1e}"))
}

fn classical_regression() -> Outcome {
    let q = QuadratureSettings::default();
    let s = SolverSettings::default();
    let mut parts = Vec::new();
    let err = |e: conformable::Error| e.to_string();

    let mut calc = 0.0f64;
    for f in corpus(19, 20) {
        for x in [0.2, 0.9, 1.6] {
            calc = calc.max((left_deriv(&f.bare(), Order::ONE, 0.0, x).map_err(err)? - f.deriv(x)).abs());
            calc = calc.max((right_deriv(&f.bare(), Order::ONE, 2.0, x).map_err(err)? + f.deriv(x)).abs());
            let li = left_integral(&f.bare(), Order::ONE, 0.0, x, &q).map_err(err)?;
            calc = calc.max((li - tanh_sinh(|u| f.value(u), 0.0, x)).abs());
            let ri = right_integral(&f.bare(), Order::ONE, 2.0, x, &q).map_err(err)?;
            calc = calc.max((ri - tanh_sinh(|u| f.value(u), x, 2.0)).abs());
        }
    }
    parts.push(("calculus", calc));

    // y'' = y with y(0) = 0, y(1) = 1
    let p = VariationalProblem::new(lq(), 0.0, 1.0, Order::ONE, 0.0, 1.0).unwrap();
    let e = solve_extremal(&p, &s).map_err(err)?;
    let sinh = |x: f64| x.sinh() / 1f64.sinh();
    parts.push(("variational", e.y.sup_distance(sinh)));

    let energy = TransformationFamily::identity()
        .with_tau(generator(|_, _| 1.0).with_partial(0, |_| 0.0).with_partial(1, |_| 0.0));
    let bal = noether_balance_residual(&p, &energy, &e).map_err(err)?.max_abs();
    parts.push(("noether", bal));

    let cp = ControlProblem::from_variational(lq(), 0.0, 1.0, Order::ONE, 0.0, 1.0).unwrap();
    let t = solve_pontryagin(&cp, &s).map_err(err)?;
    let cosh_p = |x: f64| 2.0 * x.cosh() / 1f64.sinh();
    parts.push(("control", t.y.sup_distance(sinh).max(t.p.sup_distance(cosh_p))));

    let harmonic = FunctionHandle::new(|x| 0.5 * x * x).with_deriv1(|x| x);
    let sys = DissipativeSystem::new(1.0, 0.5, harmonic, 1.0, 0.0).unwrap();
    let out = simulate_with_limit(&sys, 5.0, &LimitSchedule::default()).map_err(err)?;
    parts.push(("dissipative", out.reference.sup_distance(damped_oscillator)));

    let f = poly(&[(1.0, 2, 1), (-1.0, 0, 3)], true);
    let g = poly(&[(2.0, 1, 2), (1.0, 3, 0)], true);
    let rect = Rectangle::new(-1.0, 2.0, 0.5, 1.5).unwrap();
    let gr = green_residual(&f, &g, &rect, Order::ONE, &q).map_err(err)?;
    let harmonic_2d = poly(&[(1.0, 2, 0), (-1.0, 0, 2), (3.0, 1, 1)], true);
    let lap = el2d_residual(&dirichlet_2d(), &[harmonic_2d], &rect, Order::ONE).map_err(err)?[0].max_abs;
    parts.push(("multidim", gr.max(lap)));

    let worst = parts.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let detail: Vec<String> = parts.iter().map(|(n, v)| format!("{n} {v:.1e}")).collect();
    check(worst <= 1e-6, detail.join(", "))
}

fn cli_determinism() -> Outcome {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden");
    let kinds = [
        "deriv",
        "integrate",
        "extremal",
        "dubois",
        "noether-check",
        "control",
        "dissipative-demo",
        "green-check",
        "el2d-check",
    ];
    let run = |kind: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_conformable"))
            .arg(kind)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{kind} exited with {:?}", out.status.code()));
        }
        Ok(out.stdout)
    };
    let mut mismatched = Vec::new();
    for kind in kinds {
        let (first, second) = (run(kind)?, run(kind)?);
        let expected = std::fs::read(golden.join(format!("{kind}.json"))).unwrap_or_default();
        if first != second || first != expected {
            mismatched.push(kind);
        }
    }
    check(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!("{} subcommands byte-identical across two runs and to the golden files", kinds.len())
        } else {
            format!("differs: {mismatched:?}")
        },
    )
}

fn main() {
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("power rule suite", Box::new(|| timed(Duration::from_secs(1), power_rule))),
        ("operator identities", Box::new(|| timed(Duration::from_secs(30), operator_identities))),
        ("closed-form extremal", Box::new(|| timed(Duration::from_secs(5), closed_form_extremal))),
        ("DuBois-Reymond energy conservation", Box::new(autonomous_energy)),
        ("worked invariance example", Box::new(worked_invariance)),
        ("Noether balance", Box::new(noether_balance)),
        ("dissipative demo", Box::new(|| timed(Duration::from_secs(10), dissipative_demo))),
        ("optimal control reduction", Box::new(control_reduction)),
        ("optimal control Noether charge", Box::new(control_noether)),
        ("Green's theorem", Box::new(green)),
        ("2-D Euler-Lagrange", Box::new(el2d)),
        ("order-one regression", Box::new(classical_regression)),
        ("CLI determinism", Box::new(cli_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        match f() {
            Ok(d) => println!("PASS {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
