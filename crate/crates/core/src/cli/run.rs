//! Dispatch of a problem to the numerical modules.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::document::{ResultDocument, Table};
use super::expr::Expr;
use super::spec::{
    ControlSpec, DissipativeSpec, El2dSpec, ExtremalSpec, GreenSpec, NoetherSpec, OperatorSpec,
    ProblemSpec, SideSpec, TerminalSpec,
};
use super::{CliError, Kind};
use crate::calculus::{inverse_residual, left_deriv, left_integral, right_deriv, right_integral, Order};
use crate::control::{hamiltonian_along, solve_pontryagin, ControlProblem, Terminal};
use crate::dissipative::{simulate_with_limit, DissipativeSystem, Extrapolation, LimitSchedule};
use crate::error::Error;
use crate::field::ScalarField;
use crate::function::FunctionHandle;
use crate::grid::GridFunction;
use crate::multidim::{el2d_residual, green_sides, Field2D, Lagrangian2D, Rectangle};
use crate::noether::{
    drift, generator, noether_balance_residual, probe_invariance, time_invariant_charge,
    TransformationFamily,
};
use crate::quadrature::QuadratureSettings;
use crate::variational::{
    action_value, dubois_reymond_residual, energy_function, solve_extremal, Extremal, Lagrangian,
    SolverSettings, VariationalProblem,
};

/// Random evaluation points per expression when a problem is validated.
const PROBES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    /// Seed of the probe points used to validate expressions.
    pub seed: u64,
    /// Overrides the problem's certificate tolerance.
    pub tol: Option<f64>,
    /// Records the wall time in the document (which then differs between runs).
    pub timing: bool,
}

/// Runs a problem and collects its results and certificates.
pub fn run(spec: &ProblemSpec, opts: &RunOptions) -> Result<ResultDocument, CliError> {
    let started = Instant::now();
    let mut spec = spec.clone();
    if let Some(t) = opts.tol {
        if !(t > 0.0) {
            return Err(CliError::Invalid(format!("tolerance must be positive, got {t}")));
        }
        spec.set_tol(t);
    }
    let mut ctx = Ctx {
        kind: spec.kind(),
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        doc: ResultDocument::new(spec.clone(), opts.seed),
    };
    match &spec {
        ProblemSpec::Deriv(s) => ctx.operator(s, false)?,
        ProblemSpec::Integrate(s) => ctx.operator(s, true)?,
        ProblemSpec::Extremal(s) => ctx.extremal(s)?,
        ProblemSpec::Dubois(s) => ctx.dubois(s)?,
        ProblemSpec::NoetherCheck(s) => ctx.noether(s)?,
        ProblemSpec::Control(s) => ctx.control(s)?,
        ProblemSpec::DissipativeDemo(s) => ctx.dissipative(s)?,
        ProblemSpec::GreenCheck(s) => ctx.green(s)?,
        ProblemSpec::El2dCheck(s) => ctx.el2d(s)?,
    }
    let mut doc = ctx.doc;
    if opts.timing {
        doc.wall_time_seconds = Some(started.elapsed().as_secs_f64());
    }
    Ok(doc)
}

struct Ctx {
    kind: Kind,
    rng: ChaCha8Rng,
    doc: ResultDocument,
}

fn nonempty(n: usize, field: &str) -> Result<usize, CliError> {
    if n == 0 {
        return Err(CliError::MissingField(format!("{field} (empty grid)")));
    }
    Ok(n)
}

/// `n ≥ 2` equally spaced points on `[lo, hi]`, ends included.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let mut xs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    xs[n - 1] = hi;
    xs
}

fn max_abs(g: &GridFunction) -> f64 {
    g.ys().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

impl Ctx {
    fn fail(&self, source: Error) -> CliError {
        CliError::Module {
            kind: self.kind.name(),
            source,
        }
    }

    fn order(&self, alpha: f64) -> Result<Order, CliError> {
        Order::new(alpha).map_err(|e| self.fail(e))
    }

    /// Compiles `src` and evaluates it at random points of `ranges`; the
    /// expression must be finite there.
    fn compile(&mut self, src: &str, vars: &[&str], ranges: &[(f64, f64)]) -> Result<Expr, CliError> {
        let e = Expr::compile(src, vars)?;
        let mut z = vec![0.0; vars.len()];
        for _ in 0..PROBES {
            for (zi, &(lo, hi)) in z.iter_mut().zip(ranges) {
                // (lo, hi]: the lower end is often a singular anchor
                let t: f64 = 1.0 - self.rng.gen::<f64>();
                *zi = lo + t * (hi - lo);
            }
            let v = e.eval(&z);
            if !v.is_finite() {
                return Err(CliError::Invalid(format!(
                    "`{src}` is not finite at {vars:?} = {z:?}"
                )));
            }
        }
        Ok(e)
    }

    fn lagrangian(&mut self, src: &str, a: f64, b: f64, y_range: (f64, f64)) -> Result<(Lagrangian, Expr), CliError> {
        let e = self.compile(src, &["x", "y", "v"], &[(a, b), y_range, (-1.0, 1.0)])?;
        let f = e.clone();
        Ok((Lagrangian::new(move |x, y, v| f.eval(&[x, y, v])), e))
    }

    fn operator(&mut self, s: &OperatorSpec, integrate: bool) -> Result<(), CliError> {
        let order = self.order(s.alpha)?;
        let e = self.compile(&s.f, &["x"], &[(s.a, s.x)])?;
        let f = FunctionHandle::new(move |x| e.eval(&[x]));
        let q = QuadratureSettings::default();
        let apply = |x: f64| -> crate::error::Result<f64> {
            match (integrate, s.side) {
                (false, SideSpec::Left) => left_deriv(&f, order, s.a, x),
                (false, SideSpec::Right) => right_deriv(&f, order, s.a, x),
                (true, SideSpec::Left) => left_integral(&f, order, s.a, x, &q),
                (true, SideSpec::Right) => right_integral(&f, order, s.a, x, &q),
            }
        };
        let value = apply(s.x).map_err(|e| self.fail(e))?;
        self.doc.scalar("value", value);
        if let Some(points) = &s.points {
            nonempty(points.len(), "points")?;
            let mut t = Table::new("values", &["x", "value"]);
            for &x in points {
                t.push(vec![x, apply(x).map_err(|e| self.fail(e))?]);
            }
            self.doc.tables.push(t);
        }
        if integrate && s.side == SideSpec::Left && s.x > s.a {
            let r = inverse_residual(&f, order, s.a, &[s.x], &q).map_err(|e| self.fail(e))?;
            self.doc.certify("inverse_residual", r, 1e-6);
        }
        Ok(())
    }

    fn problem(&mut self, s: &ExtremalSpec) -> Result<(VariationalProblem, Expr), CliError> {
        let order = self.order(s.alpha)?;
        let y_range = (s.ya.min(s.yb) - 1.0, s.ya.max(s.yb) + 1.0);
        let (l, e) = self.lagrangian(&s.lagrangian, s.a, s.b, y_range)?;
        let p = VariationalProblem::new(l, s.a, s.b, order, s.ya, s.yb).map_err(|e| self.fail(e))?;
        Ok((p, e))
    }

    fn solve(&mut self, p: &VariationalProblem, grid_points: usize, tol: f64) -> Result<Extremal, CliError> {
        let settings = SolverSettings {
            grid_points: nonempty(grid_points, "grid_points")?,
            residual_tol: tol,
            ..SolverSettings::default()
        };
        let e = solve_extremal(p, &settings).map_err(|e| self.fail(e))?;
        self.doc.scalar("iterations", e.report.iterations as f64);
        self.doc.scalar("shooting_parameter", e.report.shooting_parameter);
        self.doc.scalar("grid_points", e.report.grid_points as f64);
        self.doc.certify("el_residual", e.el_residual_max, tol);
        self.doc.certify("boundary_error", e.report.boundary_error, settings.boundary_tol);
        Ok(e)
    }

    fn extremal(&mut self, s: &ExtremalSpec) -> Result<(), CliError> {
        let (p, _) = self.problem(s)?;
        let e = self.solve(&p, s.grid_points, s.tol)?;
        let action = action_value(&p, &e.y, &QuadratureSettings::default()).map_err(|e| self.fail(e))?;
        self.doc.scalar("action", action);
        let mut t = Table::new("extremal", &["x", "y", "v"]);
        for x in linspace(s.a, s.b, nonempty(s.samples, "samples")?) {
            t.push(vec![x, e.y.interpolate(x), e.v.interpolate(x)]);
        }
        self.doc.tables.push(t);
        Ok(())
    }

    fn dubois(&mut self, s: &ExtremalSpec) -> Result<(), CliError> {
        let (p, expr) = self.problem(s)?;
        let e = self.solve(&p, s.grid_points, s.tol)?;
        let dr = dubois_reymond_residual(&p, &e.y).map_err(|e| self.fail(e))?;
        let energy = energy_function(&p, &e.y).map_err(|e| self.fail(e))?;
        self.doc.scalar("dubois_reymond_max", max_abs(&dr));
        let ys = energy.ys();
        let e0 = ys[1.min(ys.len() - 1)];
        let spread = ys[1..].iter().fold(0.0f64, |m, v| m.max((v - e0).abs())) / (1.0 + e0.abs());
        if expr.uses(0) {
            self.doc.scalar("energy_drift", spread);
        } else {
            self.doc.certify("energy_drift", spread, s.tol);
        }
        let mut t = Table::new("energy", &["x", "energy", "dubois_reymond"]);
        for x in linspace(s.a, s.b, nonempty(s.samples, "samples")?) {
            t.push(vec![x, energy.interpolate(x), dr.interpolate(x)]);
        }
        self.doc.tables.push(t);
        Ok(())
    }

    fn noether(&mut self, s: &NoetherSpec) -> Result<(), CliError> {
        let base = ExtremalSpec {
            lagrangian: s.lagrangian.clone(),
            alpha: s.alpha,
            a: s.a,
            b: s.b,
            ya: s.ya,
            yb: s.yb,
            grid_points: s.grid_points,
            samples: s.samples,
            tol: 1e-5,
        };
        let (p, _) = self.problem(&base)?;
        let ranges = [(s.a, s.b), (s.ya.min(s.yb) - 1.0, s.ya.max(s.yb) + 1.0)];
        let gen = |src: &Option<String>, ctx: &mut Self| -> Result<Option<ScalarField>, CliError> {
            let Some(src) = src else { return Ok(None) };
            let e = ctx.compile(src, &["x", "y"], &ranges)?;
            Ok(Some(generator(move |x, y| e.eval(&[x, y]))))
        };
        let mut fam = TransformationFamily::identity();
        if let Some(g) = gen(&s.tau, self)? {
            fam = fam.with_tau(g);
        }
        if let Some(g) = gen(&s.xi, self)? {
            fam = fam.with_xi(g);
        }
        if let Some(g) = gen(&s.gauge, self)? {
            fam = fam.with_gauge(g);
        }
        let e = self.solve(&p, s.grid_points, base.tol)?;
        let report = probe_invariance(&p, &fam, &e.y).map_err(|e| self.fail(e))?;
        self.doc.scalar("invariant", if report.is_invariant() { 1.0 } else { 0.0 });
        if let Some(slope) = report.loglog_slope {
            self.doc.scalar("defect_loglog_slope", slope);
        }
        let mut t = Table::new("invariance", &["epsilon", "defect_over_epsilon"]);
        for (eps, slope) in report.epsilon_sequence.iter().zip(&report.first_order_slopes) {
            t.push(vec![*eps, *slope]);
        }
        self.doc.tables.push(t);
        let balance = noether_balance_residual(&p, &fam, &e).map_err(|e| self.fail(e))?;
        self.doc.certify("noether_balance", max_abs(&balance), s.tol);
        if fam.tau.is_none() {
            let c = time_invariant_charge(&p, &fam).map_err(|e| self.fail(e))?;
            self.doc.certify("charge_drift", drift(&c, &e.y, p.order, p.a), s.tol);
            let mut t = Table::new("charge", &["x", "charge"]);
            for x in linspace(s.a, s.b, nonempty(s.samples, "samples")?) {
                t.push(vec![x, c.eval(x, e.y.interpolate(x), e.v.interpolate(x))]);
            }
            self.doc.tables.push(t);
        }
        Ok(())
    }

    fn control(&mut self, s: &ControlSpec) -> Result<(), CliError> {
        let order = self.order(s.alpha)?;
        let yb = match s.terminal {
            TerminalSpec::Fixed(yb) => yb,
            TerminalSpec::Free => s.ya,
        };
        let y_range = (s.ya.min(yb) - 1.0, s.ya.max(yb) + 1.0);
        let (l, lexpr) = self.lagrangian(&s.lagrangian, s.a, s.b, y_range)?;
        let phi = self.compile(&s.dynamics, &["x", "y", "v"], &[(s.a, s.b), y_range, (-1.0, 1.0)])?;
        let autonomous = !lexpr.uses(0) && !phi.uses(0);
        let dynamics = ScalarField::new(3, move |z| phi.eval(z));
        let terminal = match s.terminal {
            TerminalSpec::Fixed(yb) => Terminal::FixedState(yb),
            TerminalSpec::Free => Terminal::Free,
        };
        let cp = ControlProblem::new(l, dynamics, s.a, s.b, order, s.ya, terminal).map_err(|e| self.fail(e))?;
        let settings = SolverSettings {
            grid_points: nonempty(s.grid_points, "grid_points")?,
            residual_tol: s.tol,
            ..SolverSettings::default()
        };
        let t = solve_pontryagin(&cp, &settings).map_err(|e| self.fail(e))?;
        self.doc.scalar("iterations", t.report.iterations as f64);
        self.doc.scalar("costate_at_a", t.p.first().1);
        self.doc.certify("state_residual", t.residuals.state, s.tol);
        self.doc.certify("costate_residual", t.residuals.costate, s.tol);
        self.doc.certify("stationarity_residual", t.residuals.stationarity, s.tol);
        if autonomous && order.is_classical() {
            let h = hamiltonian_along(&cp, &t).map_err(|e| self.fail(e))?;
            let h0 = h.ys()[0];
            let spread = h.ys().iter().fold(0.0f64, |m, v| m.max((v - h0).abs()));
            self.doc.scalar("hamiltonian_drift", spread);
        }
        let mut table = Table::new("pontryagin", &["x", "y", "v", "p"]);
        for x in linspace(s.a, s.b, nonempty(s.samples, "samples")?) {
            table.push(vec![x, t.y.interpolate(x), t.v.interpolate(x), t.p.interpolate(x)]);
        }
        self.doc.tables.push(table);
        Ok(())
    }

    fn dissipative(&mut self, s: &DissipativeSpec) -> Result<(), CliError> {
        let u = self.compile(&s.potential, &["x"], &[(s.x0 - 1.0, s.x0 + 1.0)])?;
        let potential = FunctionHandle::new(move |x| u.eval(&[x])).with_numeric_deriv1();
        let sys = DissipativeSystem::new(s.m, s.gamma, potential, s.x0, s.v0).map_err(|e| self.fail(e))?;
        let extrapolation = match s.extrapolation.as_str() {
            "richardson" => Extrapolation::Richardson,
            "none" => Extrapolation::None,
            other => {
                return Err(CliError::Invalid(format!(
                    "extrapolation must be `richardson` or `none`, got `{other}`"
                )))
            }
        };
        nonempty(s.widths.len(), "widths")?;
        let sched = LimitSchedule {
            widths: s.widths.clone(),
            extrapolation,
            samples: nonempty(s.samples, "samples")?,
        };
        let sim = simulate_with_limit(&sys, s.horizon, &sched).map_err(|e| self.fail(e))?;
        let mut conv = Table::new("convergence", &["width", "distance"]);
        for (w, d) in sim.report.widths.iter().zip(&sim.report.distances) {
            conv.push(vec![*w, *d]);
        }
        self.doc.certify("extrapolated_distance", sim.report.extrapolated_distance, s.tol);
        let mut traj = Table::new("trajectories", &["t", "x", "x_ref", "width"]);
        let reference = sim.reference.ys();
        for (w, run) in sched.widths.iter().zip(&sim.per_width) {
            for ((t, x), r) in run.xs().iter().zip(run.ys()).zip(reference) {
                traj.push(vec![*t, *x, *r, *w]);
            }
        }
        for ((t, x), r) in sim.trajectory.xs().iter().zip(sim.trajectory.ys()).zip(reference) {
            traj.push(vec![*t, *x, *r, 0.0]);
        }
        self.doc.tables.push(conv);
        self.doc.tables.push(traj);
        Ok(())
    }

    fn rectangle(&self, rect: [f64; 4]) -> Result<Rectangle, CliError> {
        Rectangle::new(rect[0], rect[1], rect[2], rect[3]).map_err(|e| self.fail(e))
    }

    fn field2d(&mut self, src: &str, r: &Rectangle) -> Result<Field2D, CliError> {
        let e = self.compile(src, &["x1", "x2"], &[(r.a, r.b), (r.c, r.d)])?;
        Ok(Field2D::new(move |x1, x2| e.eval(&[x1, x2])))
    }

    fn green(&mut self, s: &GreenSpec) -> Result<(), CliError> {
        let order = self.order(s.alpha)?;
        let r = self.rectangle(s.rect)?;
        let f = self.field2d(&s.f, &r)?;
        let g = self.field2d(&s.g, &r)?;
        let sides = green_sides(&f, &g, &r, order, &QuadratureSettings::default()).map_err(|e| self.fail(e))?;
        self.doc.scalar("boundary", sides.boundary);
        self.doc.scalar("area", sides.area);
        self.doc.certify("green_residual", sides.residual(), s.tol);
        Ok(())
    }

    fn el2d(&mut self, s: &El2dSpec) -> Result<(), CliError> {
        let order = self.order(s.alpha)?;
        let r = self.rectangle(s.rect)?;
        let e = self.compile(
            &s.lagrangian,
            &["x1", "x2", "y", "v1", "v2"],
            &[(r.a, r.b), (r.c, r.d), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
        )?;
        let l = Lagrangian2D::new(1, move |z| e.eval(z)).map_err(|e| self.fail(e))?;
        let y = self.field2d(&s.y, &r)?;
        let res = el2d_residual(&l, &[y], &r, order).map_err(|e| self.fail(e))?;
        let res = &res[0];
        self.doc.scalar("argmax_x1", res.argmax.0);
        self.doc.scalar("argmax_x2", res.argmax.1);
        self.doc.certify("el2d_residual", res.max_abs, s.tol);
        Ok(())
    }
}
