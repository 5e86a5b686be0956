//! Conformable optimal control: minimize `∫ L(x, y, v) d_a^α x` subject to
//! `y_a^(α) = φ(x, y, v)`, through the Hamiltonian `H = −L + p φ`.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::calculus::{weight, Order};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{conformable_coordinate, stencil_derivative, GridFunction};
use crate::ode::{integrate, OdeSettings};
use crate::variational::solver::{abscissae, chebyshev_coordinates, secant_shoot, REFINEMENTS};
use crate::variational::{HamiltonianField, Lagrangian, SolverReport, SolverSettings};
use crate::Anchor;

/// Tolerance of the stationarity root-finder.
const STATIONARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Terminal {
    FixedState(f64),
    /// Free terminal state, closed by the transversality condition `p(b) = 0`.
    Free,
}

#[derive(Debug, Clone)]
pub struct ControlProblem {
    pub lagrangian: Lagrangian,
    /// Dynamics `φ(x, y, v)`.
    pub dynamics: ScalarField,
    pub a: f64,
    pub b: f64,
    pub order: Order,
    pub ya: f64,
    pub terminal: Terminal,
}

impl ControlProblem {
    pub fn new(
        lagrangian: Lagrangian,
        dynamics: ScalarField,
        a: f64,
        b: f64,
        order: Order,
        ya: f64,
        terminal: Terminal,
    ) -> Result<Self> {
        if dynamics.arity() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: dynamics.arity(),
            });
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!("need a < b, got [{a}, {b}]")));
        }
        if !ya.is_finite() || matches!(terminal, Terminal::FixedState(yb) if !yb.is_finite()) {
            return Err(Error::InvalidArgument("boundary values must be finite".into()));
        }
        Ok(Self {
            lagrangian,
            dynamics,
            a,
            b,
            order,
            ya,
            terminal,
        })
    }

    /// The variational problem written as a control problem with `φ = v`.
    pub fn from_variational(lagrangian: Lagrangian, a: f64, b: f64, order: Order, ya: f64, yb: f64) -> Result<Self> {
        let phi = ScalarField::new(3, |z| z[2])
            .with_partial(0, |_| 0.0)
            .with_partial(1, |_| 0.0)
            .with_partial(2, |_| 1.0);
        Self::new(lagrangian, phi, a, b, order, ya, Terminal::FixedState(yb))
    }

    fn coordinate_span(&self) -> f64 {
        conformable_coordinate(self.order, Anchor::left(self.a), self.b)
    }

    fn grid(&self, xs: &[f64], values: Vec<f64>) -> Result<GridFunction> {
        GridFunction::new(xs.to_vec(), values, self.order, Anchor::left(self.a))
    }
}

/// `H(x, y, v, p) = −L(x, y, v) + p φ(x, y, v)`.
pub fn oc_hamiltonian(cp: &ControlProblem) -> HamiltonianField {
    HamiltonianField::with_dynamics(cp.lagrangian.clone(), cp.dynamics.clone())
        .expect("dynamics arity is checked on construction")
}

/// Pointwise residuals of the optimality system.
#[derive(Debug, Clone)]
pub struct OptimalityResiduals {
    /// `y_a^(α) − φ`.
    pub state: GridFunction,
    /// `p_a^(α) − ∂L/∂y + p ∂φ/∂y`.
    pub costate: GridFunction,
    /// `∂L/∂v − p ∂φ/∂v`.
    pub stationarity: GridFunction,
}

impl OptimalityResiduals {
    pub fn maxima(&self) -> ResidualMaxima {
        ResidualMaxima {
            state: self.state.max_abs(),
            costate: self.costate.max_abs(),
            stationarity: self.stationarity.max_abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualMaxima {
    pub state: f64,
    pub costate: f64,
    pub stationarity: f64,
}

impl ResidualMaxima {
    fn within(&self, tol: f64) -> bool {
        self.state <= tol && self.costate <= tol && self.stationarity <= tol
    }

    fn largest(&self) -> f64 {
        self.state.max(self.costate).max(self.stationarity)
    }
}

fn coordinates(cp: &ControlProblem, xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| conformable_coordinate(cp.order, Anchor::left(cp.a), x))
        .collect()
}

fn check_shared_grid(y: &GridFunction, others: &[&GridFunction]) -> Result<()> {
    if others.iter().any(|g| g.xs() != y.xs()) {
        return Err(Error::InvalidGrid("y, v and p must share a grid".into()));
    }
    if y.len() < 5 {
        return Err(Error::InvalidGrid("residuals need at least 5 grid points".into()));
    }
    Ok(())
}

pub fn optimality_residuals(
    cp: &ControlProblem,
    y: &GridFunction,
    v: &GridFunction,
    p: &GridFunction,
) -> Result<OptimalityResiduals> {
    check_shared_grid(y, &[v, p])?;
    if y.xs()[0] < cp.a {
        return Err(Error::Domain(format!("grid starts below the anchor {}", cp.a)));
    }
    let xs = y.xs();
    let s = coordinates(cp, xs);
    let dy = stencil_derivative(&s, y.ys(), 1);
    let dp = stencil_derivative(&s, p.ys(), 1);
    let h = oc_hamiltonian(cp);
    let n = xs.len();
    let (mut state, mut costate, mut stat) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let (x, yy, vv, pp) = (xs[i], y.ys()[i], v.ys()[i], p.ys()[i]);
        state[i] = dy[i] - h.dp(x, yy, vv, pp);
        costate[i] = dp[i] + h.dy(x, yy, vv, pp)?;
        stat[i] = -h.dv(x, yy, vv, pp)?;
    }
    Ok(OptimalityResiduals {
        state: cp.grid(xs, state)?,
        costate: cp.grid(xs, costate)?,
        stationarity: cp.grid(xs, stat)?,
    })
}

/// Solves `∂H/∂v(x, y, v, p) = 0` for `v`, starting from `guess`.
///
/// Newton steps with a finite-difference `∂²H/∂v²` are tried first; if they
/// stall, a bracket is grown around the guess and refined by the Illinois
/// method.
pub fn solve_stationarity(h: &HamiltonianField, x: f64, y: f64, p: f64, guess: f64) -> Result<f64> {
    let f = |v: f64| h.dv(x, y, v, p);
    let close = |a: f64, b: f64| (a - b).abs() <= STATIONARITY_TOL * a.abs().max(1.0);
    let mut v = guess;
    let mut fv = f(v)?;
    for _ in 0..20 {
        if fv == 0.0 {
            break;
        }
        let slope = h.dvv(x, y, v, p)?;
        if !(slope.is_finite() && slope != 0.0) {
            break;
        }
        let next = v - fv / slope;
        let f_next = f(next)?;
        if !(f_next.abs() < fv.abs()) {
            if close(next, v) {
                break;
            }
            // not contracting: fall back to bracketing
            fv = f64::NAN;
            break;
        }
        let done = close(next, v);
        v = next;
        fv = f_next;
        if done {
            break;
        }
    }
    if fv.is_finite() && (fv == 0.0 || newton_converged(h, x, y, p, v)?) {
        return certify_root(h, x, y, p, v);
    }
    let (mut lo, mut hi) = bracket(&f, guess)?.ok_or_else(|| {
        Error::StationarityUnsolvable(format!(
            "no sign change of dH/dv near v = {guess} at x = {x}, y = {y}, p = {p}"
        ))
    })?;
    let (mut f_lo, mut f_hi) = (f(lo)?, f(hi)?);
    let mut side = 0i8;
    for _ in 0..200 {
        let mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let mid = if mid.is_finite() && mid > lo.min(hi) && mid < lo.max(hi) {
            mid
        } else {
            0.5 * (lo + hi)
        };
        let fm = f(mid)?;
        if fm == 0.0 || close(lo, hi) {
            return certify_root(h, x, y, p, mid);
        }
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = fm;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = fm;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    certify_root(h, x, y, p, 0.5 * (lo + hi))
}

fn newton_converged(h: &HamiltonianField, x: f64, y: f64, p: f64, v: f64) -> Result<bool> {
    let fv = h.dv(x, y, v, p)?;
    let slope = h.dvv(x, y, v, p)?;
    Ok(slope != 0.0 && (fv / slope).abs() <= STATIONARITY_TOL * v.abs().max(1.0) * 10.0)
}

fn certify_root(h: &HamiltonianField, x: f64, y: f64, p: f64, v: f64) -> Result<f64> {
    let curvature = h.dvv(x, y, v, p)?;
    if !(curvature.abs() >= 1e-12) {
        return Err(Error::StationarityUnsolvable(format!(
            "second v-derivative of H vanishes at x = {x}, v = {v}"
        )));
    }
    Ok(v)
}

fn bracket(f: &impl Fn(f64) -> Result<f64>, guess: f64) -> Result<Option<(f64, f64)>> {
    let f0 = f(guess)?;
    let mut d = 0.1 * guess.abs().max(1.0);
    for _ in 0..60 {
        for cand in [guess + d, guess - d] {
            let fc = f(cand)?;
            if fc.is_finite() && f0.is_finite() && (fc > 0.0) != (f0 > 0.0) {
                return Ok(Some((guess, cand)));
            }
        }
        d *= 2.0;
    }
    Ok(None)
}

/// A certified solution of the optimality system.
#[derive(Debug, Clone)]
pub struct PontryaginTriple {
    pub y: GridFunction,
    pub v: GridFunction,
    pub p: GridFunction,
    pub residuals: ResidualMaxima,
    pub residual_tol: f64,
    pub report: SolverReport,
}

impl PontryaginTriple {
    /// Re-evaluates the residuals against `cp`.
    pub fn check(&self, cp: &ControlProblem) -> Result<ResidualMaxima> {
        let r = optimality_residuals(cp, &self.y, &self.v, &self.p)?.maxima();
        if !r.within(self.residual_tol) || !self.residuals.within(self.residual_tol) {
            return Err(Error::NotCertified(format!(
                "optimality residual {:e} exceeds the certified tolerance {:e}",
                r.largest(),
                self.residual_tol
            )));
        }
        Ok(r)
    }
}

struct Shot {
    ys: Vec<f64>,
    vs: Vec<f64>,
    ps: Vec<f64>,
}

fn shoot(cp: &ControlProblem, h: &HamiltonianField, s_grid: &[f64], p0: f64, v0: f64, ode: &OdeSettings) -> Result<Shot> {
    let alpha = cp.order.alpha();
    let a = cp.a;
    let x_of = |s: f64| a + (alpha * s.max(0.0)).powf(1.0 / alpha);
    let last_v = Cell::new(v0);
    let states = integrate(
        |s, u, du| {
            let x = x_of(s);
            let v = solve_stationarity(h, x, u[0], u[1], last_v.get())?;
            last_v.set(v);
            du[0] = h.dp(x, u[0], v, u[1]);
            du[1] = -h.dy(x, u[0], v, u[1])?;
            Ok(())
        },
        0.0,
        &[cp.ya, p0],
        &s_grid[1..],
        ode,
    )?;
    let mut shot = Shot {
        ys: vec![cp.ya],
        vs: vec![solve_stationarity(h, a, cp.ya, p0, v0)?],
        ps: vec![p0],
    };
    for (i, u) in states.iter().enumerate() {
        if !u[0].is_finite() || !u[1].is_finite() {
            return Err(Error::NonFinite("state or costate left the representable range".into()));
        }
        let x = if i + 2 == s_grid.len() { cp.b } else { x_of(s_grid[i + 1]) };
        let prev = shot.vs[shot.vs.len() - 1];
        shot.vs.push(solve_stationarity(h, x, u[0], u[1], prev)?);
        shot.ys.push(u[0]);
        shot.ps.push(u[1]);
    }
    Ok(shot)
}

/// Solves the Hamiltonian system with the stationarity condition by
/// shooting on `p(a)`.
///
/// The control is eliminated pointwise from `∂H/∂v = 0`; the state and
/// costate equations are integrated in the conformable coordinate, where
/// they read `y_s = ∂H/∂p`, `p_s = −∂H/∂y`. The terminal condition is
/// `y(b) = yb` or, for a free terminal state, `p(b) = 0`. As in
/// [`crate::variational::solve_extremal`], the grid is doubled (at most
/// twice) when the residuals on it exceed `residual_tol`.
pub fn solve_pontryagin(cp: &ControlProblem, s: &SolverSettings) -> Result<PontryaginTriple> {
    s.validate()?;
    let h = oc_hamiltonian(cp);
    let alpha = cp.order.alpha();
    let span = cp.coordinate_span();
    let v_guess = match cp.terminal {
        Terminal::FixedState(yb) => (yb - cp.ya) / span,
        Terminal::Free => 0.0,
    };
    // initial costate from stationarity at the start with a straight-line control
    let phi_v = cp.dynamics.partial(2, &[cp.a, cp.ya, v_guess])?;
    let l_v = cp.lagrangian.dv(cp.a, cp.ya, v_guess)?;
    let mut p_guess = if phi_v != 0.0 && (l_v / phi_v).is_finite() { l_v / phi_v } else { 0.0 };
    let ode = OdeSettings::with_tol(s.ode_tol);
    let mut n = s.grid_points;
    let mut total_iterations = 0;
    for round in 0..=REFINEMENTS {
        let s_grid = chebyshev_coordinates(span, n);
        let miss = |p0: f64| -> Result<(f64, Shot)> {
            let shot = shoot(cp, &h, &s_grid, p0, v_guess, &ode)?;
            let r = match cp.terminal {
                Terminal::FixedState(yb) => shot.ys[n - 1] - yb,
                Terminal::Free => shot.ps[n - 1],
            };
            Ok((r, shot))
        };
        let scale = match cp.terminal {
            Terminal::FixedState(yb) => cp.ya.abs().max(yb.abs()).max(1.0),
            Terminal::Free => p_guess.abs().max(1.0),
        };
        let (shot, iterations, boundary_error) =
            secant_shoot(miss, p_guess, s.boundary_tol * scale, s.max_iterations)?;
        total_iterations += iterations;
        let xs = abscissae(cp.a, cp.b, alpha, &s_grid);
        let y = cp.grid(&xs, shot.ys)?;
        let v = cp.grid(&xs, shot.vs)?;
        let p = cp.grid(&xs, shot.ps)?;
        let residuals = optimality_residuals(cp, &y, &v, &p)?.maxima();
        if residuals.within(s.residual_tol) {
            return Ok(PontryaginTriple {
                report: SolverReport {
                    iterations: total_iterations,
                    shooting_parameter: p.ys()[0],
                    boundary_error,
                    grid_points: n,
                },
                y,
                v,
                p,
                residuals,
                residual_tol: s.residual_tol,
            });
        }
        if round == REFINEMENTS {
            return Err(Error::NoConvergence(format!(
                "optimality residual {:e} exceeds {:e} on {n} grid points",
                residuals.largest(),
                s.residual_tol
            )));
        }
        p_guess = p.ys()[0];
        n = 2 * n - 1;
    }
    unreachable!("the last refinement round returns")
}

/// `H` along a triple.
pub fn hamiltonian_along(cp: &ControlProblem, t: &PontryaginTriple) -> Result<GridFunction> {
    let h = oc_hamiltonian(cp);
    let xs = t.y.xs();
    let values = (0..xs.len())
        .map(|i| h.value(xs[i], t.y.ys()[i], t.v.ys()[i], t.p.ys()[i]))
        .collect();
    cp.grid(xs, values)
}

/// Generators `τ, ξ, σ, π` of `(x, y, v, p)` and gauge `Λ(x, y)`; an absent
/// entry is identically zero.
///
/// Conformable derivatives of the generators along a triple are taken by
/// grid differentiation of their composite values.
#[derive(Debug, Clone, Default)]
pub struct OCTransformationFamily {
    pub tau: Option<ScalarField>,
    pub xi: Option<ScalarField>,
    pub sigma: Option<ScalarField>,
    pub pi: Option<ScalarField>,
    pub gauge: Option<ScalarField>,
}

/// Field of the four arguments `(x, y, v, p)`.
pub fn oc_generator(f: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static) -> ScalarField {
    ScalarField::new(4, move |z| f(z[0], z[1], z[2], z[3]))
}

impl OCTransformationFamily {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn with_tau(mut self, g: ScalarField) -> Self {
        self.tau = Some(g);
        self
    }

    pub fn with_xi(mut self, g: ScalarField) -> Self {
        self.xi = Some(g);
        self
    }

    pub fn with_sigma(mut self, g: ScalarField) -> Self {
        self.sigma = Some(g);
        self
    }

    pub fn with_pi(mut self, g: ScalarField) -> Self {
        self.pi = Some(g);
        self
    }

    /// Gauge term `Λ(x, y)`.
    pub fn with_gauge(mut self, g: ScalarField) -> Self {
        self.gauge = Some(g);
        self
    }

    fn check(&self) -> Result<()> {
        for g in [&self.tau, &self.xi, &self.sigma, &self.pi].into_iter().flatten() {
            if g.arity() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    got: g.arity(),
                });
            }
        }
        if let Some(g) = &self.gauge {
            if g.arity() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    got: g.arity(),
                });
            }
        }
        Ok(())
    }
}

/// Generator values and α-derivatives along a triple.
struct Along {
    xs: Vec<f64>,
    coords: Vec<f64>,
    y: Vec<f64>,
    v: Vec<f64>,
    p: Vec<f64>,
    dy: Vec<f64>,
    w: Vec<f64>,
    tau: Vec<f64>,
    xi: Vec<f64>,
    sigma: Vec<f64>,
    pi: Vec<f64>,
    dtau: Vec<f64>,
    dxi: Vec<f64>,
    dlambda: Vec<f64>,
}

impl Along {
    fn new(cp: &ControlProblem, fam: &OCTransformationFamily, t: &PontryaginTriple) -> Result<Self> {
        fam.check()?;
        check_shared_grid(&t.y, &[&t.v, &t.p])?;
        let xs = t.y.xs().to_vec();
        let coords = coordinates(cp, &xs);
        let (y, v, p) = (t.y.ys().to_vec(), t.v.ys().to_vec(), t.p.ys().to_vec());
        let n = xs.len();
        let eval4 = |g: &Option<ScalarField>| -> Vec<f64> {
            match g {
                Some(g) => (0..n).map(|i| g.eval(&[xs[i], y[i], v[i], p[i]])).collect(),
                None => vec![0.0; n],
            }
        };
        let (tau, xi, sigma, pi) = (eval4(&fam.tau), eval4(&fam.xi), eval4(&fam.sigma), eval4(&fam.pi));
        let lambda: Vec<f64> = match &fam.gauge {
            Some(g) => (0..n).map(|i| g.eval(&[xs[i], y[i]])).collect(),
            None => vec![0.0; n],
        };
        let diff = |vals: &[f64], present: bool| {
            if present {
                stencil_derivative(&coords, vals, 1)
            } else {
                vec![0.0; n]
            }
        };
        Ok(Self {
            dy: stencil_derivative(&coords, &y, 1),
            w: xs.iter().map(|&x| weight(cp.order, x - cp.a)).collect(),
            dtau: diff(&tau, fam.tau.is_some()),
            dxi: diff(&xi, fam.xi.is_some()),
            dlambda: diff(&lambda, fam.gauge.is_some()),
            xs,
            coords,
            y,
            v,
            p,
            tau,
            xi,
            sigma,
            pi,
        })
    }

    fn start(&self, a: f64) -> usize {
        self.xs.iter().position(|&x| x > a).unwrap_or(self.xs.len())
    }
}

/// Integrated magnitude of the defect of `[−H(x̄, ȳ, v̄, p̄) + p̄ dȳ/dx̄^α]·dx̄/dx`
/// against `−H + p y^(α) + ε d_a^α Λ` along a triple.
pub fn oc_invariance_defect(
    cp: &ControlProblem,
    fam: &OCTransformationFamily,
    t: &PontryaginTriple,
    eps: f64,
) -> Result<f64> {
    let g = Along::new(cp, fam, t)?;
    let h = oc_hamiltonian(cp);
    let start = g.start(cp.a);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for i in start..g.xs.len() {
        let x = g.xs[i];
        let xbar = x + eps * g.tau[i];
        if !(xbar >= cp.a) {
            return Err(Error::Domain(format!(
                "transformed abscissa {xbar} falls below the anchor {} at x = {x}",
                cp.a
            )));
        }
        let ybar = g.y[i] + eps * g.xi[i];
        let vbar = g.v[i] + eps * g.sigma[i];
        let pbar = g.p[i] + eps * g.pi[i];
        let stretch = g.w[i] + eps * g.dtau[i];
        let dybar = (g.dy[i] + eps * g.dxi[i]) * (weight(cp.order, xbar - cp.a) / stretch);
        let jac = 1.0 + eps * g.dtau[i] / g.w[i];
        let transformed = (-h.value(xbar, ybar, vbar, pbar) + pbar * dybar) * jac;
        let original = -h.value(x, g.y[i], g.v[i], g.p[i]) + g.p[i] * g.dy[i];
        let integrand = transformed - original - eps * g.dlambda[i];
        if !integrand.is_finite() {
            return Err(Error::NonFinite(format!("control invariance defect at x = {x}")));
        }
        pts.push((g.coords[i], integrand.abs()));
    }
    if start > 0 && !pts.is_empty() {
        pts.insert(0, (g.coords[start - 1], pts[0].1));
    }
    Ok(pts
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum())
}

/// Pointwise `d_a^α(pξ) − τ(∂H/∂x + (α−1)p y^(α)/(x−a)) − H τ^(α)/(x−a)^(1−α)
/// − d_a^α Λ` along a certified triple, at grid points strictly above `a`.
pub fn oc_noether_residual(
    cp: &ControlProblem,
    fam: &OCTransformationFamily,
    t: &PontryaginTriple,
) -> Result<GridFunction> {
    t.check(cp)?;
    let g = Along::new(cp, fam, t)?;
    let h = oc_hamiltonian(cp);
    let alpha = cp.order.alpha();
    let pxi: Vec<f64> = g.p.iter().zip(&g.xi).map(|(p, xi)| p * xi).collect();
    let dpxi = if fam.xi.is_some() {
        stencil_derivative(&g.coords, &pxi, 1)
    } else {
        vec![0.0; pxi.len()]
    };
    let start = g.start(cp.a);
    let mut r = Vec::with_capacity(g.xs.len() - start);
    for i in start..g.xs.len() {
        let (x, y, v, p) = (g.xs[i], g.y[i], g.v[i], g.p[i]);
        let mut value = dpxi[i] - g.dlambda[i];
        if fam.tau.is_some() {
            let hx = h.dx(x, y, v, p)?;
            value -= g.tau[i] * (hx + (alpha - 1.0) * p * g.dy[i] / (x - cp.a));
            value -= h.value(x, y, v, p) * g.dtau[i] / g.w[i];
        }
        r.push(value);
    }
    cp.grid(&g.xs[start..], r)
}

/// `−H τ + p ξ` along a triple; constant at `α = 1` for invariant families
/// without gauge term.
pub fn oc_noether_charge(
    cp: &ControlProblem,
    fam: &OCTransformationFamily,
    t: &PontryaginTriple,
) -> Result<GridFunction> {
    let g = Along::new(cp, fam, t)?;
    let h = oc_hamiltonian(cp);
    let values = (0..g.xs.len())
        .map(|i| -h.value(g.xs[i], g.y[i], g.v[i], g.p[i]) * g.tau[i] + g.p[i] * g.xi[i])
        .collect();
    cp.grid(&g.xs, values)
}
