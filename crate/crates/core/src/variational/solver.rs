//! Shooting solver for the conformable Euler–Lagrange boundary value problem.
//!
//! In the coordinate `s = (x−a)^α/α` the conformable derivative is `d/ds`, so
//! the Euler–Lagrange equation becomes the classical one in `s`:
//! `y_s = w`, `d/ds ∂L/∂v = ∂L/∂y` with `x_s = (x−a)^(1−α)`. The system is
//! regular at `s = 0`; the shooting parameter is `w(0)`.

use serde::{Deserialize, Serialize};

use super::{el_residual, Lagrangian, VariationalProblem};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::ode::{integrate, OdeSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub boundary_tol: f64,
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub grid_points: usize,
    /// Distance from `a` at which integration starts, as a fraction of
    /// `b − a`. Zero integrates from the anchor itself.
    pub endpoint_offset: f64,
    pub ode_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            boundary_tol: 1e-8,
            residual_tol: 1e-5,
            max_iterations: 60,
            grid_points: 201,
            endpoint_offset: 0.0,
            ode_tol: 1e-11,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.boundary_tol > 0.0 && self.residual_tol > 0.0 && self.ode_tol > 0.0) {
            return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
        }
        if self.grid_points < 5 {
            return Err(Error::InvalidArgument("need at least 5 grid points".into()));
        }
        if !(0.0..0.5).contains(&self.endpoint_offset) {
            return Err(Error::InvalidArgument(format!(
                "endpoint offset {} outside [0, 0.5)",
                self.endpoint_offset
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// Conformable derivative of the extremal at the start of integration.
    pub shooting_parameter: f64,
    pub boundary_error: f64,
    pub grid_points: usize,
}

/// A trajectory certified to satisfy the Euler–Lagrange equation of a
/// problem to `residual_tol`.
#[derive(Debug, Clone)]
pub struct Extremal {
    pub y: GridFunction,
    /// Conformable derivative of `y` as integrated by the solver.
    pub v: GridFunction,
    pub el_residual_max: f64,
    pub residual_tol: f64,
    pub report: SolverReport,
}

impl Extremal {
    /// Certifies a given trajectory (for instance a closed-form extremal) by
    /// evaluating its Euler–Lagrange residual.
    pub fn certify(p: &VariationalProblem, y: GridFunction, residual_tol: f64) -> Result<Self> {
        let r = el_residual(p, &y)?.max_abs();
        if !(r <= residual_tol) {
            return Err(Error::NotAnExtremal(format!(
                "Euler-Lagrange residual {r:e} exceeds {residual_tol:e}"
            )));
        }
        let v = y.with_values(super::Trace::new(p.order, p.a, &y)?.vs)?;
        let boundary_error = (y.first().1 - p.ya).abs().max((y.last().1 - p.yb).abs());
        Ok(Self {
            report: SolverReport {
                iterations: 0,
                shooting_parameter: v.ys()[0],
                boundary_error,
                grid_points: y.len(),
            },
            y,
            v,
            el_residual_max: r,
            residual_tol,
        })
    }

    /// Re-evaluates the certificate against `p`; fails when the trajectory
    /// does not solve this problem's Euler–Lagrange equation.
    pub fn check(&self, p: &VariationalProblem) -> Result<f64> {
        let r = el_residual(p, &self.y)?.max_abs();
        if !(r <= self.residual_tol) || !(self.el_residual_max <= self.residual_tol) {
            return Err(Error::NotAnExtremal(format!(
                "Euler-Lagrange residual {r:e} exceeds the certified tolerance {:e}",
                self.residual_tol
            )));
        }
        Ok(r)
    }
}

const SINGULAR: f64 = 1e-12;

/// Right-hand side of the first-order system in `s` for state `(y, w)`.
fn rhs(l: &Lagrangian, a: f64, alpha: f64, s: f64, y: f64, w: f64) -> Result<(f64, f64)> {
    let s = s.max(0.0);
    let x = a + (alpha * s).powf(1.0 / alpha);
    let xs = if alpha == 1.0 { 1.0 } else { (alpha * s).powf((1.0 - alpha) / alpha) };
    let z = [x, y, w];
    let f = l.field();
    let lvv = f.second_partial(Lagrangian::V, Lagrangian::V, &z)?;
    if !(lvv.abs() >= SINGULAR) {
        return Err(Error::SingularLagrangian(format!(
            "second v-derivative of L is {lvv:e} at x = {x}, y = {y}, v = {w}"
        )));
    }
    let ly = f.partial(Lagrangian::Y, &z)?;
    let lvy = f.second_partial(Lagrangian::Y, Lagrangian::V, &z)?;
    let lvx = if xs == 0.0 {
        0.0
    } else {
        f.second_partial(Lagrangian::X, Lagrangian::V, &z)?
    };
    Ok((w, (ly - lvx * xs - lvy * w) / lvv))
}

struct Shot {
    ys: Vec<f64>,
    ws: Vec<f64>,
}

fn shoot(p: &VariationalProblem, s_grid: &[f64], s0: f64, w0: f64, ode: &OdeSettings) -> Result<Shot> {
    let alpha = p.order.alpha();
    let l = &p.lagrangian;
    let y0 = p.ya + w0 * s0;
    let start = s_grid.partition_point(|&s| s < s0);
    let mut ys: Vec<f64> = s_grid[..start].iter().map(|&s| p.ya + w0 * s).collect();
    let mut ws = vec![w0; start];
    let states = integrate(
        |s, u, du| {
            let (dy, dw) = rhs(l, p.a, alpha, s, u[0], u[1])?;
            du[0] = dy;
            du[1] = dw;
            Ok(())
        },
        s0,
        &[y0, w0],
        &s_grid[start..],
        ode,
    )?;
    for u in states {
        if !u[0].is_finite() || !u[1].is_finite() {
            return Err(Error::NonFinite("trajectory left the representable range".into()));
        }
        ys.push(u[0]);
        ws.push(u[1]);
    }
    Ok(Shot { ys, ws })
}

/// Chebyshev–Lobatto points in s: quadratic clustering at the anchor, where
/// extremals of x-dependent problems are not smooth in s, and at the far end,
/// where the one-sided stencils sit.
pub(crate) fn chebyshev_coordinates(span: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == n - 1 {
                span
            } else {
                let t = std::f64::consts::PI * i as f64 / (n - 1) as f64;
                0.5 * span * (1.0 - t.cos())
            }
        })
        .collect()
}

/// Grid refinements tried after the first grid fails the residual check.
pub(crate) const REFINEMENTS: usize = 2;

/// Solves the Euler–Lagrange boundary value problem by secant shooting on
/// the initial conformable slope.
///
/// When the shot meets the boundary condition but the Euler–Lagrange
/// residual on the grid exceeds `residual_tol`, the grid is doubled (at most
/// twice) and the problem solved again.
pub fn solve_extremal(p: &VariationalProblem, s: &SolverSettings) -> Result<Extremal> {
    s.validate()?;
    let alpha = p.order.alpha();
    let span = p.coordinate_span();
    let s0 = (s.endpoint_offset * (p.b - p.a)).powf(alpha) / alpha;
    // probe the Legendre condition at the start before any integration
    rhs(&p.lagrangian, p.a, alpha, s0, p.ya, (p.yb - p.ya) / span)?;

    let mut n = s.grid_points;
    let mut w_guess = (p.yb - p.ya) / (span - s0);
    let mut total_iterations = 0;
    for round in 0..=REFINEMENTS {
        let s_grid = chebyshev_coordinates(span, n);
        let ode = OdeSettings::with_tol(s.ode_tol);
        let miss = |w0: f64| -> Result<(f64, Shot)> {
            let shot = shoot(p, &s_grid, s0, w0, &ode)?;
            Ok((shot.ys[n - 1] - p.yb, shot))
        };
        let tol = s.boundary_tol * p.ya.abs().max(p.yb.abs()).max(1.0);
        let (shot, iterations, boundary_error) = secant_shoot(miss, w_guess, tol, s.max_iterations)?;
        total_iterations += iterations;
        let xs = abscissae(p.a, p.b, alpha, &s_grid);
        let y = p.on_grid(&xs, shot.ys)?;
        let v = p.on_grid(&xs, shot.ws)?;
        let el_residual_max = el_residual(p, &y)?.max_abs();
        if el_residual_max <= s.residual_tol {
            return Ok(Extremal {
                report: SolverReport {
                    iterations: total_iterations,
                    shooting_parameter: v.ys()[0],
                    boundary_error,
                    grid_points: n,
                },
                y,
                v,
                el_residual_max,
                residual_tol: s.residual_tol,
            });
        }
        if round == REFINEMENTS {
            return Err(Error::NoConvergence(format!(
                "Euler-Lagrange residual {el_residual_max:e} exceeds {:e} on {n} grid points",
                s.residual_tol
            )));
        }
        w_guess = v.ys()[0];
        n = 2 * n - 1;
    }
    unreachable!("the last refinement round returns")
}

/// Secant iteration on a scalar shooting parameter until `|miss| <= tol`.
///
/// `miss` returns the boundary miss and the trajectory it produced. A
/// numerical failure (overflow, stiff blow-up) at a trial parameter halves
/// the step back towards the last good parameter.
pub(crate) fn secant_shoot<T>(
    mut miss: impl FnMut(f64) -> Result<(f64, T)>,
    guess: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<(T, usize, f64)> {
    let mut w_prev = guess;
    let (mut r_prev, mut best) = miss(w_prev)?;
    let mut w_cur = w_prev + 0.1 * w_prev.abs().max(1.0);
    let mut iterations = 1;
    while r_prev.abs() > tol {
        if iterations >= max_iterations {
            return Err(Error::NoConvergence(format!(
                "shooting did not meet the boundary condition in {max_iterations} iterations (miss {r_prev:e})"
            )));
        }
        iterations += 1;
        let (r_cur, shot) = match miss(w_cur) {
            Ok(v) => v,
            Err(e) if e.is_numerical_failure() => {
                // overshoot: retreat towards the last good parameter
                w_cur = 0.5 * (w_cur + w_prev);
                continue;
            }
            Err(e) => return Err(e),
        };
        let slope = (r_cur - r_prev) / (w_cur - w_prev);
        w_prev = w_cur;
        r_prev = r_cur;
        best = shot;
        if r_cur.abs() <= tol {
            break;
        }
        if !(slope.is_finite() && slope != 0.0) {
            return Err(Error::NoConvergence(
                "shooting map is flat; the boundary value problem looks degenerate".into(),
            ));
        }
        w_cur -= r_cur / slope;
    }
    Ok((best, iterations, r_prev.abs()))
}

/// Abscissae `a + (α s)^(1/α)` of the conformable coordinates `s`, with the
/// last one pinned to `b`.
pub(crate) fn abscissae(a: f64, b: f64, alpha: f64, s_grid: &[f64]) -> Vec<f64> {
    let n = s_grid.len();
    s_grid
        .iter()
        .enumerate()
        .map(|(i, &si)| if i == n - 1 { b } else { a + (alpha * si).powf(1.0 / alpha) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Order;

    #[test]
    fn square_root_extremal() {
        let order = Order::new(0.5).unwrap();
        let l = Lagrangian::new(|_, _, v| v * v);
        let p = VariationalProblem::new(l, 0.0, 1.0, order, 0.0, 1.0).unwrap();
        let e = solve_extremal(&p, &SolverSettings::default()).unwrap();
        assert!(e.y.sup_distance(f64::sqrt) < 1e-9);
        assert!(e.el_residual_max < 1e-6);
        assert!((e.report.shooting_parameter - 0.5).abs() < 1e-8);
    }

    #[test]
    fn linear_lagrangian_is_singular() {
        let l = Lagrangian::new(|x, _, v| x * v);
        let p = VariationalProblem::new(l, 0.0, 1.0, Order::ONE, 0.0, 1.0).unwrap();
        assert!(matches!(
            solve_extremal(&p, &SolverSettings::default()),
            Err(Error::SingularLagrangian(_))
        ));
    }
}
