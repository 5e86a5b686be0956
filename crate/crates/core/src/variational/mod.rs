//! Conformable variational problems: action functionals, Euler–Lagrange and
//! DuBois–Reymond residuals, the Hamiltonian form, and a shooting solver for
//! extremals.

mod hamiltonian;
pub(crate) mod solver;

pub use hamiltonian::{hamiltonian_system_residual, HamiltonianField, HamiltonianResidual, Momentum};
pub use solver::{solve_extremal, Extremal, SolverReport, SolverSettings};

use crate::calculus::{weight, Anchor, Order};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{conformable_coordinate, stencil_derivative, GridFunction};
use crate::quadrature::{integrate, QuadratureSettings};

/// Lagrangian `L(x, y, v)` where `v` holds the conformable derivative of `y`.
#[derive(Debug, Clone)]
pub struct Lagrangian(ScalarField);

impl Lagrangian {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const V: usize = 2;

    pub fn new(f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(ScalarField::new(3, move |z| f(z[0], z[1], z[2])))
    }

    pub fn with_dx(self, d: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(self.0.with_partial(Self::X, move |z| d(z[0], z[1], z[2])))
    }

    pub fn with_dy(self, d: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(self.0.with_partial(Self::Y, move |z| d(z[0], z[1], z[2])))
    }

    pub fn with_dv(self, d: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(self.0.with_partial(Self::V, move |z| d(z[0], z[1], z[2])))
    }

    pub fn from_field(field: ScalarField) -> Result<Self> {
        if field.arity() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: field.arity(),
            });
        }
        Ok(Self(field))
    }

    pub fn field(&self) -> &ScalarField {
        &self.0
    }

    pub fn value(&self, x: f64, y: f64, v: f64) -> f64 {
        self.0.eval(&[x, y, v])
    }

    pub fn dx(&self, x: f64, y: f64, v: f64) -> Result<f64> {
        self.0.partial(Self::X, &[x, y, v])
    }

    pub fn dy(&self, x: f64, y: f64, v: f64) -> Result<f64> {
        self.0.partial(Self::Y, &[x, y, v])
    }

    pub fn dv(&self, x: f64, y: f64, v: f64) -> Result<f64> {
        self.0.partial(Self::V, &[x, y, v])
    }

    /// `L` multiplied by a constant.
    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.scaled(c))
    }
}

/// Lagrangian `L(x, y, y', v)` depending on both the classical derivative
/// `y'` and the conformable derivative `v`.
#[derive(Debug, Clone)]
pub struct MixedLagrangian(ScalarField);

impl MixedLagrangian {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const YP: usize = 2;
    pub const V: usize = 3;

    pub fn new(f: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(ScalarField::new(4, move |z| f(z[0], z[1], z[2], z[3])))
    }

    /// Attaches the analytic partial in `slot` (one of the slot constants).
    pub fn with_partial(
        self,
        slot: usize,
        d: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self(self.0.with_partial(slot, move |z| d(z[0], z[1], z[2], z[3])))
    }

    /// Wraps a plain Lagrangian that ignores `y'`.
    pub fn from_lagrangian(l: Lagrangian) -> Self {
        Self::new(move |x, y, _yp, v| l.value(x, y, v))
    }

    pub fn field(&self) -> &ScalarField {
        &self.0
    }

    pub fn value(&self, x: f64, y: f64, yp: f64, v: f64) -> f64 {
        self.0.eval(&[x, y, yp, v])
    }

    pub fn partial(&self, slot: usize, x: f64, y: f64, yp: f64, v: f64) -> Result<f64> {
        self.0.partial(slot, &[x, y, yp, v])
    }
}

/// Fixed-endpoint problem: extremize `∫_a^b L(x, y, y_a^(α)) d_a^α x` with
/// `y(a) = ya`, `y(b) = yb`.
#[derive(Debug, Clone)]
pub struct VariationalProblem<L = Lagrangian> {
    pub lagrangian: L,
    pub a: f64,
    pub b: f64,
    pub order: Order,
    pub ya: f64,
    pub yb: f64,
}

impl<L> VariationalProblem<L> {
    pub fn new(lagrangian: L, a: f64, b: f64, order: Order, ya: f64, yb: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need finite a < b, got [{a}, {b}]"
            )));
        }
        if !ya.is_finite() || !yb.is_finite() {
            return Err(Error::InvalidArgument("boundary values must be finite".into()));
        }
        Ok(Self {
            lagrangian,
            a,
            b,
            order,
            ya,
            yb,
        })
    }

    pub fn anchor(&self) -> Anchor {
        Anchor::left(self.a)
    }

    /// Conformable coordinate of the right endpoint.
    pub fn coordinate_span(&self) -> f64 {
        conformable_coordinate(self.order, self.anchor(), self.b)
    }

    /// Wraps values on the grid of `y` as a grid function tagged with this
    /// problem's order and anchor.
    pub(crate) fn on_grid(&self, xs: &[f64], values: Vec<f64>) -> Result<GridFunction> {
        GridFunction::new(xs.to_vec(), values, self.order, self.anchor())
    }
}

/// Samples of a trajectory with its conformable derivative, in the
/// coordinates of a given problem.
pub(crate) struct Trace {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub vs: Vec<f64>,
    pub coords: Vec<f64>,
}

impl Trace {
    pub fn new(order: Order, a: f64, y: &GridFunction) -> Result<Self> {
        let anchor = Anchor::left(a);
        let xs = y.xs().to_vec();
        if xs[0] < a {
            return Err(Error::Domain(format!(
                "grid starts at {} below the anchor {a}",
                xs[0]
            )));
        }
        if xs.len() < 5 {
            return Err(Error::InvalidGrid(
                "residuals need at least 5 grid points".into(),
            ));
        }
        let coords: Vec<f64> = xs
            .iter()
            .map(|&x| conformable_coordinate(order, anchor, x))
            .collect();
        let ys = y.ys().to_vec();
        let vs = stencil_derivative(&coords, &ys, 1);
        Ok(Self { xs, ys, vs, coords })
    }

    /// Conformable derivative of arbitrary values sampled on the same grid.
    pub fn alpha_derivative(&self, values: &[f64]) -> Vec<f64> {
        stencil_derivative(&self.coords, values, 1)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }
}

fn boundary_close(value: f64, target: f64) -> bool {
    (value - target).abs() <= 1e-8 * target.abs().max(1.0)
}

/// `∫_a^b L(x, y, y_a^(α)) d_a^α x` for a sampled trajectory.
///
/// The conformable derivative comes from local polynomial fits in the
/// conformable coordinate `s = (x−a)^α/α`, in which the weighted measure
/// becomes `ds`; each grid cell is then integrated exactly for the
/// interpolating polynomial.
pub fn action_value(
    p: &VariationalProblem,
    y: &GridFunction,
    q: &QuadratureSettings,
) -> Result<f64> {
    let (x0, y0) = y.first();
    let (x1, y1) = y.last();
    if x0 != p.a || x1 != p.b {
        return Err(Error::BoundaryMismatch(format!(
            "grid covers [{x0}, {x1}] but the problem is posed on [{}, {}]",
            p.a, p.b
        )));
    }
    if !boundary_close(y0, p.ya) || !boundary_close(y1, p.yb) {
        return Err(Error::BoundaryMismatch(format!(
            "y(a) = {y0}, y(b) = {y1}; expected {} and {}",
            p.ya, p.yb
        )));
    }
    let t = Trace::new(p.order, p.a, y)?;
    let integrand: Vec<f64> = (0..t.len())
        .map(|i| p.lagrangian.value(t.xs[i], t.ys[i], t.vs[i]))
        .collect();
    let g = GridFunction::new(t.xs.clone(), integrand, p.order, p.anchor())?;
    let alpha = p.order.alpha();
    let mut total = 0.0;
    for w in t.xs.windows(2) {
        let (s0, s1) = (
            conformable_coordinate(p.order, p.anchor(), w[0]),
            conformable_coordinate(p.order, p.anchor(), w[1]),
        );
        total += integrate(
            |s: f64| {
                // stay on this cell's interpolating stencil
                let x = p.a + (alpha * s.max(0.0)).powf(1.0 / alpha);
                g.interpolate(x.clamp(w[0], w[1]))
            },
            s0,
            s1,
            q,
        )?;
    }
    Ok(total)
}

/// Pointwise `∂L/∂y − d_a^α(∂L/∂v)` along `y`.
pub fn el_residual(p: &VariationalProblem, y: &GridFunction) -> Result<GridFunction> {
    let t = Trace::new(p.order, p.a, y)?;
    let l = &p.lagrangian;
    let mut mom = Vec::with_capacity(t.len());
    let mut ly = Vec::with_capacity(t.len());
    for i in 0..t.len() {
        mom.push(l.dv(t.xs[i], t.ys[i], t.vs[i])?);
        ly.push(l.dy(t.xs[i], t.ys[i], t.vs[i])?);
    }
    let dmom = t.alpha_derivative(&mom);
    let r = ly.iter().zip(&dmom).map(|(a, b)| a - b).collect();
    p.on_grid(&t.xs, r)
}

/// Pointwise `∂L/∂y − d/dx(∂L/∂y') − (x−a)^(α−1)·d_a^α((x−a)^(1−α)·∂L/∂v)`
/// along `y`, at the grid points strictly above `a`.
pub fn generalized_el_residual(
    p: &VariationalProblem<MixedLagrangian>,
    y: &GridFunction,
) -> Result<GridFunction> {
    let t = Trace::new(p.order, p.a, y)?;
    let yp = y.derivative();
    let l = &p.lagrangian;
    let n = t.len();
    let (mut ly, mut lyp, mut weighted) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let (x, yy, d1, v) = (t.xs[i], t.ys[i], yp[i], t.vs[i]);
        ly[i] = l.partial(MixedLagrangian::Y, x, yy, d1, v)?;
        lyp[i] = l.partial(MixedLagrangian::YP, x, yy, d1, v)?;
        weighted[i] = weight(p.order, x - p.a) * l.partial(MixedLagrangian::V, x, yy, d1, v)?;
    }
    let dlyp = stencil_derivative(&t.xs, &lyp, 1);
    let dweighted = t.alpha_derivative(&weighted);
    let start = usize::from(t.xs[0] == p.a);
    let xs = t.xs[start..].to_vec();
    let r = (start..n)
        .map(|i| ly[i] - dlyp[i] - dweighted[i] / weight(p.order, t.xs[i] - p.a))
        .collect();
    p.on_grid(&xs, r)
}

/// Pointwise `d_a^α(L − ∂L/∂v·v) − ∂L/∂x·(x−a)^(1−α)` along `y`.
pub fn dubois_reymond_residual(p: &VariationalProblem, y: &GridFunction) -> Result<GridFunction> {
    let t = Trace::new(p.order, p.a, y)?;
    let l = &p.lagrangian;
    let n = t.len();
    let (mut q, mut lx) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let (x, yy, v) = (t.xs[i], t.ys[i], t.vs[i]);
        q[i] = l.value(x, yy, v) - l.dv(x, yy, v)? * v;
        lx[i] = l.dx(x, yy, v)? * weight(p.order, x - p.a);
    }
    let dq = t.alpha_derivative(&q);
    let r = dq.iter().zip(&lx).map(|(a, b)| a - b).collect();
    p.on_grid(&t.xs, r)
}

/// `L − ∂L/∂v·v` along `y`; constant along extremals of autonomous problems.
pub fn energy_function(p: &VariationalProblem, y: &GridFunction) -> Result<GridFunction> {
    let t = Trace::new(p.order, p.a, y)?;
    let l = &p.lagrangian;
    let mut q = Vec::with_capacity(t.len());
    for i in 0..t.len() {
        let (x, yy, v) = (t.xs[i], t.ys[i], t.vs[i]);
        q.push(l.value(x, yy, v) - l.dv(x, yy, v)? * v);
    }
    p.on_grid(&t.xs, q)
}
