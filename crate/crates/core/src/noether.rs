//! Invariance of conformable action functionals under one-parameter
//! transformations `x̄ = x + ε τ(x, y)`, `ȳ = y + ε ξ(x, y)` up to a gauge
//! term `Λ(x, y)`, and the conservation laws that follow along extremals.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{weight, Order};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{conformable_coordinate, stencil_derivative, GridFunction};
use crate::variational::{Extremal, Lagrangian, Trace, VariationalProblem};
use crate::Anchor;

/// Probe parameters for [`probe_invariance`].
pub const PROBE_EPSILONS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// A first-order defect below this counts as zero.
const NEGLIGIBLE: f64 = 1e-12;

/// Field of two arguments `(x, y)` for a generator or gauge term.
pub fn generator(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> ScalarField {
    ScalarField::new(2, move |z| f(z[0], z[1]))
}

/// Generators `τ`, `ξ` and gauge `Λ`; an absent entry is identically zero.
///
/// Conformable derivatives of the generators along a trajectory use the
/// chain rule `g_x (x−a)^(1−α) + g_y y^(α)` when both partials of `g` are
/// supplied, and grid differentiation of `g(x, y(x))` otherwise.
#[derive(Debug, Clone, Default)]
pub struct TransformationFamily {
    pub tau: Option<ScalarField>,
    pub xi: Option<ScalarField>,
    pub gauge: Option<ScalarField>,
}

impl TransformationFamily {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn with_tau(mut self, tau: ScalarField) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_xi(mut self, xi: ScalarField) -> Self {
        self.xi = Some(xi);
        self
    }

    pub fn with_gauge(mut self, gauge: ScalarField) -> Self {
        self.gauge = Some(gauge);
        self
    }

    fn check(&self) -> Result<()> {
        for g in [&self.tau, &self.xi, &self.gauge].into_iter().flatten() {
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

/// Values and conformable derivatives of `τ`, `ξ`, `Λ` along a trajectory,
/// restricted to grid points strictly above the anchor.
pub(crate) struct Generators {
    pub t: Trace,
    pub tau: Vec<f64>,
    pub xi: Vec<f64>,
    pub dtau: Vec<f64>,
    pub dxi: Vec<f64>,
    pub dlambda: Vec<f64>,
    /// `(x−a)^(1−α)` at each point.
    pub w: Vec<f64>,
}

fn along(
    g: &Option<ScalarField>,
    t: &Trace,
    w: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = t.len();
    let Some(g) = g else {
        return Ok((vec![0.0; n], vec![0.0; n]));
    };
    let values: Vec<f64> = (0..n).map(|i| g.eval(&[t.xs[i], t.ys[i]])).collect();
    let derivs = if g.has_partial(0) && g.has_partial(1) {
        let mut d = Vec::with_capacity(n);
        for i in 0..n {
            let z = [t.xs[i], t.ys[i]];
            let gy = g.partial(1, &z)?;
            // skip the x-partial where the weight vanishes; it may be singular there
            let gx = if w[i] == 0.0 { 0.0 } else { g.partial(0, &z)? * w[i] };
            d.push(gx + gy * t.vs[i]);
        }
        d
    } else {
        t.alpha_derivative(&values)
    };
    Ok((values, derivs))
}

impl Generators {
    pub fn new(order: Order, a: f64, fam: &TransformationFamily, y: &GridFunction) -> Result<Self> {
        Self::build(order, a, fam, Trace::new(order, a, y)?)
    }

    /// Along an extremal, with the velocity integrated by the solver in
    /// place of the grid derivative of `y`.
    pub fn along_extremal(order: Order, a: f64, fam: &TransformationFamily, e: &Extremal) -> Result<Self> {
        let mut t = Trace::new(order, a, &e.y)?;
        if e.v.xs() == e.y.xs() {
            t.vs = e.v.ys().to_vec();
        }
        Self::build(order, a, fam, t)
    }

    fn build(order: Order, a: f64, fam: &TransformationFamily, t: Trace) -> Result<Self> {
        fam.check()?;
        let w: Vec<f64> = t.xs.iter().map(|&x| weight(order, x - a)).collect();
        let (tau, dtau) = along(&fam.tau, &t, &w)?;
        let (xi, dxi) = along(&fam.xi, &t, &w)?;
        let (_, dlambda) = along(&fam.gauge, &t, &w)?;
        Ok(Self {
            t,
            tau,
            xi,
            dtau,
            dxi,
            dlambda,
            w,
        })
    }

    /// Index of the first grid point strictly above the anchor.
    pub fn start(&self, a: f64) -> usize {
        self.t.xs.iter().position(|&x| x > a).unwrap_or(self.t.len())
    }
}

/// `∫ |L(x̄, ȳ, dȳ/dx̄)·dx̄/dx − L(x, y, v) − ε d_a^α Λ| d_a^α x` over the
/// grid of `y`, with the integral taken by the trapezoidal rule in the
/// conformable coordinate.
pub fn invariance_defect(
    p: &VariationalProblem,
    fam: &TransformationFamily,
    y: &GridFunction,
    eps: f64,
) -> Result<f64> {
    let g = Generators::new(p.order, p.a, fam, y)?;
    let l = &p.lagrangian;
    let t = &g.t;
    let start = g.start(p.a);
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(t.len() - start);
    for i in start..t.len() {
        let (x, yy, v) = (t.xs[i], t.ys[i], t.vs[i]);
        let xbar = x + eps * g.tau[i];
        if !(xbar >= p.a) {
            return Err(Error::Domain(format!(
                "transformed abscissa {xbar} falls below the anchor {} at x = {x}",
                p.a
            )));
        }
        let ybar = yy + eps * g.xi[i];
        let stretch = g.w[i] + eps * g.dtau[i];
        let vbar = (v + eps * g.dxi[i]) * (weight(p.order, xbar - p.a) / stretch);
        let jac = 1.0 + eps * g.dtau[i] / g.w[i];
        let integrand = l.value(xbar, ybar, vbar) * jac - l.value(x, yy, v) - eps * g.dlambda[i];
        if !integrand.is_finite() {
            return Err(Error::NonFinite(format!("invariance defect at x = {x}")));
        }
        pts.push((t.coords[i], integrand.abs()));
    }
    if start > 0 && !pts.is_empty() {
        // the integrand is not defined at the anchor; extend it as a constant
        pts.insert(0, (t.coords[start - 1], pts[0].1));
    }
    Ok(pts
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// First-order defect `D(ε)/ε` at the smallest probe.
    pub residual_max: f64,
    pub epsilon_sequence: Vec<f64>,
    /// `D(ε)/ε` for each probe.
    pub first_order_slopes: Vec<f64>,
    /// Least-squares slope of `log D` against `log ε`; absent when a defect
    /// vanishes exactly.
    pub loglog_slope: Option<f64>,
}

impl InvarianceReport {
    /// `D(ε) = o(ε)`: the first-order slopes fall at least fivefold per
    /// decade of `ε`, or are negligible throughout.
    pub fn is_invariant(&self) -> bool {
        if self.first_order_slopes.iter().all(|&s| s <= NEGLIGIBLE) {
            return true;
        }
        self.first_order_slopes
            .windows(2)
            .zip(self.epsilon_sequence.windows(2))
            .all(|(s, e)| {
                let decades = (e[0] / e[1]).log10();
                s[1] <= NEGLIGIBLE || s[0] / s[1] >= 5f64.powf(decades)
            })
    }
}

fn loglog_slope(eps: &[f64], d: &[f64]) -> Option<f64> {
    if d.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = d.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

/// Evaluates the invariance defect over [`PROBE_EPSILONS`].
pub fn probe_invariance(
    p: &VariationalProblem,
    fam: &TransformationFamily,
    y: &GridFunction,
) -> Result<InvarianceReport> {
    let eps = PROBE_EPSILONS.to_vec();
    let defects = eps
        .iter()
        .map(|&e| invariance_defect(p, fam, y, e))
        .collect::<Result<Vec<_>>>()?;
    let slopes: Vec<f64> = defects.iter().zip(&eps).map(|(d, e)| d / e).collect();
    Ok(InvarianceReport {
        residual_max: slopes[slopes.len() - 1],
        loglog_slope: loglog_slope(&eps, &defects),
        epsilon_sequence: eps,
        first_order_slopes: slopes,
    })
}

/// Pointwise left side minus right side of the necessary condition of
/// invariance,
/// `L_x τ + L_y ξ + L_v [ξ^(α) − v((α−1)τ/(x−a) + τ^(α)/(x−a)^(1−α))]
///  + L τ^(α)/(x−a)^(1−α) − d_a^α Λ`,
/// at the grid points strictly above `a`.
pub fn invariance_condition_residual(
    p: &VariationalProblem,
    fam: &TransformationFamily,
    y: &GridFunction,
) -> Result<GridFunction> {
    let g = Generators::new(p.order, p.a, fam, y)?;
    let alpha = p.order.alpha();
    let l = &p.lagrangian;
    let t = &g.t;
    let start = g.start(p.a);
    let mut r = Vec::with_capacity(t.len() - start);
    for i in start..t.len() {
        let (x, yy, v) = (t.xs[i], t.ys[i], t.vs[i]);
        let ratio = g.dtau[i] / g.w[i];
        let bracket = g.dxi[i] - v * ((alpha - 1.0) * g.tau[i] / (x - p.a) + ratio);
        r.push(
            l.dx(x, yy, v)? * g.tau[i]
                + l.dy(x, yy, v)? * g.xi[i]
                + l.dv(x, yy, v)? * bracket
                + l.value(x, yy, v) * ratio
                - g.dlambda[i],
        );
    }
    p.on_grid(&t.xs[start..], r)
}

/// Source terms `(1−α)L_v[ξ(x−a)^(1−2α) − vτ/(x−a)^α] + d_a^α Λ·(x−a)^(1−α)`
/// of the balance law, zero at the anchor itself.
fn balance_source(p: &VariationalProblem, g: &Generators) -> Result<Vec<f64>> {
    let alpha = p.order.alpha();
    let l = &p.lagrangian;
    let t = &g.t;
    let mut src = vec![0.0; t.len()];
    for i in g.start(p.a)..t.len() {
        let (x, yy, v) = (t.xs[i], t.ys[i], t.vs[i]);
        let d = x - p.a;
        let mut s = g.dlambda[i] * g.w[i];
        if alpha != 1.0 {
            let lv = l.dv(x, yy, v)?;
            s += (1.0 - alpha) * lv * (g.xi[i] * d.powf(1.0 - 2.0 * alpha) - v * g.tau[i] / d.powf(alpha));
        }
        src[i] = s;
    }
    Ok(src)
}

/// Pointwise `d_a^α[(L − L_v v)τ + L_v ξ (x−a)^(1−α)]` minus its source
/// terms, along a certified extremal, at the grid points strictly above `a`.
///
/// The left side is expanded by the product rule, with
/// `d_a^α (x−a)^(1−α) = (1−α)(x−a)^(1−2α)`, so that only `L − L_v v` and
/// `L_v` are differentiated on the grid; the factors carrying powers of
/// `x − a` are generally not smooth in the conformable coordinate.
pub fn noether_balance_residual(
    p: &VariationalProblem,
    fam: &TransformationFamily,
    e: &Extremal,
) -> Result<GridFunction> {
    e.check(p)?;
    let g = Generators::along_extremal(p.order, p.a, fam, e)?;
    let alpha = p.order.alpha();
    let l = &p.lagrangian;
    let t = &g.t;
    let n = t.len();
    let (mut energy, mut mom) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let (x, yy, v) = (t.xs[i], t.ys[i], t.vs[i]);
        mom[i] = l.dv(x, yy, v)?;
        energy[i] = l.value(x, yy, v) - mom[i] * v;
    }
    let denergy = t.alpha_derivative(&energy);
    let dmom = t.alpha_derivative(&mom);
    let src = balance_source(p, &g)?;
    let start = g.start(p.a);
    let r = (start..n)
        .map(|i| {
            let mut lhs = denergy[i] * g.tau[i]
                + energy[i] * g.dtau[i]
                + (dmom[i] * g.xi[i] + mom[i] * g.dxi[i]) * g.w[i];
            if alpha != 1.0 {
                let d = t.xs[i] - p.a;
                lhs += (1.0 - alpha) * mom[i] * g.xi[i] * d.powf(1.0 - 2.0 * alpha);
            }
            lhs - src[i]
        })
        .collect();
    p.on_grid(&t.xs[start..], r)
}

pub type QuantityFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// A function `C(x, y, v)` expected to be constant along extremals.
#[derive(Clone)]
pub struct ConservedQuantity {
    pub c: QuantityFn,
    pub description: String,
}

impl fmt::Debug for ConservedQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConservedQuantity")
            .field("description", &self.description)
            .finish()
    }
}

impl ConservedQuantity {
    pub fn new(description: impl Into<String>, c: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            c: Arc::new(c),
            description: description.into(),
        }
    }

    pub fn eval(&self, x: f64, y: f64, v: f64) -> f64 {
        (self.c)(x, y, v)
    }
}

fn field_or_zero(g: &Option<ScalarField>) -> impl Fn(f64, f64) -> f64 + Send + Sync + 'static {
    let g = g.clone();
    move |x, y| g.as_ref().map_or(0.0, |g| g.eval(&[x, y]))
}

/// `(L − L_v v)τ + L_v ξ (x−a)^(1−α) − f`, after checking along the extremal
/// `e` that `d_a^α f` equals the source terms of the balance law to within
/// ten times the extremal's residual tolerance.
pub fn conserved_quantity_with_force(
    p: &VariationalProblem,
    fam: &TransformationFamily,
    f: ScalarField,
    e: &Extremal,
) -> Result<ConservedQuantity> {
    if f.arity() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: f.arity(),
        });
    }
    e.check(p)?;
    let g = Generators::along_extremal(p.order, p.a, fam, e)?;
    let src = balance_source(p, &g)?;
    let t = &g.t;
    let fv: Vec<f64> = (0..t.len()).map(|i| f.eval(&[t.xs[i], t.ys[i], t.vs[i]])).collect();
    let df = t.alpha_derivative(&fv);
    let tol = 10.0 * e.residual_tol;
    for i in g.start(p.a)..t.len() {
        let gap = df[i] - src[i];
        if !(gap.abs() <= tol * src[i].abs().max(1.0)) {
            return Err(Error::ForceEquationViolated(format!(
                "d^alpha f - source = {gap:e} at x = {}",
                t.xs[i]
            )));
        }
    }
    let (a, order) = (p.a, p.order);
    let l: Lagrangian = p.lagrangian.clone();
    let tau = field_or_zero(&fam.tau);
    let xi = field_or_zero(&fam.xi);
    Ok(ConservedQuantity::new(
        "(L - L_v v) tau + L_v xi (x-a)^(1-alpha) - f",
        move |x, y, v| {
            let lv = l.dv(x, y, v).unwrap_or(f64::NAN);
            (l.value(x, y, v) - lv * v) * tau(x, y) + lv * xi(x, y) * weight(order, x - a)
                - f.eval(&[x, y, v])
        },
    ))
}

/// `L_v ξ − Λ` for a family without a time generator.
pub fn time_invariant_charge(p: &VariationalProblem, fam: &TransformationFamily) -> Result<ConservedQuantity> {
    fam.check()?;
    if fam.tau.is_some() {
        return Err(Error::HypothesisViolated(
            "the charge L_v xi - Lambda needs tau identically zero".into(),
        ));
    }
    let l = p.lagrangian.clone();
    let xi = field_or_zero(&fam.xi);
    let gauge = field_or_zero(&fam.gauge);
    Ok(ConservedQuantity::new("L_v xi - Lambda", move |x, y, v| {
        l.dv(x, y, v).unwrap_or(f64::NAN) * xi(x, y) - gauge(x, y)
    }))
}

/// `max |C(x) − C(x₀)| / (1 + |C(x₀)|)` over the grid, with `x₀` the first
/// grid point after the left end; infinite if `C` is not finite somewhere.
pub fn drift(c: &ConservedQuantity, y: &GridFunction, order: Order, a: f64) -> f64 {
    let xs = y.xs();
    if xs.len() < 2 {
        return 0.0;
    }
    let coords: Vec<f64> = xs
        .iter()
        .map(|&x| conformable_coordinate(order, Anchor::left(a), x))
        .collect();
    let vs = stencil_derivative(&coords, y.ys(), 1);
    let values: Vec<f64> = (1..xs.len()).map(|i| c.eval(xs[i], y.ys()[i], vs[i])).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let c0 = values[0];
    values.iter().fold(0.0f64, |m, &v| m.max((v - c0).abs())) / (1.0 + c0.abs())
}
