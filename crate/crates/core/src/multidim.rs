//! Two-variable conformable calculus on rectangles: partial α-derivatives,
//! double integrals, Green's theorem, the 2-D Euler–Lagrange residual and
//! the 2-D invariance condition.
//!
//! Each axis is anchored at the lower edge of the rectangle: `a` for `x1`
//! and `c` for `x2`.

use std::fmt;
use std::sync::Arc;

use crate::calculus::{anchor_limit, weight, weighted_integral, Anchor, Order};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::quadrature::QuadratureSettings;

/// Points per axis of the residual probe lattice.
pub const PROBE_POINTS: usize = 33;

/// Tolerance for the vanishing of `h` on the boundary in [`parts2d_residual`].
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X1, Axis::X2];

    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
        }
    }

    fn pick(self, x1: f64, x2: f64) -> f64 {
        match self {
            Axis::X1 => x1,
            Axis::X2 => x2,
        }
    }

    /// `(x1, x2)` with the coordinate on this axis replaced by `u`.
    fn place(self, x1: f64, x2: f64, u: f64) -> (f64, f64) {
        match self {
            Axis::X1 => (u, x2),
            Axis::X2 => (x1, u),
        }
    }
}

/// The rectangle `[a, b] × [c, d]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Rectangle {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let finite = [a, b, c, d].iter().all(|v| v.is_finite());
        if !finite || !(a < b) || !(c < d) {
            return Err(Error::Domain(format!(
                "rectangle needs a < b and c < d, got [{a}, {b}] × [{c}, {d}]"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn unit() -> Self {
        Self {
            a: 0.0,
            b: 1.0,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Lower edge on `axis`, where the α-derivatives are anchored.
    pub fn anchor(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X1 => self.a,
            Axis::X2 => self.c,
        }
    }

    pub fn upper(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X1 => self.b,
            Axis::X2 => self.d,
        }
    }

    pub fn span(&self, axis: Axis) -> f64 {
        self.upper(axis) - self.anchor(axis)
    }
}

/// Probe lattice of `n × n` points clustered toward the anchored edges:
/// `t_j = 1 − cos(π(j + ½)/(2n))` on each axis.
pub fn probe_lattice(r: &Rectangle, n: usize) -> Vec<(f64, f64)> {
    let ts: Vec<f64> = (0..n)
        .map(|j| 1.0 - (std::f64::consts::PI * (j as f64 + 0.5) / (2.0 * n as f64)).cos())
        .collect();
    let mut out = Vec::with_capacity(n * n);
    for &t1 in &ts {
        for &t2 in &ts {
            out.push((r.a + t1 * (r.b - r.a), r.c + t2 * (r.d - r.c)));
        }
    }
    out
}

/// Real function of `(x1, x2)` with optional classical partials.
#[derive(Clone)]
pub struct Field2D(ScalarField);

impl fmt::Debug for Field2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field2D")
            .field("d1", &self.0.has_partial(0))
            .field("d2", &self.0.has_partial(1))
            .finish()
    }
}

impl Field2D {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(ScalarField::new(2, move |z| f(z[0], z[1])))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _| c)
            .with_partial(Axis::X1, |_, _| 0.0)
            .with_partial(Axis::X2, |_, _| 0.0)
    }

    /// Attaches the classical partial derivative along `axis`.
    pub fn with_partial(
        self,
        axis: Axis,
        d: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self(self.0.with_partial(axis.index(), move |z| d(z[0], z[1])))
    }

    #[inline]
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.0.eval(&[x1, x2])
    }

    pub fn has_partial(&self, axis: Axis) -> bool {
        self.0.has_partial(axis.index())
    }

    /// Supplied classical partial along `axis`, validated on first use.
    pub fn classical_partial(&self, axis: Axis, x1: f64, x2: f64) -> Result<Option<f64>> {
        if !self.has_partial(axis) {
            return Ok(None);
        }
        self.0.partial(axis.index(), &[x1, x2]).map(Some)
    }
}

/// Derivative of `f` at `x` by Ridders' extrapolation of central
/// differences, starting from step `h`.
fn ridders(f: &dyn Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    const NTAB: usize = 10;
    const SAFE: f64 = 2.0;
    let mut table = [[0.0_f64; NTAB]; NTAB];
    let mut hh = h;
    table[0][0] = (f(x + hh)? - f(x - hh)?) / (2.0 * hh);
    let mut best = table[0][0];
    let mut err = f64::INFINITY;
    for i in 1..NTAB {
        hh /= CON;
        table[0][i] = (f(x + hh)? - f(x - hh)?) / (2.0 * hh);
        let mut fac = CON2;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = table[j][i];
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= SAFE * err {
            break;
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::NonFinite(format!("derivative diverges at {x}")))
    }
}

/// Left α-derivative at `x` of a one-variable slice anchored at `anchor`.
/// `span` is the length of the axis and bounds the differencing step.
fn alpha_slope(
    eval: &dyn Fn(f64) -> Result<f64>,
    order: Order,
    anchor: f64,
    x: f64,
    span: f64,
) -> Result<f64> {
    let dist = x - anchor;
    if !(dist >= 0.0) {
        return Err(Error::Domain(format!(
            "x = {x} lies below the anchor {anchor}"
        )));
    }
    let interior = |u: f64, dist: f64| {
        let h = (0.5 * dist).min(0.05 * span);
        Ok(weight(order, dist) * ridders(eval, u, h)?)
    };
    if dist == 0.0 {
        return anchor_limit(&interior, order, Anchor::left(anchor), span);
    }
    interior(x, dist)
}

fn finite(v: f64, what: &str, x1: f64, x2: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("{what} at ({x1}, {x2})")))
    }
}

/// Partial α-derivative of `f` along `axis`, anchored at `anchor`, holding
/// the other coordinate fixed. Uses the supplied classical partial times
/// `(x − anchor)^(1−α)` when there is one.
pub fn partial_alpha(
    f: &Field2D,
    axis: Axis,
    order: Order,
    anchor: f64,
    x1: f64,
    x2: f64,
) -> Result<f64> {
    let x = axis.pick(x1, x2);
    let dist = x - anchor;
    if !(dist >= 0.0) {
        return Err(Error::Domain(format!(
            "coordinate {x} on {axis:?} lies below the anchor {anchor}"
        )));
    }
    if f.has_partial(axis) {
        let supplied = |u: f64, dist: f64| {
            let (p, q) = axis.place(x1, x2, u);
            let d = f.classical_partial(axis, p, q)?.unwrap_or(0.0);
            finite(weight(order, dist) * d, "partial α-derivative", p, q)
        };
        if dist > 0.0 {
            return supplied(x, dist);
        }
        return anchor_limit(&supplied, order, Anchor::left(anchor), 1.0);
    }
    let slice = |u: f64| {
        let (p, q) = axis.place(x1, x2, u);
        Ok(f.eval(p, q))
    };
    alpha_slope(&slice, order, anchor, x, dist.max(1.0))
}

fn rect_partial(f: &Field2D, axis: Axis, order: Order, r: &Rectangle, x1: f64, x2: f64) -> Result<f64> {
    partial_alpha(f, axis, order, r.anchor(axis), x1, x2)
}

/// `∫∫ eval · (x1−a)^(α−1)(x2−c)^(α−1)`, integrating over `outer` last.
fn iterated(
    eval: &dyn Fn(f64, f64) -> Result<f64>,
    r: &Rectangle,
    order: Order,
    q: &QuadratureSettings,
    outer: Axis,
) -> Result<f64> {
    q.validate()?;
    let inner_q = QuadratureSettings {
        abs_tol: 0.1 * q.abs_tol,
        ..*q
    };
    let inner = match outer {
        Axis::X1 => Axis::X2,
        Axis::X2 => Axis::X1,
    };
    let line = |u: f64| {
        weighted_integral(
            &|w: f64| {
                let (x1, x2) = outer.place(0.0, 0.0, u);
                let (x1, x2) = inner.place(x1, x2, w);
                eval(x1, x2)
            },
            order,
            Anchor::left(r.anchor(inner)),
            r.upper(inner),
            &inner_q,
        )
    };
    weighted_integral(&line, order, Anchor::left(r.anchor(outer)), r.upper(outer), q)
}

/// Double conformable integral of `f` over `r`, with weights
/// `(x1−a)^(α−1)(x2−c)^(α−1)`, integrating over `x2` first.
pub fn double_integral(
    f: &Field2D,
    r: &Rectangle,
    order: Order,
    q: &QuadratureSettings,
) -> Result<f64> {
    double_integral_with(f, r, order, q, Axis::X1)
}

/// [`double_integral`] with the outer integration variable chosen.
pub fn double_integral_with(
    f: &Field2D,
    r: &Rectangle,
    order: Order,
    q: &QuadratureSettings,
    outer: Axis,
) -> Result<f64> {
    iterated(&|x1, x2| Ok(f.eval(x1, x2)), r, order, q, outer)
}

/// The two sides of Green's theorem on a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenSides {
    /// `∫(f(x1,c) − f(x1,d)) d^α x1 + ∫(g(b,x2) − g(a,x2)) d^α x2`
    pub boundary: f64,
    /// `∫∫(∂1^α g − ∂2^α f) d^α x1 d^α x2`
    pub area: f64,
}

impl GreenSides {
    pub fn residual(&self) -> f64 {
        (self.boundary - self.area).abs()
    }
}

pub fn green_sides(
    f: &Field2D,
    g: &Field2D,
    r: &Rectangle,
    order: Order,
    q: &QuadratureSettings,
) -> Result<GreenSides> {
    q.validate()?;
    let bottom_top = weighted_integral(
        &|x1| Ok(f.eval(x1, r.c) - f.eval(x1, r.d)),
        order,
        Anchor::left(r.a),
        r.b,
        q,
    )?;
    let right_left = weighted_integral(
        &|x2| Ok(g.eval(r.b, x2) - g.eval(r.a, x2)),
        order,
        Anchor::left(r.c),
        r.d,
        q,
    )?;
    let area = iterated(
        &|x1, x2| {
            Ok(rect_partial(g, Axis::X1, order, r, x1, x2)?
                - rect_partial(f, Axis::X2, order, r, x1, x2)?)
        },
        r,
        order,
        q,
        Axis::X1,
    )?;
    Ok(GreenSides {
        boundary: bottom_top + right_left,
        area,
    })
}

/// `|boundary − area|` for Green's theorem with the pair `(f, g)`.
pub fn green_residual(
    f: &Field2D,
    g: &Field2D,
    r: &Rectangle,
    order: Order,
    q: &QuadratureSettings,
) -> Result<f64> {
    Ok(green_sides(f, g, r, order, q)?.residual())
}

fn check_vanishes_on_boundary(h: &Field2D, r: &Rectangle) -> Result<()> {
    let n = PROBE_POINTS;
    for j in 0..n {
        let t = j as f64 / (n - 1) as f64;
        let x1 = r.a + t * (r.b - r.a);
        let x2 = r.c + t * (r.d - r.c);
        for (p, q) in [(x1, r.c), (x1, r.d), (r.a, x2), (r.b, x2)] {
            let v = h.eval(p, q);
            if !(v.abs() <= BOUNDARY_TOL) {
                return Err(Error::BoundaryConditionViolated(format!(
                    "h({p}, {q}) = {v} on the boundary"
                )));
            }
        }
    }
    Ok(())
}

/// Integration by parts on a rectangle for `h` vanishing on the boundary:
/// `|∫∫(G ∂1^α h − F ∂2^α h) + ∫∫(∂1^α G − ∂2^α F) h|`.
pub fn parts2d_residual(
    big_f: &Field2D,
    big_g: &Field2D,
    h: &Field2D,
    r: &Rectangle,
    order: Order,
    q: &QuadratureSettings,
) -> Result<f64> {
    check_vanishes_on_boundary(h, r)?;
    let lhs = iterated(
        &|x1, x2| {
            Ok(big_g.eval(x1, x2) * rect_partial(h, Axis::X1, order, r, x1, x2)?
                - big_f.eval(x1, x2) * rect_partial(h, Axis::X2, order, r, x1, x2)?)
        },
        r,
        order,
        q,
        Axis::X1,
    )?;
    let rhs = iterated(
        &|x1, x2| {
            Ok((rect_partial(big_g, Axis::X1, order, r, x1, x2)?
                - rect_partial(big_f, Axis::X2, order, r, x1, x2)?)
                * h.eval(x1, x2))
        },
        r,
        order,
        q,
        Axis::X1,
    )?;
    Ok((lhs + rhs).abs())
}

/// Argument slot of a [`Lagrangian2D`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot2D {
    X(Axis),
    /// Component `y_k`, `k` counted from 0.
    Y(usize),
    /// α-partial of `y_k` along the axis.
    V(usize, Axis),
}

impl Slot2D {
    fn index(self, m: usize) -> usize {
        match self {
            Slot2D::X(i) => i.index(),
            Slot2D::Y(k) => 2 + k,
            Slot2D::V(k, i) => 2 + m + 2 * k + i.index(),
        }
    }
}

/// Lagrangian `L(x1, x2, y_1..y_m, v_{1,1}, v_{1,2}, …, v_{m,1}, v_{m,2})`.
///
/// The evaluator receives the arguments as one slice in that order.
#[derive(Debug, Clone)]
pub struct Lagrangian2D {
    m: usize,
    field: ScalarField,
}

impl Lagrangian2D {
    pub fn new(m: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument(
                "a Lagrangian needs at least one dependent variable".into(),
            ));
        }
        Ok(Self {
            m,
            field: ScalarField::new(2 + 3 * m, f),
        })
    }

    pub fn with_partial(
        self,
        slot: Slot2D,
        d: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let k = match slot {
            Slot2D::Y(k) | Slot2D::V(k, _) => Some(k),
            Slot2D::X(_) => None,
        };
        if k.is_some_and(|k| k >= self.m) {
            return Err(Error::InvalidArgument(format!(
                "slot {slot:?} out of range for {} components",
                self.m
            )));
        }
        let i = slot.index(self.m);
        Ok(Self {
            m: self.m,
            field: self.field.with_partial(i, d),
        })
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn arity(&self) -> usize {
        2 + 3 * self.m
    }

    pub fn value(&self, args: &[f64]) -> f64 {
        self.field.eval(args)
    }

    pub fn partial(&self, slot: Slot2D, args: &[f64]) -> Result<f64> {
        self.field.partial(slot.index(self.m), args)
    }
}

fn check_components(l: &Lagrangian2D, ys: &[Field2D]) -> Result<()> {
    if ys.len() != l.m {
        return Err(Error::DimensionMismatch {
            expected: l.m,
            got: ys.len(),
        });
    }
    Ok(())
}

/// Lagrangian arguments along `y` at `(x1, x2)`.
fn arguments(
    m: usize,
    ys: &[Field2D],
    r: &Rectangle,
    order: Order,
    x1: f64,
    x2: f64,
) -> Result<Vec<f64>> {
    let mut args = vec![0.0; 2 + 3 * m];
    args[0] = x1;
    args[1] = x2;
    for (k, y) in ys.iter().enumerate() {
        args[Slot2D::Y(k).index(m)] = y.eval(x1, x2);
        for axis in Axis::BOTH {
            args[Slot2D::V(k, axis).index(m)] = rect_partial(y, axis, order, r, x1, x2)?;
        }
    }
    Ok(args)
}

pub type Evaluator2D = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;

/// A pointwise residual together with its largest magnitude on the probe
/// lattice.
#[derive(Clone)]
pub struct ResidualField2D {
    pub eval: Evaluator2D,
    pub max_abs: f64,
    pub argmax: (f64, f64),
}

impl fmt::Debug for ResidualField2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResidualField2D")
            .field("max_abs", &self.max_abs)
            .field("argmax", &self.argmax)
            .finish()
    }
}

impl ResidualField2D {
    fn probe(eval: Evaluator2D, r: &Rectangle) -> Result<Self> {
        let mut max_abs = 0.0;
        let mut argmax = (r.a, r.c);
        for (x1, x2) in probe_lattice(r, PROBE_POINTS) {
            let v = eval(x1, x2)?.abs();
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("residual at ({x1}, {x2})")));
            }
            if v > max_abs {
                max_abs = v;
                argmax = (x1, x2);
            }
        }
        Ok(Self {
            eval,
            max_abs,
            argmax,
        })
    }
}

/// Euler–Lagrange residuals
/// `∂L/∂y_k − ∂1^α(∂L/∂v_{k,1}) − ∂2^α(∂L/∂v_{k,2})` along `ys`, one per
/// component.
pub fn el2d_residual(
    l: &Lagrangian2D,
    ys: &[Field2D],
    r: &Rectangle,
    order: Order,
) -> Result<Vec<ResidualField2D>> {
    check_components(l, ys)?;
    let mut out = Vec::with_capacity(l.m);
    for k in 0..l.m {
        let (l, ys, rect) = (l.clone(), ys.to_vec(), *r);
        let eval: Evaluator2D = Arc::new(move |x1, x2| {
            let args = arguments(l.m, &ys, &rect, order, x1, x2)?;
            let mut e = l.partial(Slot2D::Y(k), &args)?;
            for axis in Axis::BOTH {
                let momentum = |u: f64| {
                    let (p, q) = axis.place(x1, x2, u);
                    let args = arguments(l.m, &ys, &rect, order, p, q)?;
                    l.partial(Slot2D::V(k, axis), &args)
                };
                e -= alpha_slope(&momentum, order, rect.anchor(axis), axis.pick(x1, x2), rect.span(axis))?;
            }
            finite(e, "Euler–Lagrange residual", x1, x2)
        });
        out.push(ResidualField2D::probe(eval, r)?);
    }
    Ok(out)
}

/// Infinitesimal transformation `x̄_i = x_i + ε τ_i`, `ȳ_k = y_k + ε ξ_k`
/// with gauge `Λ`. Every generator is a field of `(x1, x2, y_1..y_m)`;
/// absent generators are zero.
#[derive(Debug, Clone)]
pub struct TransformationFamily2D {
    m: usize,
    pub tau: [Option<ScalarField>; 2],
    pub xi: Vec<Option<ScalarField>>,
    pub gauge: Option<ScalarField>,
}

impl TransformationFamily2D {
    pub fn identity(m: usize) -> Self {
        Self {
            m,
            tau: [None, None],
            xi: vec![None; m],
            gauge: None,
        }
    }

    fn check(&self, g: &ScalarField) -> Result<()> {
        if g.arity() != 2 + self.m {
            return Err(Error::DimensionMismatch {
                expected: 2 + self.m,
                got: g.arity(),
            });
        }
        Ok(())
    }

    pub fn with_tau(mut self, axis: Axis, g: ScalarField) -> Result<Self> {
        self.check(&g)?;
        self.tau[axis.index()] = Some(g);
        Ok(self)
    }

    pub fn with_xi(mut self, k: usize, g: ScalarField) -> Result<Self> {
        self.check(&g)?;
        if k >= self.m {
            return Err(Error::InvalidArgument(format!(
                "component {k} out of range for {} components",
                self.m
            )));
        }
        self.xi[k] = Some(g);
        Ok(self)
    }

    pub fn with_gauge(mut self, g: ScalarField) -> Result<Self> {
        self.check(&g)?;
        self.gauge = Some(g);
        Ok(self)
    }

    pub fn components(&self) -> usize {
        self.m
    }
}

/// Generator `g(x, y(x))` and its α-partials along `ys`.
struct Along<'a> {
    ys: &'a [Field2D],
    r: &'a Rectangle,
    order: Order,
}

impl Along<'_> {
    fn point(&self, x1: f64, x2: f64) -> Vec<f64> {
        let mut z = vec![x1, x2];
        z.extend(self.ys.iter().map(|y| y.eval(x1, x2)));
        z
    }

    fn value(&self, g: &ScalarField, x1: f64, x2: f64) -> f64 {
        g.eval(&self.point(x1, x2))
    }

    /// α-partial of `x ↦ g(x, y(x))` along `axis`: chain rule when every
    /// partial involved is supplied, differencing otherwise.
    fn partial(&self, g: &ScalarField, axis: Axis, x1: f64, x2: f64) -> Result<f64> {
        let x = axis.pick(x1, x2);
        let dist = x - self.r.anchor(axis);
        let chain = dist > 0.0
            && g.has_partial(axis.index())
            && (0..self.ys.len()).all(|k| g.has_partial(2 + k) && self.ys[k].has_partial(axis));
        if chain {
            let z = self.point(x1, x2);
            let mut d = g.partial(axis.index(), &z)?;
            for (k, y) in self.ys.iter().enumerate() {
                let dy = y.classical_partial(axis, x1, x2)?.unwrap_or(0.0);
                d += g.partial(2 + k, &z)? * dy;
            }
            return finite(weight(self.order, dist) * d, "generator α-partial", x1, x2);
        }
        let slice = |u: f64| {
            let (p, q) = axis.place(x1, x2, u);
            Ok(self.value(g, p, q))
        };
        alpha_slope(&slice, self.order, self.r.anchor(axis), x, self.r.span(axis))
    }
}

/// Pointwise `LHS − RHS` of the invariance condition at `(x1, x2)`.
fn invariance_point(
    l: &Lagrangian2D,
    fam: &TransformationFamily2D,
    ys: &[Field2D],
    r: &Rectangle,
    order: Order,
    x1: f64,
    x2: f64,
) -> Result<f64> {
    let m = l.m;
    let alpha = order.alpha();
    let along = Along { ys, r, order };
    let args = arguments(m, ys, r, order, x1, x2)?;
    let mut lhs = 0.0;
    // d/dε of the α-Jacobian determinant at ε = 0
    let mut det_rate = 0.0;
    for axis in Axis::BOTH {
        let Some(tau) = &fam.tau[axis.index()] else { continue };
        let dist = axis.pick(x1, x2) - r.anchor(axis);
        let t = along.value(tau, x1, x2);
        let stretch = along.partial(tau, axis, x1, x2)? / weight(order, dist);
        lhs += l.partial(Slot2D::X(axis), &args)? * t;
        let rescale = (alpha - 1.0) * t / dist + stretch;
        for k in 0..m {
            let v = args[Slot2D::V(k, axis).index(m)];
            lhs -= l.partial(Slot2D::V(k, axis), &args)? * v * rescale;
        }
        det_rate += stretch;
    }
    lhs += l.value(&args) * det_rate;
    for (k, xi) in fam.xi.iter().enumerate() {
        let Some(xi) = xi else { continue };
        lhs += l.partial(Slot2D::Y(k), &args)? * along.value(xi, x1, x2);
        for axis in Axis::BOTH {
            lhs += l.partial(Slot2D::V(k, axis), &args)? * along.partial(xi, axis, x1, x2)?;
        }
    }
    let mut rhs = 0.0;
    if let Some(gauge) = &fam.gauge {
        for axis in Axis::BOTH {
            rhs += along.partial(gauge, axis, x1, x2)?;
        }
    }
    finite(lhs - rhs, "invariance condition", x1, x2)
}

fn check_family(l: &Lagrangian2D, fam: &TransformationFamily2D, ys: &[Field2D]) -> Result<()> {
    check_components(l, ys)?;
    if fam.m != l.m {
        return Err(Error::DimensionMismatch {
            expected: l.m,
            got: fam.m,
        });
    }
    Ok(())
}

/// Largest `|LHS − RHS|` over the probe lattice of the necessary condition
/// for invariance of the 2-D functional under `fam`, the right side being
/// `∂1^α Λ + ∂2^α Λ` along `ys`.
pub fn invariance2d_residual(
    l: &Lagrangian2D,
    fam: &TransformationFamily2D,
    ys: &[Field2D],
    r: &Rectangle,
    order: Order,
) -> Result<f64> {
    check_family(l, fam, ys)?;
    let mut worst: f64 = 0.0;
    for (x1, x2) in probe_lattice(r, PROBE_POINTS) {
        worst = worst.max(invariance_point(l, fam, ys, r, order, x1, x2)?.abs());
    }
    Ok(worst)
}

/// The invariance condition for families without `τ` and without gauge:
/// largest `|Σ_k ∂L/∂y_k ξ_k + Σ_k Σ_i ∂L/∂v_{k,i} ∂i^α ξ_k|` over the probe
/// lattice.
pub fn time_invariant_residual2d(
    l: &Lagrangian2D,
    fam: &TransformationFamily2D,
    ys: &[Field2D],
    r: &Rectangle,
    order: Order,
) -> Result<f64> {
    check_family(l, fam, ys)?;
    if fam.tau.iter().any(Option::is_some) || fam.gauge.is_some() {
        return Err(Error::HypothesisViolated(
            "the family moves the independent variables or carries a gauge term".into(),
        ));
    }
    let along = Along { ys, r, order };
    let mut worst: f64 = 0.0;
    for (x1, x2) in probe_lattice(r, PROBE_POINTS) {
        let args = arguments(l.m, ys, r, order, x1, x2)?;
        let mut s = 0.0;
        for (k, xi) in fam.xi.iter().enumerate() {
            let Some(xi) = xi else { continue };
            s += l.partial(Slot2D::Y(k), &args)? * along.value(xi, x1, x2);
            for axis in Axis::BOTH {
                s += l.partial(Slot2D::V(k, axis), &args)? * along.partial(xi, axis, x1, x2)?;
            }
        }
        worst = worst.max(finite(s, "invariance condition", x1, x2)?.abs());
    }
    Ok(worst)
}
