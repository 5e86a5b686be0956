//! Conformable derivatives and integrals on an interval, and numerical checks
//! of the operator identities (inverse property, fundamental theorem,
//! integration by parts, chain rules).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{FunctionHandle, MultiFunction};
use crate::quadrature::{integrate_fallible, QuadratureSettings};
use crate::richardson::richardson_geometric;

/// Fractional order `0 < alpha <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Order(f64);

impl Order {
    pub const ONE: Order = Order(1.0);
    pub const HALF: Order = Order(0.5);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidOrder(alpha))
        }
    }

    #[inline]
    pub fn alpha(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let alpha = f64::deserialize(d)?;
        Order::new(alpha).map_err(serde::de::Error::custom)
    }
}

/// Which end of the interval an operator is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Operator starting from the point; evaluation points lie at or above it.
    LeftFrom,
    /// Operator terminating at the point; evaluation points lie at or below it.
    RightAt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub side: Side,
    pub point: f64,
}

impl Anchor {
    pub fn left(a: f64) -> Self {
        Self {
            side: Side::LeftFrom,
            point: a,
        }
    }

    pub fn right(b: f64) -> Self {
        Self {
            side: Side::RightAt,
            point: b,
        }
    }

    /// Distance from the anchor to `x`, or a domain error when `x` lies on the
    /// wrong side.
    pub fn distance(&self, x: f64) -> Result<f64> {
        let d = match self.side {
            Side::LeftFrom => x - self.point,
            Side::RightAt => self.point - x,
        };
        if d >= 0.0 {
            Ok(d)
        } else {
            let rel = match self.side {
                Side::LeftFrom => "below the left anchor",
                Side::RightAt => "above the right anchor",
            };
            Err(Error::Domain(format!("x = {x} lies {rel} {}", self.point)))
        }
    }

    fn sign(&self) -> f64 {
        match self.side {
            Side::LeftFrom => 1.0,
            Side::RightAt => -1.0,
        }
    }

    /// Point at distance `d` inside the admissible range.
    fn inward(&self, d: f64) -> f64 {
        self.point + self.sign() * d
    }
}

// Magnitude above which a quotient is treated as divergent.
const OVERFLOW: f64 = 1e150;

/// Anchor-side weight `(distance)^(1-alpha)`.
#[inline]
pub fn weight(order: Order, distance: f64) -> f64 {
    if order.is_classical() {
        1.0
    } else {
        distance.powf(1.0 - order.alpha())
    }
}

fn check_finite(v: f64, x: f64) -> Result<f64> {
    if v.is_finite() && v.abs() < OVERFLOW {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!(
            "conformable derivative diverges at x = {x}"
        )))
    }
}

/// Symmetric limit quotient at an interior point (`distance > 0`).
fn limit_quotient(
    eval: &dyn Fn(f64) -> Result<f64>,
    order: Order,
    anchor: Anchor,
    x: f64,
    distance: f64,
) -> Result<f64> {
    let h = weight(order, distance);
    let eps = f64::EPSILON.cbrt() * x.abs().max(1.0);
    // keep both probes inside the admissible range
    let step = (eps * h).min(0.5 * distance);
    let (lo, hi) = (x - step, x + step);
    let q = (eval(hi)? - eval(lo)?) / (hi - lo) * h;
    check_finite(anchor.sign() * q, x)
}

/// Interior derivative: analytic fast path when available, limit quotient otherwise.
fn interior(f: &FunctionHandle, order: Order, anchor: Anchor, x: f64, distance: f64) -> Result<f64> {
    if let Some(d) = f.deriv1(x)? {
        return check_finite(anchor.sign() * weight(order, distance) * d, x);
    }
    limit_quotient(&|u| Ok(f.eval(u)), order, anchor, x, distance)
}

/// One-sided limit of the derivative at the anchor, extrapolated from the
/// samples at `anchor ± span·10^-k`, `k = 2..6`.
pub(crate) fn anchor_limit(
    sample: &dyn Fn(f64, f64) -> Result<f64>,
    order: Order,
    anchor: Anchor,
    span: f64,
) -> Result<f64> {
    if !(span > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "anchor limit needs a positive span, got {span}"
        )));
    }
    let deltas: Vec<f64> = (2..=6).map(|k| span * 10f64.powi(-k)).collect();
    let mut raw = Vec::with_capacity(deltas.len());
    for &d in &deltas {
        raw.push(sample(anchor.inward(d), d)?);
    }
    // smooth f gives D(anchor + d) = d^(1-α)·(c0 + c1·d + ...); for α = 1 the
    // leading term is the limit itself
    let lead = if order.is_classical() { 1.0 } else { 1.0 - order.alpha() };
    let exponents: Vec<f64> = (0..raw.len()).map(|j| lead + j as f64).collect();
    let (best, previous) = richardson_geometric(&raw, 10.0, &exponents);
    let growing = raw.windows(2).all(|w| w[1].abs() > w[0].abs());
    let unstable = (best - previous).abs() > 1e-3 * (1.0 + best.abs());
    if !best.is_finite() || (growing && unstable && raw.last().unwrap().abs() > 1.0) {
        return Err(Error::NonFinite(format!(
            "derivative has no finite limit at the anchor {}",
            anchor.point
        )));
    }
    Ok(best)
}

/// Conformable derivative attached to `anchor`, evaluated at `x`.
///
/// `span` sets the scale of the sample sequence used when `x` equals the
/// anchor point.
pub fn conformable_deriv(
    f: &FunctionHandle,
    order: Order,
    anchor: Anchor,
    x: f64,
    span: f64,
) -> Result<f64> {
    let distance = anchor.distance(x)?;
    if distance > 0.0 {
        return interior(f, order, anchor, x, distance);
    }
    anchor_limit(
        &|u, d| interior(f, order, anchor, u, d),
        order,
        anchor,
        span,
    )
}

/// Left derivative `f_a^(α)(x)`.
pub fn left_deriv(f: &FunctionHandle, order: Order, a: f64, x: f64) -> Result<f64> {
    conformable_deriv(f, order, Anchor::left(a), x, 1.0)
}

/// Right derivative `_b f^(α)(x)`.
pub fn right_deriv(f: &FunctionHandle, order: Order, b: f64, x: f64) -> Result<f64> {
    conformable_deriv(f, order, Anchor::right(b), x, 1.0)
}

/// Left derivative computed from the limit quotient only, ignoring any
/// analytic derivative attached to `f`.
pub fn left_deriv_quotient(f: &FunctionHandle, order: Order, a: f64, x: f64) -> Result<f64> {
    fallible_deriv(&|u| Ok(f.eval(u)), order, Anchor::left(a), x, 1.0)
}

/// Limit-quotient derivative of a fallible evaluator.
pub(crate) fn fallible_deriv(
    eval: &dyn Fn(f64) -> Result<f64>,
    order: Order,
    anchor: Anchor,
    x: f64,
    span: f64,
) -> Result<f64> {
    let distance = anchor.distance(x)?;
    if distance > 0.0 {
        return limit_quotient(eval, order, anchor, x, distance);
    }
    anchor_limit(
        &|u, d| limit_quotient(eval, order, anchor, u, d),
        order,
        anchor,
        span,
    )
}

/// `∫ f(u)·|u − anchor|^(α−1) du` between the anchor and `x`, after the
/// substitution `t = |u − anchor|^α`.
pub(crate) fn weighted_integral(
    eval: &dyn Fn(f64) -> Result<f64>,
    order: Order,
    anchor: Anchor,
    x: f64,
    q: &QuadratureSettings,
) -> Result<f64> {
    let distance = anchor.distance(x)?;
    if distance == 0.0 {
        return Ok(0.0);
    }
    let alpha = order.alpha();
    let upper = distance.powf(alpha);
    let inv = 1.0 / alpha;
    let v = integrate_fallible(
        |t: f64| eval(anchor.inward(t.max(0.0).powf(inv))),
        0.0,
        upper,
        q,
    )?;
    Ok(v / alpha)
}

/// Left integral `I_a^α f(x) = ∫_a^x f(u)(u−a)^(α−1) du`.
pub fn left_integral(
    f: &FunctionHandle,
    order: Order,
    a: f64,
    x: f64,
    q: &QuadratureSettings,
) -> Result<f64> {
    weighted_integral(&|u| Ok(f.eval(u)), order, Anchor::left(a), x, q)
}

/// Right integral `∫_x^b f(u)(b−u)^(α−1) du`.
pub fn right_integral(
    f: &FunctionHandle,
    order: Order,
    b: f64,
    x: f64,
    q: &QuadratureSettings,
) -> Result<f64> {
    weighted_integral(&|u| Ok(f.eval(u)), order, Anchor::right(b), x, q)
}

/// Max over `xs` of `|d_a^α(I_a^α f)(x) − f(x)|`, with the outer derivative
/// taken by limit quotient of the numerically integrated function.
pub fn inverse_residual(
    f: &FunctionHandle,
    order: Order,
    a: f64,
    xs: &[f64],
    q: &QuadratureSettings,
) -> Result<f64> {
    let anchor = Anchor::left(a);
    let integral = |u: f64| left_integral(f, order, a, u, q);
    let mut worst = 0.0f64;
    for &x in xs {
        if !(x > a) {
            return Err(Error::Domain(format!(
                "inverse residual needs points above the anchor {a}, got {x}"
            )));
        }
        let d = fallible_deriv(&integral, order, anchor, x, 1.0)?;
        worst = worst.max((d - f.eval(x)).abs());
    }
    Ok(worst)
}

/// `|I_a^α[f_a^(α)](x) − (f(x) − f(a))|`.
pub fn fundamental_theorem_residual(
    f: &FunctionHandle,
    order: Order,
    a: f64,
    x: f64,
    q: &QuadratureSettings,
) -> Result<f64> {
    if !f.has_deriv1() {
        return Err(Error::MissingDerivative(
            "the fundamental theorem check needs an analytic first derivative".into(),
        ));
    }
    let anchor = Anchor::left(a);
    let lhs = weighted_integral(
        &|u| conformable_deriv(f, order, anchor, u, (x - a).max(f64::MIN_POSITIVE)),
        order,
        anchor,
        x,
        q,
    )?;
    Ok((lhs - (f.eval(x) - f.eval(a))).abs())
}

/// Which integration-by-parts identity to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartsMode {
    /// Both derivatives and the integral start from `a`.
    Left,
    /// Both derivatives and the integral terminate at `b`.
    Right,
    /// Left derivative under a left integral traded for a right derivative
    /// under a right integral.
    Mixed,
}

/// Residual of the selected integration-by-parts identity on `[a, b]`.
pub fn parts_residual(
    f: &FunctionHandle,
    g: &FunctionHandle,
    order: Order,
    a: f64,
    b: f64,
    q: &QuadratureSettings,
    mode: PartsMode,
) -> Result<f64> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "integration by parts needs a < b, got [{a}, {b}]"
        )));
    }
    let span = b - a;
    let (left, right) = (Anchor::left(a), Anchor::right(b));
    // ∫ u·D_anchor(w) against the weight of `anchor`, over [a, b]
    let term = |u: &FunctionHandle, w: &FunctionHandle, anchor: Anchor| {
        let end = match anchor.side {
            Side::LeftFrom => b,
            Side::RightAt => a,
        };
        weighted_integral(
            &|s| Ok(u.eval(s) * conformable_deriv(w, order, anchor, s, span)?),
            order,
            anchor,
            end,
            q,
        )
    };
    let boundary = f.eval(b) * g.eval(b) - f.eval(a) * g.eval(a);
    let r = match mode {
        PartsMode::Left => term(f, g, left)? - boundary + term(g, f, left)?,
        PartsMode::Right => term(f, g, right)? + boundary + term(g, f, right)?,
        PartsMode::Mixed => term(f, g, left)? - boundary - term(g, f, right)?,
    };
    Ok(r.abs())
}

/// Composite rules, named by where the inner function's value sits relative
/// to the anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainCase {
    /// Left anchor `a`, `g(x) > a`:
    /// `(f∘g)_a = f_a(g)·g_a·(g − a)^(α−1)`.
    InnerAboveLeft,
    /// Right anchor `b`, `g(x) < b`:
    /// `_b(f∘g) = −_bf(g)·_bg·(b − g)^(α−1)`.
    InnerBelowRight,
    /// Left anchor `a`, `g(x) < a`:
    /// `(f∘g)_a = −_af(g)·g_a·(a − g)^(α−1)`.
    InnerBelowLeft,
    /// Right anchor `b`, `g(x) > b`:
    /// `_b(f∘g) = f_b(g)·_bg·(g − b)^(α−1)`.
    InnerAboveRight,
}

impl ChainCase {
    fn side(self) -> Side {
        match self {
            ChainCase::InnerAboveLeft | ChainCase::InnerBelowLeft => Side::LeftFrom,
            ChainCase::InnerBelowRight | ChainCase::InnerAboveRight => Side::RightAt,
        }
    }
}

/// `|LHS − RHS|` of a composite rule for `outer ∘ inner` at `x`.
///
/// The left side is the limit quotient of the composite; the right side uses
/// the derivatives of the factors.
pub fn chain_rule_residual(
    outer: &FunctionHandle,
    inner: &FunctionHandle,
    order: Order,
    anchor: Anchor,
    x: f64,
    case: ChainCase,
) -> Result<f64> {
    if case.side() != anchor.side {
        return Err(Error::HypothesisViolated(format!(
            "{case:?} needs a {:?} anchor, got {:?}",
            case.side(),
            anchor.side
        )));
    }
    let gx = inner.eval(x);
    let p = anchor.point;
    let holds = match case {
        ChainCase::InnerAboveLeft | ChainCase::InnerAboveRight => gx > p,
        ChainCase::InnerBelowRight | ChainCase::InnerBelowLeft => gx < p,
    };
    if !holds {
        return Err(Error::HypothesisViolated(format!(
            "{case:?} requires inner(x) on the stated side of {p}; inner({x}) = {gx}"
        )));
    }
    let composite = {
        let (o, i) = (outer.clone(), inner.clone());
        move |u: f64| Ok(o.eval(i.eval(u)))
    };
    let lhs = fallible_deriv(&composite, order, anchor, x, 1.0)?;
    let dg = conformable_deriv(inner, order, anchor, x, 1.0)?;
    let alpha = order.alpha();
    let gap = (gx - p).abs();
    let factor = gap.powf(alpha - 1.0);
    // a right derivative carries a sign of its own, so the two right-anchored
    // rules pick up a factor −1 relative to their left mirror images
    let rhs = match case {
        ChainCase::InnerAboveLeft => conformable_deriv(outer, order, anchor, gx, 1.0)? * dg * factor,
        ChainCase::InnerBelowRight => -conformable_deriv(outer, order, anchor, gx, 1.0)? * dg * factor,
        ChainCase::InnerBelowLeft => {
            -conformable_deriv(outer, order, Anchor::right(p), gx, 1.0)? * dg * factor
        }
        ChainCase::InnerAboveRight => {
            conformable_deriv(outer, order, Anchor::left(p), gx, 1.0)? * dg * factor
        }
    };
    Ok((lhs - rhs).abs())
}

/// `|d_a^α F(y_1(x), …, y_N(x)) − Σ_k ∂_k F · (y_k)_a^(α)(x)|`.
pub fn multivar_chain_residual(
    big_f: &MultiFunction,
    ys: &[FunctionHandle],
    order: Order,
    a: f64,
    x: f64,
) -> Result<f64> {
    if ys.len() != big_f.arity() {
        return Err(Error::DimensionMismatch {
            expected: big_f.arity(),
            got: ys.len(),
        });
    }
    let anchor = Anchor::left(a);
    let composite = |u: f64| {
        let args: Vec<f64> = ys.iter().map(|y| y.eval(u)).collect();
        Ok(big_f.eval(&args))
    };
    let lhs = fallible_deriv(&composite, order, anchor, x, 1.0)?;
    let args: Vec<f64> = ys.iter().map(|y| y.eval(x)).collect();
    let grad = big_f.gradient(&args);
    let mut rhs = 0.0;
    for (g, y) in grad.iter().zip(ys) {
        rhs += g * conformable_deriv(y, order, anchor, x, 1.0)?;
    }
    Ok((lhs - rhs).abs())
}
