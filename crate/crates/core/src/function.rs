//! Black-box scalar evaluators with optional analytic derivatives.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Step for symmetric difference quotients: `cbrt(eps) * max(1, |x|)`.
pub fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Symmetric two-point difference quotient of `f` at `x`.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = fd_step(x);
    let (lo, hi) = (x - h, x + h);
    (f(hi) - f(lo)) / (hi - lo)
}

/// Absolute tolerance used when comparing a supplied derivative against a
/// finite-difference probe.
pub(crate) fn derivative_agrees(supplied: f64, numeric: f64, value_scale: f64) -> bool {
    let tol = 1e-5 * supplied.abs().max(numeric.abs()) + 1e-7 * value_scale.abs().max(1.0);
    (supplied - numeric).abs() <= tol
}

/// Central difference of `f` at `x` for comparison with a supplied
/// derivative, or `None` where the difference quotient is not resolved: a
/// non-finite value, or disagreement between the steps `h` and `h/4`
/// (strong curvature, for instance next to a singularity).
pub(crate) fn resolved_central_diff(f: impl Fn(f64) -> f64, x: f64, value_scale: f64) -> Option<f64> {
    let h = fd_step(x);
    let coarse = (f(x + h) - f(x - h)) / (2.0 * h);
    let q = 0.25 * h;
    let fine = (f(x + q) - f(x - q)) / (2.0 * q);
    if !coarse.is_finite() || !fine.is_finite() || !derivative_agrees(fine, coarse, value_scale) {
        return None;
    }
    Some(fine)
}

type Check = Arc<OnceLock<std::result::Result<(), String>>>;

/// Scalar function `f: R -> R`, optionally bundled with analytic first and
/// second derivatives.
///
/// A supplied first derivative is compared against a central difference the
/// first time it is used; a disagreement is reported as
/// [`Error::DerivativeMismatch`] on that and every later use.
#[derive(Clone)]
pub struct FunctionHandle {
    value: ScalarFn,
    deriv1: Option<ScalarFn>,
    deriv2: Option<ScalarFn>,
    checked: Check,
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("deriv1", &self.deriv1.is_some())
            .field("deriv2", &self.deriv2.is_some())
            .finish()
    }
}

impl FunctionHandle {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(f),
            deriv1: None,
            deriv2: None,
            checked: Arc::default(),
        }
    }

    pub fn with_deriv1(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.deriv1 = Some(Arc::new(d));
        self.checked = Arc::default();
        self
    }

    pub fn with_deriv2(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.deriv2 = Some(Arc::new(d));
        self
    }

    /// Attaches a central-difference first derivative. Useful when a consumer
    /// insists on `deriv1` but only values are known.
    pub fn with_numeric_deriv1(self) -> Self {
        let value = self.value.clone();
        self.with_deriv1(move |x| central_diff(|u| value(u), x))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c).with_deriv1(|_| 0.0).with_deriv2(|_| 0.0)
    }

    pub fn identity() -> Self {
        Self::new(|x| x).with_deriv1(|_| 1.0).with_deriv2(|_| 0.0)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn has_deriv1(&self) -> bool {
        self.deriv1.is_some()
    }

    /// Returns the analytic first derivative when one was supplied.
    pub fn deriv1(&self, x: f64) -> Result<Option<f64>> {
        let Some(d) = &self.deriv1 else {
            return Ok(None);
        };
        let value = d(x);
        self.validate(x, value)?;
        Ok(Some(value))
    }

    /// First derivative: analytic when available, central difference otherwise.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        match self.deriv1(x)? {
            Some(d) => Ok(d),
            None => Ok(central_diff(|u| self.eval(u), x)),
        }
    }

    /// Second derivative: analytic when available, otherwise a difference of
    /// first derivatives.
    pub fn second_derivative(&self, x: f64) -> Result<f64> {
        if let Some(d2) = &self.deriv2 {
            return Ok(d2(x));
        }
        if self.deriv1.is_some() {
            let h = fd_step(x);
            let hi = self.derivative(x + h)?;
            let lo = self.derivative(x - h)?;
            return Ok((hi - lo) / (2.0 * h));
        }
        let h = f64::EPSILON.powf(0.25) * x.abs().max(1.0);
        Ok((self.eval(x + h) - 2.0 * self.eval(x) + self.eval(x - h)) / (h * h))
    }

    fn validate(&self, x: f64, supplied: f64) -> Result<()> {
        if let Some(outcome) = self.checked.get() {
            return outcome.clone().map_err(Error::DerivativeMismatch);
        }
        let scale = self.eval(x);
        let Some(numeric) = resolved_central_diff(|u| self.eval(u), x, scale) else {
            // probe point is unsuitable; try again on the next call
            return Ok(());
        };
        if !supplied.is_finite() {
            return Ok(());
        }
        let outcome = if derivative_agrees(supplied, numeric, scale) {
            Ok(())
        } else {
            Err(format!(
                "at x = {x}: supplied {supplied}, finite difference {numeric}"
            ))
        };
        let outcome = self.checked.get_or_init(|| outcome).clone();
        outcome.map_err(Error::DerivativeMismatch)
    }
}

/// Scalar function of `arity` real arguments with an optional analytic
/// gradient.
#[derive(Clone)]
pub struct MultiFunction {
    arity: usize,
    value: VectorFn,
    gradient: Option<GradientFn>,
}

impl fmt::Debug for MultiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiFunction")
            .field("arity", &self.arity)
            .field("gradient", &self.gradient.is_some())
            .finish()
    }
}

impl MultiFunction {
    pub fn new(arity: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            arity,
            value: Arc::new(f),
            gradient: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, args: &[f64]) -> f64 {
        (self.value)(args)
    }

    /// Gradient at `args`, analytic when supplied, central differences otherwise.
    pub fn gradient(&self, args: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.arity];
        match &self.gradient {
            Some(g) => g(args, &mut out),
            None => {
                let mut probe = args.to_vec();
                for (k, slot) in out.iter_mut().enumerate() {
                    let base = args[k];
                    let h = fd_step(base);
                    probe[k] = base + h;
                    let hi = self.eval(&probe);
                    probe[k] = base - h;
                    let lo = self.eval(&probe);
                    probe[k] = base;
                    *slot = (hi - lo) / (2.0 * h);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_diff_of_cubic() {
        let d = central_diff(|x| x * x * x, 2.0);
        assert!((d - 12.0).abs() < 1e-8);
    }

    #[test]
    fn wrong_derivative_is_rejected_and_remembered() {
        let f = FunctionHandle::new(|x| x * x).with_deriv1(|x| 3.0 * x);
        assert!(matches!(f.deriv1(1.0), Err(Error::DerivativeMismatch(_))));
        // a later probe where the two happen to agree still reports the failure
        assert!(f.deriv1(0.0).is_err());
    }

    #[test]
    fn correct_derivative_passes() {
        let f = FunctionHandle::new(f64::sin).with_deriv1(f64::cos);
        assert_eq!(f.deriv1(0.3).unwrap(), Some(0.3f64.cos()));
        assert!((f.second_derivative(0.3).unwrap() + 0.3f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn numeric_gradient_matches_analytic() {
        let f = MultiFunction::new(2, |v| v[0] * v[1] * v[1]);
        let g = f.gradient(&[2.0, 3.0]);
        assert!((g[0] - 9.0).abs() < 1e-8);
        assert!((g[1] - 12.0).abs() < 1e-8);
    }
}
