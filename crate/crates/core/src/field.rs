//! Scalar fields of several real arguments with optional analytic partials.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::function::{derivative_agrees, fd_step, resolved_central_diff};

pub type FieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Scalar field `f(z_0, …, z_{n-1})`.
///
/// Partials that are not supplied are taken by central differences. Supplied
/// partials are compared against central differences the first time any of
/// them is used; a disagreement is reported as
/// [`Error::DerivativeMismatch`] from then on.
#[derive(Clone)]
pub struct ScalarField {
    arity: usize,
    value: FieldFn,
    partials: Vec<Option<FieldFn>>,
    checked: Arc<OnceLock<std::result::Result<(), String>>>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let supplied: Vec<bool> = self.partials.iter().map(Option::is_some).collect();
        f.debug_struct("ScalarField")
            .field("arity", &self.arity)
            .field("partials", &supplied)
            .finish()
    }
}

impl ScalarField {
    pub fn new(arity: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            arity,
            value: Arc::new(f),
            partials: vec![None; arity],
            checked: Arc::default(),
        }
    }

    /// Attaches the analytic partial derivative in slot `k`.
    pub fn with_partial(
        mut self,
        k: usize,
        d: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(k < self.arity, "slot {k} out of range for arity {}", self.arity);
        self.partials[k] = Some(Arc::new(d));
        self.checked = Arc::default();
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn has_partial(&self, k: usize) -> bool {
        self.partials.get(k).is_some_and(Option::is_some)
    }

    #[inline]
    pub fn eval(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.arity);
        (self.value)(z)
    }

    fn numeric_partial(&self, k: usize, z: &[f64]) -> f64 {
        let mut probe = z.to_vec();
        let h = fd_step(z[k]);
        probe[k] = z[k] + h;
        let hi = self.eval(&probe);
        probe[k] = z[k] - h;
        let lo = self.eval(&probe);
        (hi - lo) / (2.0 * h)
    }

    fn validate(&self, z: &[f64]) -> Result<()> {
        if let Some(outcome) = self.checked.get() {
            return outcome.clone().map_err(Error::DerivativeMismatch);
        }
        let scale = self.eval(z);
        let mut outcome = Ok(());
        for (k, d) in self.partials.iter().enumerate() {
            let Some(d) = d else { continue };
            let supplied = d(z);
            let slice = |u: f64| {
                let mut probe = z.to_vec();
                probe[k] = u;
                self.eval(&probe)
            };
            let numeric = resolved_central_diff(slice, z[k], scale);
            let (Some(numeric), true) = (numeric, supplied.is_finite()) else {
                // unsuitable probe point; check again later
                return Ok(());
            };
            if !derivative_agrees(supplied, numeric, scale) {
                outcome = Err(format!(
                    "partial in slot {k} at {z:?}: supplied {supplied}, finite difference {numeric}"
                ));
                break;
            }
        }
        self.checked
            .get_or_init(|| outcome)
            .clone()
            .map_err(Error::DerivativeMismatch)
    }

    /// Partial derivative in slot `k`.
    pub fn partial(&self, k: usize, z: &[f64]) -> Result<f64> {
        match &self.partials[k] {
            Some(d) => {
                self.validate(z)?;
                Ok(d(z))
            }
            None => Ok(self.numeric_partial(k, z)),
        }
    }

    /// Mixed second partial `∂²f/∂z_i∂z_j`, by central differences of the
    /// first partial in slot `j`.
    pub fn second_partial(&self, i: usize, j: usize, z: &[f64]) -> Result<f64> {
        let mut probe = z.to_vec();
        let h = if self.has_partial(j) {
            fd_step(z[i])
        } else {
            f64::EPSILON.powf(0.25) * z[i].abs().max(1.0)
        };
        probe[i] = z[i] + h;
        let hi = self.partial(j, &probe)?;
        probe[i] = z[i] - h;
        let lo = self.partial(j, &probe)?;
        Ok((hi - lo) / (2.0 * h))
    }

    /// The field multiplied by a constant.
    pub fn scaled(&self, c: f64) -> Self {
        let value = self.value.clone();
        let mut out = Self::new(self.arity, move |z| c * value(z));
        for (k, d) in self.partials.iter().enumerate() {
            if let Some(d) = d.clone() {
                out = out.with_partial(k, move |z| c * d(z));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_partials_of_product() {
        let f = ScalarField::new(3, |z| z[0] * z[1] * z[2] * z[2]);
        let z = [1.0, 2.0, 3.0];
        assert!((f.partial(0, &z).unwrap() - 18.0).abs() < 1e-8);
        assert!((f.partial(2, &z).unwrap() - 12.0).abs() < 1e-8);
        assert!((f.second_partial(2, 2, &z).unwrap() - 4.0).abs() < 1e-5);
    }

    #[test]
    fn wrong_partial_is_rejected() {
        let f = ScalarField::new(2, |z| z[0] * z[1]).with_partial(1, |z| 2.0 * z[0]);
        assert!(matches!(
            f.partial(1, &[1.0, 1.0]),
            Err(Error::DerivativeMismatch(_))
        ));
    }

    #[test]
    fn scaling_scales_partials() {
        let f = ScalarField::new(1, |z| z[0] * z[0]).with_partial(0, |z| 2.0 * z[0]);
        let g = f.scaled(3.0);
        assert_eq!(g.partial(0, &[2.0]).unwrap(), 12.0);
    }
}
