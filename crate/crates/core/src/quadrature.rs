//! Globally adaptive 15-point Gauss–Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSettings {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let s = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "quadrature tolerances must be positive (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidArgument(
                "max_subdivisions must be positive".into(),
            ));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut values = [(0.0, 0.0); 7];
    for (j, slot) in values.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        *slot = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kronrod.is_finite() {
        return Err(Error::NonFinite(format!(
            "integrand is not finite on [{lo}, {hi}]"
        )));
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, (f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let width = half.abs();
    let (value, abs_sum, asc) = (kronrod * half, abs_sum * width, asc * width);
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_sum);
    }
    Ok(Segment {
        lo,
        hi,
        value,
        error,
    })
}

/// Integrates `f` over `[lo, hi]`.
///
/// Bisects the segment with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, q: &QuadratureSettings) -> Result<f64> {
    q.validate()?;
    if lo == hi {
        return Ok(0.0);
    }
    if hi < lo {
        return integrate(f, hi, lo, q).map(|v| -v);
    }
    let first = gauss_kronrod(&f, lo, hi)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::from([first]);
    let mut settled_err = 0.0;
    let mut subdivisions = 0;
    loop {
        let tol = q.abs_tol.max(q.rel_tol * total.abs());
        if total_err + settled_err <= tol {
            return Ok(total);
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) || (worst.hi - worst.lo) < 1e-14 * (hi - lo) {
            // cannot split any further; keep its contribution as is
            settled_err += worst.error;
            total_err -= worst.error;
            continue;
        }
        if subdivisions >= q.max_subdivisions {
            heap.push(worst);
            break;
        }
        subdivisions += 1;
        let left = gauss_kronrod(&f, worst.lo, mid)?;
        let right = gauss_kronrod(&f, mid, worst.hi)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if subdivisions % 64 == 0 {
            // refresh sums to keep cancellation from drifting
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    Err(Error::ToleranceNotMet {
        subdivisions,
        estimate: total_err + settled_err,
    })
}

/// Like [`integrate`], for integrands that can fail. The first error raised
/// by the integrand is returned in place of the quadrature result.
pub fn integrate_fallible<F: Fn(f64) -> Result<f64>>(
    f: F,
    lo: f64,
    hi: f64,
    q: &QuadratureSettings,
) -> Result<f64> {
    let failure: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let outcome = integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        q,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => outcome,
    }
}
