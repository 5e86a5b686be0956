//! Sampled functions on strictly increasing grids, with local polynomial
//! differentiation and interpolation.

use serde::{Deserialize, Serialize};

use crate::calculus::{Anchor, Order, Side};
use crate::error::{Error, Result};

const STENCIL: usize = 5;

/// Finite-difference weights (Fornberg) for derivatives `0..=m` at `x0`
/// from values at `nodes`. Returns `w[k][j]`, the weight of node `j` in the
/// `k`-th derivative.
pub fn fornberg_weights(x0: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Index range of the (up to) 5-point stencil centred on `i`, shifted inward
/// near the ends.
fn stencil_range(i: usize, n: usize) -> std::ops::Range<usize> {
    let width = STENCIL.min(n);
    let start = i.saturating_sub(width / 2).min(n - width);
    start..start + width
}

/// `k`-th derivative of the samples `(coords, values)` at every node, from
/// local 5-point fits. `coords` must be strictly monotone.
pub fn stencil_derivative(coords: &[f64], values: &[f64], k: usize) -> Vec<f64> {
    let n = coords.len();
    (0..n)
        .map(|i| {
            let r = stencil_range(i, n);
            let w = fornberg_weights(coords[i], &coords[r.clone()], k);
            w[k].iter().zip(&values[r]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// Conformable coordinate `|x − anchor|^α / α`; the conformable derivative
/// of a function is its ordinary derivative in this coordinate.
pub fn conformable_coordinate(order: Order, anchor: Anchor, x: f64) -> f64 {
    let d = match anchor.side {
        Side::LeftFrom => x - anchor.point,
        Side::RightAt => anchor.point - x,
    };
    let alpha = order.alpha();
    d.max(0.0).powf(alpha) / alpha
}

/// `n` points on `[a, b]` equally spaced in the conformable coordinate of
/// the left anchor `a`, so that they cluster towards `a` when `α < 1`.
pub fn conformable_grid(a: f64, b: f64, order: Order, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
    }
    if !(a < b) {
        return Err(Error::InvalidGrid(format!("need a < b, got [{a}, {b}]")));
    }
    let inv = 1.0 / order.alpha();
    let mut xs: Vec<f64> = (0..n)
        .map(|i| a + (b - a) * (i as f64 / (n - 1) as f64).powf(inv))
        .collect();
    xs[n - 1] = b;
    Ok(xs)
}

/// Uniform grid of `n` points on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(a < b) {
        return Err(Error::InvalidGrid(format!(
            "need n >= 2 and a < b, got n = {n} on [{a}, {b}]"
        )));
    }
    let mut xs: Vec<f64> = (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect();
    xs[n - 1] = b;
    Ok(xs)
}

/// Values of a scalar function on a strictly increasing grid, tagged with
/// the order and anchor of the conformable operators applied to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
    order: Order,
    anchor: Anchor,
}

impl GridFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, order: Order, anchor: Anchor) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidGrid(format!(
                "{} abscissae but {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidGrid("need at least 2 points".into()));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("abscissae must be finite".into()));
        }
        if let Some(w) = xs.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(format!(
                "abscissae not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        let outside = match anchor.side {
            Side::LeftFrom => xs[0] < anchor.point,
            Side::RightAt => xs[xs.len() - 1] > anchor.point,
        };
        if outside {
            return Err(Error::InvalidGrid(format!(
                "grid leaves the admissible side of the anchor {}",
                anchor.point
            )));
        }
        Ok(Self {
            xs,
            ys,
            order,
            anchor,
        })
    }

    pub fn from_fn(
        xs: Vec<f64>,
        f: impl Fn(f64) -> f64,
        order: Order,
        anchor: Anchor,
    ) -> Result<Self> {
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys, order, anchor)
    }

    /// Same grid and tags, new values.
    pub fn with_values(&self, ys: Vec<f64>) -> Result<Self> {
        Self::new(self.xs.clone(), ys, self.order, self.anchor)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn anchor(&self) -> Anchor {
        self.anchor
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn first(&self) -> (f64, f64) {
        (self.xs[0], self.ys[0])
    }

    pub fn last(&self) -> (f64, f64) {
        let n = self.len() - 1;
        (self.xs[n], self.ys[n])
    }

    pub fn max_abs(&self) -> f64 {
        self.ys.iter().fold(0.0f64, |m, y| m.max(y.abs()))
    }

    /// Conformable coordinates of the grid points.
    pub fn coordinates(&self) -> Vec<f64> {
        self.xs
            .iter()
            .map(|&x| conformable_coordinate(self.order, self.anchor, x))
            .collect()
    }

    /// Conformable derivative at every grid point, by local polynomial fits
    /// in the conformable coordinate.
    pub fn alpha_derivative(&self) -> Vec<f64> {
        stencil_derivative(&self.coordinates(), &self.ys, 1)
    }

    /// Conformable derivative as a grid function on the same grid.
    pub fn alpha_derivative_grid(&self) -> GridFunction {
        self.with_values(self.alpha_derivative())
            .expect("same grid is valid")
    }

    /// Ordinary first derivative at every grid point.
    pub fn derivative(&self) -> Vec<f64> {
        stencil_derivative(&self.xs, &self.ys, 1)
    }

    /// Ordinary second derivative at every grid point.
    pub fn second_derivative(&self) -> Vec<f64> {
        stencil_derivative(&self.xs, &self.ys, 2)
    }

    /// Local 5-point interpolation in the conformable coordinate. Points
    /// outside the grid are extrapolated from the nearest stencil.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.len();
        let i = self.xs.partition_point(|&g| g < x).min(n - 1);
        let r = stencil_range(i, n);
        let s = conformable_coordinate(self.order, self.anchor, x);
        let coords: Vec<f64> = self.xs[r.clone()]
            .iter()
            .map(|&g| conformable_coordinate(self.order, self.anchor, g))
            .collect();
        let w = fornberg_weights(s, &coords, 0);
        w[0].iter().zip(&self.ys[r]).map(|(a, b)| a * b).sum()
    }

    /// Largest absolute difference to `f` at the grid points.
    pub fn sup_distance(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.xs
            .iter()
            .zip(&self.ys)
            .fold(0.0f64, |m, (&x, &y)| m.max((y - f(x)).abs()))
    }
}
