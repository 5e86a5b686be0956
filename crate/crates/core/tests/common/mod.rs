//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use conformable::multidim::{Axis, Field2D};

/// Tanh-sinh quadrature of `f` over `[lo, hi]`. The integrand is never
/// evaluated at the end points, and abscissae close to an end point are
/// formed from their distance to it, so end point singularities are fine.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let half = 0.5 * (hi - lo);
    let mut previous = f64::NAN;
    let mut estimate = 0.0;
    for level in 0..7 {
        let h = 0.5_f64.powi(level + 1);
        let n = (6.0 / h).ceil() as i64;
        let mut sum = 0.0;
        for k in -n..=n {
            let t = k as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            let w = FRAC_PI_2 * t.cosh() / (u.cosh() * u.cosh());
            let gap = (hi - lo) / (1.0 + (2.0 * u.abs()).exp());
            if gap < 1e-150 || w == 0.0 {
                continue;
            }
            let x = if t < 0.0 { lo + gap } else { hi - gap };
            sum += w * f(x);
        }
        estimate = half * h * sum;
        if (estimate - previous).abs() <= 1e-14 * estimate.abs().max(1.0) {
            break;
        }
        previous = estimate;
    }
    estimate
}

/// Iterated tanh-sinh over `[lo1, hi1] × [lo2, hi2]`.
pub fn tanh_sinh_2d(
    f: impl Fn(f64, f64) -> f64,
    (lo1, hi1): (f64, f64),
    (lo2, hi2): (f64, f64),
) -> f64 {
    tanh_sinh(|x1| tanh_sinh(|x2| f(x1, x2), lo2, hi2), lo1, hi1)
}

pub mod corpus;

/// `P' = P² − 1`, `P(b) = 0` backwards, then `y' = −P y` forwards, by RK4.
pub fn riccati_oracle(ya: f64, b: f64, steps: usize) -> impl Fn(f64) -> f64 {
    let h = b / steps as f64;
    let mut ps = vec![0.0; steps + 1];
    let dp = |p: f64| p * p - 1.0;
    for i in (0..steps).rev() {
        let p = ps[i + 1];
        let k1 = dp(p);
        let k2 = dp(p - 0.5 * h * k1);
        let k3 = dp(p - 0.5 * h * k2);
        let k4 = dp(p - h * k3);
        ps[i] = p - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    let mut ys = vec![ya; steps + 1];
    for i in 0..steps {
        // P at the half step by averaging the RK4 samples (second-order in h);
        // the fine step keeps the oracle well below the test tolerance
        let p_mid = 0.5 * (ps[i] + ps[i + 1]);
        let y = ys[i];
        let k1 = -ps[i] * y;
        let k2 = -p_mid * (y + 0.5 * h * k1);
        let k3 = -p_mid * (y + 0.5 * h * k2);
        let k4 = -ps[i + 1] * (y + h * k3);
        ys[i + 1] = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    move |x: f64| {
        let f = (x / h).min(steps as f64 - 1e-9);
        let i = f.floor() as usize;
        let t = f - i as f64;
        ys[i] * (1.0 - t) + ys[i + 1] * t
    }
}

/// `Σ c x1^i x2^j` with or without its analytic partials.
pub fn poly(terms: &[(f64, i32, i32)], partials: bool) -> Field2D {
    let t = terms.to_vec();
    let value = move |x1: f64, x2: f64| {
        t.iter()
            .map(|&(c, i, j)| c * x1.powi(i) * x2.powi(j))
            .sum::<f64>()
    };
    let f = Field2D::new(value);
    if !partials {
        return f;
    }
    let t1 = terms.to_vec();
    let t2 = terms.to_vec();
    f.with_partial(Axis::X1, move |x1, x2| {
        t1.iter()
            .filter(|p| p.1 > 0)
            .map(|&(c, i, j)| c * i as f64 * x1.powi(i - 1) * x2.powi(j))
            .sum()
    })
    .with_partial(Axis::X2, move |x1, x2| {
        t2.iter()
            .filter(|p| p.2 > 0)
            .map(|&(c, i, j)| c * j as f64 * x1.powi(i) * x2.powi(j - 1))
            .sum()
    })
}

/// Ten polynomial pairs `(f, g)` with a mix of supplied and numeric partials.
pub fn green_corpus() -> Vec<(Field2D, Field2D)> {
    let pairs: [(&[(f64, i32, i32)], &[(f64, i32, i32)]); 10] = [
        (&[(1.0, 1, 0)], &[(1.0, 0, 1)]),
        (&[(1.0, 0, 1)], &[(1.0, 1, 0)]),
        (&[(1.0, 1, 1)], &[(2.0, 2, 0)]),
        (&[(1.0, 2, 2)], &[(-1.0, 1, 3)]),
        (&[(0.5, 3, 0), (1.0, 0, 2)], &[(1.0, 1, 1), (-2.0, 0, 0)]),
        (&[(1.0, 0, 0), (1.0, 1, 2)], &[(3.0, 2, 1)]),
        (&[(1.0, 4, 1)], &[(1.0, 1, 4)]),
        (&[(-1.0, 2, 0), (1.0, 0, 2)], &[(2.0, 1, 1)]),
        (&[(1.0, 3, 3)], &[(1.0, 2, 2), (1.0, 0, 5)]),
        (&[(0.25, 1, 0), (1.5, 2, 3)], &[(1.0, 5, 0), (-0.5, 3, 1)]),
    ];
    pairs
        .iter()
        .enumerate()
        .map(|(i, (f, g))| (poly(f, i % 2 == 0), poly(g, i % 3 != 0)))
        .collect()
}

