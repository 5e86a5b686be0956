//! Adaptive Dormand–Prince 5(4) integrator for small first-order systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl OdeSettings {
    pub fn tight() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-13,
            max_steps: 200_000,
        }
    }

    pub fn with_tol(tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol,
            max_steps: 200_000,
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights equal the last row of A; these are the differences to
// the embedded fourth-order solution
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each
/// time in `outputs` (non-decreasing, all `>= t0`).
pub fn integrate<F>(mut f: F, t0: f64, y0: &[f64], outputs: &[f64], s: &OdeSettings) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidArgument(
            "output times must be non-decreasing and not before the start".into(),
        ));
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut out = Vec::with_capacity(outputs.len());
    let total = outputs.last().map_or(0.0, |&e| e - t0);
    let mut h = (total * 1e-3).max(1e-10);
    let mut steps = 0;
    f(t, &y, &mut k[0])?;
    for &target in outputs {
        while target - t > 1e-15 * t.abs().max(1.0) {
            if steps >= s.max_steps {
                return Err(Error::NoConvergence(format!(
                    "ODE integration exceeded {} steps at t = {t}",
                    s.max_steps
                )));
            }
            steps += 1;
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            for stage in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(stage) {
                        acc += step * A[stage][j] * kj[i];
                    }
                    tmp[i] = acc;
                }
                f(t + C[stage] * step, &tmp, &mut k[stage])?;
            }
            // tmp now holds the fifth-order solution (last stage input)
            let mut err = 0.0f64;
            for i in 0..n {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                let sc = s.abs_tol + s.rel_tol * y[i].abs().max(tmp[i].abs());
                err = err.max((step * e / sc).abs());
            }
            if !err.is_finite() {
                if step < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::NonFinite(format!("ODE right-hand side blew up near t = {t}")));
                }
                h = step * 0.1;
                continue;
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y.copy_from_slice(&tmp);
                k.swap(0, 6);
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || grow < 1.0 {
                    h = step * grow;
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).max(0.1);
                if h < 1e-15 * t.abs().max(1.0) {
                    return Err(Error::NoConvergence(format!(
                        "ODE step size underflow at t = {t}"
                    )));
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
