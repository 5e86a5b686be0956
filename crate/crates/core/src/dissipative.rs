//! Action principle for linear friction.
//!
//! The Lagrangian `m x'²/2 − U(x) + γ (x_a^(1/2))²/2` carries the friction
//! energy in a half-order conformable velocity anchored at `a`. Its
//! Euler–Lagrange equation `m x'' + γ x' + γ (t−a) x'' = F(x)` tends to the
//! damped equation of motion as the anchor approaches the evaluation time.
//! [`simulate_with_limit`] realizes that limit by restarting the anchor at
//! the start of every window of width `Δ` and extrapolating `Δ → 0`.

use serde::{Deserialize, Serialize};

use crate::calculus::{Anchor, Order};
use crate::error::{Error, Result};
use crate::function::FunctionHandle;
use crate::grid::GridFunction;
use crate::ode::{integrate, OdeSettings};
use crate::richardson::polynomial_extrapolate_to_zero;
use crate::variational::MixedLagrangian;

/// Order of the conformable velocity in the friction term.
pub const FRICTION_ORDER: Order = Order::HALF;

/// Tolerance of the inner integrator, per window.
const WINDOW_TOL: f64 = 1e-9;

/// Below this every width counts as converged, whatever the ordering.
const DISTANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct DissipativeSystem {
    pub m: f64,
    pub gamma: f64,
    /// Potential `U`; the force is `F = −U'`.
    pub potential: FunctionHandle,
    pub x0: f64,
    pub v0: f64,
}

impl DissipativeSystem {
    pub fn new(m: f64, gamma: f64, potential: FunctionHandle, x0: f64, v0: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {m}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "friction coefficient must be non-negative, got {gamma}"
            )));
        }
        if !potential.has_deriv1() {
            return Err(Error::MissingDerivative(
                "the potential needs a first derivative to define the force".into(),
            ));
        }
        if !(x0.is_finite() && v0.is_finite()) {
            return Err(Error::InvalidArgument("initial state must be finite".into()));
        }
        Ok(Self {
            m,
            gamma,
            potential,
            x0,
            v0,
        })
    }

    pub fn force(&self, x: f64) -> Result<f64> {
        match self.potential.deriv1(x)? {
            Some(d) => Ok(-d),
            None => Err(Error::MissingDerivative("potential derivative".into())),
        }
    }

    /// `x''` of the windowed dynamics `(m + γ(t−a)) x'' = F(x) − γ x'`.
    fn acceleration(&self, elapsed: f64, x: f64, xp: f64) -> Result<f64> {
        Ok((self.force(x)? - self.gamma * xp) / (self.m + self.gamma * elapsed))
    }
}

/// The friction Lagrangian in slots `(t, x, x', x_a^(1/2))`, to be used with
/// [`FRICTION_ORDER`].
pub fn friction_lagrangian(sys: &DissipativeSystem) -> MixedLagrangian {
    let (m, gamma) = (sys.m, sys.gamma);
    let u = sys.potential.clone();
    let du = sys.potential.clone();
    MixedLagrangian::new(move |_, x, xp, v| 0.5 * m * xp * xp - u.eval(x) + 0.5 * gamma * v * v)
        .with_partial(MixedLagrangian::X, |_, _, _, _| 0.0)
        .with_partial(MixedLagrangian::Y, move |_, x, _, _| {
            -du.deriv1(x).ok().flatten().unwrap_or(f64::NAN)
        })
        .with_partial(MixedLagrangian::YP, move |_, _, xp, _| m * xp)
        .with_partial(MixedLagrangian::V, move |_, _, _, v| gamma * v)
}

/// `m x'' + γ x' + γ (t−a) x'' − F(x)` along a sampled trajectory.
pub fn equation_of_motion_residual(
    sys: &DissipativeSystem,
    a: f64,
    x: &GridFunction,
) -> Result<GridFunction> {
    let d1 = x.derivative();
    let d2 = x.second_derivative();
    let mut r = Vec::with_capacity(x.len());
    for (i, (&t, &xi)) in x.xs().iter().zip(x.ys()).enumerate() {
        r.push(sys.m * d2[i] + sys.gamma * d1[i] + sys.gamma * (t - a) * d2[i] - sys.force(xi)?);
    }
    x.with_values(r)
}

/// The half-order conformable velocity `x'·(t−a)^(1/2)` of a C¹ trajectory.
pub fn half_order_velocity(a: f64, t: f64, xprime: f64) -> f64 {
    xprime * (t - a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalEnergy {
    /// `m x'²/2 + U(x) + γ v²/2`.
    pub h: f64,
    /// Momentum conjugate to `x'`.
    pub p1: f64,
    /// Momentum conjugate to the half-order velocity.
    pub p_half: f64,
}

pub fn canonical_energy(sys: &DissipativeSystem, x: f64, xprime: f64, v_half: f64) -> CanonicalEnergy {
    CanonicalEnergy {
        h: 0.5 * sys.m * xprime * xprime + sys.potential.eval(x) + 0.5 * sys.gamma * v_half * v_half,
        p1: sys.m * xprime,
        p_half: sys.gamma * v_half,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extrapolation {
    Richardson,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSchedule {
    pub widths: Vec<f64>,
    pub extrapolation: Extrapolation,
    /// Number of equally spaced output times on `[0, horizon]`.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    201
}

impl Default for LimitSchedule {
    fn default() -> Self {
        Self {
            widths: vec![0.2, 0.1, 0.05, 0.025],
            extrapolation: Extrapolation::Richardson,
            samples: default_samples(),
        }
    }
}

impl LimitSchedule {
    pub fn new(widths: Vec<f64>, extrapolation: Extrapolation) -> Result<Self> {
        let s = Self {
            widths,
            extrapolation,
            samples: default_samples(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.is_empty() {
            return Err(Error::InvalidArgument("the schedule needs at least one width".into()));
        }
        if self.widths.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument("widths must be positive".into()));
        }
        if self.widths.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidArgument("widths must be strictly decreasing".into()));
        }
        if self.samples < 2 {
            return Err(Error::InvalidArgument("need at least 2 output samples".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub widths: Vec<f64>,
    /// Sup-distance of each width's trajectory to the damped reference.
    pub distances: Vec<f64>,
    pub extrapolated_distance: f64,
}

#[derive(Debug, Clone)]
pub struct LimitSimulation {
    /// Trajectory extrapolated to zero width (or the finest one).
    pub trajectory: GridFunction,
    /// Solution of `m x'' + γ x' = F(x)`.
    pub reference: GridFunction,
    pub per_width: Vec<GridFunction>,
    pub report: ConvergenceReport,
}

fn sample_times(horizon: f64, n: usize) -> Vec<f64> {
    let mut ts: Vec<f64> = (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect();
    ts[n - 1] = horizon;
    ts
}

/// Positions at `times` with the anchor restarted every `width`.
fn windowed_positions(sys: &DissipativeSystem, times: &[f64], width: f64) -> Result<Vec<f64>> {
    let ode = OdeSettings::with_tol(WINDOW_TOL);
    let horizon = times[times.len() - 1];
    let mut state = [sys.x0, sys.v0];
    let mut out = vec![sys.x0];
    let mut next = 1;
    let mut start = 0.0;
    let mut k = 0usize;
    while start < horizon {
        k += 1;
        let end = (k as f64 * width).min(horizon);
        let first = next;
        while next < times.len() && times[next] <= end {
            next += 1;
        }
        let mut outputs: Vec<f64> = times[first..next].to_vec();
        outputs.push(end);
        let a = start;
        let states = integrate(
            |t, u, du| {
                du[0] = u[1];
                du[1] = sys.acceleration(t - a, u[0], u[1])?;
                Ok(())
            },
            start,
            &state,
            &outputs,
            &ode,
        )?;
        out.extend(states[..states.len() - 1].iter().map(|u| u[0]));
        let last = &states[states.len() - 1];
        state = [last[0], last[1]];
        start = end;
    }
    Ok(out)
}

fn reference_positions(sys: &DissipativeSystem, times: &[f64]) -> Result<Vec<f64>> {
    let states = integrate(
        |_, u, du| {
            du[0] = u[1];
            du[1] = sys.acceleration(0.0, u[0], u[1])?;
            Ok(())
        },
        0.0,
        &[sys.x0, sys.v0],
        &times[1..],
        &OdeSettings::with_tol(WINDOW_TOL * 1e-2),
    )?;
    let mut out = vec![sys.x0];
    out.extend(states.iter().map(|u| u[0]));
    Ok(out)
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Integrates the windowed friction dynamics for every width in the schedule
/// and extrapolates the trajectories to zero width.
pub fn simulate_with_limit(
    sys: &DissipativeSystem,
    horizon: f64,
    sched: &LimitSchedule,
) -> Result<LimitSimulation> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    sched.validate()?;
    let times = sample_times(horizon, sched.samples);
    let tag = |ys: Vec<f64>| GridFunction::new(times.clone(), ys, Order::ONE, Anchor::left(0.0));
    let reference = reference_positions(sys, &times)?;
    let runs = sched
        .widths
        .iter()
        .map(|&w| windowed_positions(sys, &times, w))
        .collect::<Result<Vec<_>>>()?;
    let distances: Vec<f64> = runs.iter().map(|r| sup_gap(r, &reference)).collect();
    let settled = distances.iter().all(|&d| d <= DISTANCE_FLOOR);
    if !settled {
        if let Some(i) = (2..distances.len()).find(|&i| !(distances[i] < distances[i - 1])) {
            return Err(Error::NoConvergence(format!(
                "distance to the damped reference grew from {:e} at width {} to {:e} at width {}",
                distances[i - 1],
                sched.widths[i - 1],
                distances[i],
                sched.widths[i]
            )));
        }
    }
    let extrapolated: Vec<f64> = match sched.extrapolation {
        Extrapolation::Richardson if runs.len() > 1 => (0..times.len())
            .map(|j| {
                let column: Vec<f64> = runs.iter().map(|r| r[j]).collect();
                polynomial_extrapolate_to_zero(&sched.widths, &column)
            })
            .collect(),
        _ => runs[runs.len() - 1].clone(),
    };
    let report = ConvergenceReport {
        widths: sched.widths.clone(),
        distances,
        extrapolated_distance: sup_gap(&extrapolated, &reference),
    };
    Ok(LimitSimulation {
        trajectory: tag(extrapolated)?,
        reference: tag(reference)?,
        per_width: runs.into_iter().map(tag).collect::<Result<_>>()?,
        report,
    })
}
