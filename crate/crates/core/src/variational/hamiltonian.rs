use super::{Lagrangian, Trace, VariationalProblem};
use crate::calculus::weight;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::GridFunction;

/// Hamiltonian `H(x, y, v, p) = −L(x, y, v) + p·φ(x, y, v)`.
///
/// With no dynamics `φ` this is the Legendre form `−L + p·v`.
#[derive(Debug, Clone)]
pub struct HamiltonianField {
    lagrangian: Lagrangian,
    dynamics: Option<ScalarField>,
}

impl HamiltonianField {
    pub fn from_lagrangian(lagrangian: Lagrangian) -> Self {
        Self {
            lagrangian,
            dynamics: None,
        }
    }

    /// Hamiltonian of a control problem with dynamics `φ(x, y, v)`.
    pub fn with_dynamics(lagrangian: Lagrangian, dynamics: ScalarField) -> Result<Self> {
        if dynamics.arity() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: dynamics.arity(),
            });
        }
        Ok(Self {
            lagrangian,
            dynamics: Some(dynamics),
        })
    }

    pub fn lagrangian(&self) -> &Lagrangian {
        &self.lagrangian
    }

    fn phi(&self, z: &[f64; 3]) -> f64 {
        match &self.dynamics {
            Some(d) => d.eval(z),
            None => z[2],
        }
    }

    fn phi_partial(&self, k: usize, z: &[f64; 3]) -> Result<f64> {
        match &self.dynamics {
            Some(d) => d.partial(k, z),
            None => Ok(if k == Lagrangian::V { 1.0 } else { 0.0 }),
        }
    }

    pub fn value(&self, x: f64, y: f64, v: f64, p: f64) -> f64 {
        let z = [x, y, v];
        -self.lagrangian.field().eval(&z) + p * self.phi(&z)
    }

    fn partial(&self, k: usize, x: f64, y: f64, v: f64, p: f64) -> Result<f64> {
        let z = [x, y, v];
        Ok(-self.lagrangian.field().partial(k, &z)? + p * self.phi_partial(k, &z)?)
    }

    pub fn dx(&self, x: f64, y: f64, v: f64, p: f64) -> Result<f64> {
        self.partial(Lagrangian::X, x, y, v, p)
    }

    pub fn dy(&self, x: f64, y: f64, v: f64, p: f64) -> Result<f64> {
        self.partial(Lagrangian::Y, x, y, v, p)
    }

    pub fn dv(&self, x: f64, y: f64, v: f64, p: f64) -> Result<f64> {
        self.partial(Lagrangian::V, x, y, v, p)
    }

    /// `∂H/∂p = φ`.
    pub fn dp(&self, x: f64, y: f64, v: f64, _p: f64) -> f64 {
        self.phi(&[x, y, v])
    }

    /// Second derivative in the control slot, `∂²H/∂v²`.
    pub fn dvv(&self, x: f64, y: f64, v: f64, p: f64) -> Result<f64> {
        let z = [x, y, v];
        let mut out = -self
            .lagrangian
            .field()
            .second_partial(Lagrangian::V, Lagrangian::V, &z)?;
        if let Some(d) = &self.dynamics {
            out += p * d.second_partial(Lagrangian::V, Lagrangian::V, &z)?;
        }
        Ok(out)
    }
}

/// Momentum `p = ∂L/∂v` sampled along a trajectory.
#[derive(Debug, Clone)]
pub struct Momentum {
    pub p: GridFunction,
}

impl Momentum {
    pub fn new(p: GridFunction) -> Self {
        Self { p }
    }

    /// `∂L/∂v` along `y`.
    pub fn along(problem: &VariationalProblem, y: &GridFunction) -> Result<Self> {
        let t = Trace::new(problem.order, problem.a, y)?;
        let mut p = Vec::with_capacity(t.len());
        for i in 0..t.len() {
            p.push(problem.lagrangian.dv(t.xs[i], t.ys[i], t.vs[i])?);
        }
        Ok(Self {
            p: problem.on_grid(&t.xs, p)?,
        })
    }
}

/// Residuals of the Hamiltonian form of the Euler–Lagrange equation.
#[derive(Debug, Clone)]
pub struct HamiltonianResidual {
    /// `y_a^(α) − ∂H/∂p`.
    pub state: GridFunction,
    /// `p_a^(α) + ∂H/∂y`.
    pub costate: GridFunction,
    /// `d_a^α H − ∂H/∂x·(x−a)^(1−α)`; vanishes along extremals.
    pub energy_balance: GridFunction,
    /// `H` along the trajectory.
    pub hamiltonian: GridFunction,
}

pub fn hamiltonian_system_residual(
    problem: &VariationalProblem,
    y: &GridFunction,
    mom: &Momentum,
    h: &HamiltonianField,
) -> Result<HamiltonianResidual> {
    if mom.p.xs() != y.xs() {
        return Err(Error::InvalidGrid(
            "momentum and trajectory must share a grid".into(),
        ));
    }
    let t = Trace::new(problem.order, problem.a, y)?;
    let n = t.len();
    let ps = mom.p.ys();
    let l = &problem.lagrangian;
    for i in 0..n {
        let expected = l.dv(t.xs[i], t.ys[i], t.vs[i])?;
        if (ps[i] - expected).abs() > 1e-6 * expected.abs().max(1.0) {
            return Err(Error::InconsistentMomentum(format!(
                "p = {} but dL/dv = {expected} at x = {}",
                ps[i], t.xs[i]
            )));
        }
    }
    let (mut state, mut hy, mut hv, mut hx) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let (x, yy, v, p) = (t.xs[i], t.ys[i], t.vs[i], ps[i]);
        state[i] = v - h.dp(x, yy, v, p);
        hy[i] = h.dy(x, yy, v, p)?;
        hv[i] = h.value(x, yy, v, p);
        hx[i] = h.dx(x, yy, v, p)? * weight(problem.order, x - problem.a);
    }
    let dp = t.alpha_derivative(ps);
    let dh = t.alpha_derivative(&hv);
    let costate = dp.iter().zip(&hy).map(|(a, b)| a + b).collect();
    let energy = dh.iter().zip(&hx).map(|(a, b)| a - b).collect();
    Ok(HamiltonianResidual {
        state: problem.on_grid(&t.xs, state)?,
        costate: problem.on_grid(&t.xs, costate)?,
        energy_balance: problem.on_grid(&t.xs, energy)?,
        hamiltonian: problem.on_grid(&t.xs, hv)?,
    })
}
