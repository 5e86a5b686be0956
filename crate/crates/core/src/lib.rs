//! Conformable fractional calculus and its variational theory.
//!
//! The crate provides left and right conformable derivatives and integrals,
//! Euler–Lagrange and DuBois–Reymond residuals with a shooting solver for
//! extremals, Noether invariance checks, fractional optimal control through
//! the Hamiltonian system, a frictional action principle, and the
//! two-dimensional Green's theorem.

pub mod calculus;
pub mod cli;
pub mod control;
pub mod dissipative;
pub mod error;
pub mod field;
pub mod function;
pub mod grid;
pub mod multidim;
pub mod noether;
pub mod ode;
pub mod quadrature;
pub mod richardson;
pub mod variational;

pub use calculus::{
    chain_rule_residual, fundamental_theorem_residual, inverse_residual, left_deriv,
    left_integral, multivar_chain_residual, parts_residual, right_deriv, right_integral, Anchor,
    ChainCase, Order, PartsMode, Side,
};
pub use error::{Error, Result};
pub use function::{FunctionHandle, MultiFunction};
pub use grid::GridFunction;
pub use multidim::{
    double_integral, el2d_residual, green_residual, invariance2d_residual, parts2d_residual,
    partial_alpha, Axis, Field2D, Lagrangian2D, Rectangle, Slot2D, TransformationFamily2D,
};
pub use quadrature::QuadratureSettings;
pub use field::ScalarField;
pub use variational::{
    action_value, dubois_reymond_residual, el_residual, energy_function, generalized_el_residual,
    solve_extremal,
    Extremal, HamiltonianField, Lagrangian, MixedLagrangian, Momentum, SolverSettings,
    VariationalProblem,
};
