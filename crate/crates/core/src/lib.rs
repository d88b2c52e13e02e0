//! Ground states of the Schrödinger–Newton (Choquard) equation
//! `−Δu + u = V u`, `−ΔV = u²` and of its point-charge Hartree variant.
//!
//! * [`radial`]: sampled radial profiles and the integral functionals.
//! * [`ode`]: adaptive Cash–Karp integration with events and Taylor starts.
//! * [`solver`]: scale-free shooting, tail continuation and unit fixing.
//! * [`asymptotics`]: fits of the tail law `u ≈ A e^{−r} r^β`.
//! * [`bounds`]: closed-form lower and upper certificates on `‖u‖₂²`.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bounds;
pub mod error;
pub mod exec;
pub mod figures;
pub mod ode;
pub mod radial;
pub mod solver;
pub mod special;

pub use asymptotics::{
    consistency_from_parts, consistency_report, exponent_prediction, tail_fit, window_select,
    ConsistencyReport, TailFit, Variant,
};
pub use bounds::{prop1_report, BoundsReport};
pub use error::{Error, Result};
pub use exec::Execution;
pub use radial::{
    FunctionalMode, FunctionalReport, Quantity, RadialGrid, RadialProfile, Representation,
};
pub use solver::{
    hartree_solve, solve_ground_state, GroundState, HartreeConfig, ShootingConfig, Sign,
};
