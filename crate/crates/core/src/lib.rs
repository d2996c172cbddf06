//! Delayed pursuit law `X_i'(t) = F(X_{i+1}(t - tau_i) - X_i(t - tau_i))`
//! and its macroscopic limit `u_t = F(u_x)`.
//!
//! The crate integrates the micro system by the method of steps, solves the
//! Hamilton-Jacobi equation with a monotone scheme, audits the strict
//! comparison principle with admissible spacing functions, and runs
//! homogenization studies including the oscillating counter-example.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix double precision.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comparison;
pub mod dde;
pub mod defaults;
pub mod error;
pub mod field;
pub mod homogenization;
pub mod macro_hj;
pub mod model;
pub mod scalar;
pub mod thresholds;

pub use comparison::{
    check_spacing_hypothesis, disruption_closed_form, order_conservation_audit, order_disruption_pair,
    paired_order_audit, verify_conclusion, AuditReport, ComparisonWindow, Crossing,
};
pub use dde::{integrate, integrate_system, GapSeries, MicroSystem, TrajectorySet};
pub use error::{Error, Result};
pub use field::{sup_error, FieldGrid, Region};
pub use homogenization::{
    convergence_study, counterexample_drift, oscillation_oracle, rescale_field, ConvergenceRecord, EpsilonField,
    OscillationParams, Verdict,
};
pub use macro_hj::{solve_hj, HjGrid};
pub use model::{
    validate_scenario, DelayProfile, InitialHistory, Scenario, Truncation, ValidationReport, VelocityProfile,
};
pub use scalar::Scalar;
pub use thresholds::{
    constant_rho_threshold, construct_rho, homogenization_threshold, verify_condrho, Certificate, RhoFunction,
};

pub type Scenario64 = Scenario<f64>;
pub type VelocityProfile64 = VelocityProfile<f64>;
pub type DelayProfile64 = DelayProfile<f64>;
pub type InitialHistory64 = InitialHistory<f64>;
pub type TrajectorySet64 = TrajectorySet<f64>;
pub type FieldGrid64 = FieldGrid<f64>;
pub type Region64 = Region<f64>;
pub type RhoFunction64 = RhoFunction<f64>;
pub type ComparisonWindow64 = ComparisonWindow<f64>;
pub type AuditReport64 = AuditReport<f64>;
pub type ConvergenceRecord64 = ConvergenceRecord<f64>;
pub type OscillationParams64 = OscillationParams<f64>;

pub type Scenario32 = Scenario<f32>;
pub type TrajectorySet32 = TrajectorySet<f32>;
pub type FieldGrid32 = FieldGrid<f32>;
