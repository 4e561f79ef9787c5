//! Control-systems simulation toolkit for single-prediction-point algebraic
//! MPC and its L1 adaptive augmentation on a linear time-varying booster
//! re-entry model.
//!
//! Modules:
//! * [`matlib`] — dense small-matrix linear algebra with an exact
//!   eigendecomposition matrix exponential and a series oracle.
//! * [`vehicle`] — the LTV short-period plant, derivative schedules, and the
//!   reference command profile.
//! * [`ampc`] — single-point algebraic MPC gain computation and control law.
//! * [`l1`] — L1 adaptive augmentation (state predictor, piecewise-constant
//!   adaptive law, filtered control law).
//! * [`refmpc`] — conventional multi-point MPC baseline for timing
//!   comparisons.
//! * [`simkit`] — scenario engine integrating the true plant with injected
//!   mismatch, input-gain scaling, disturbances, and loop delay.
//! * [`analysis`] — tracking-error norm, Monte Carlo campaign, time-delay
//!   margins, LTI margins, and the timing benchmark.

pub mod ampc;
pub mod analysis;
pub mod l1;
pub mod matlib;
pub mod refmpc;
pub mod simkit;
pub mod vehicle;
