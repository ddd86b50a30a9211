//! Sequential estimation of Poisson means with an exactly known relative-error law.
//!
//! The estimator ([`gpas::gpas`]) turns a stream of Poisson(μ) counts into the
//! k-th arrival time of a rate-μ Poisson point process. Its output `(k-1)/T'`
//! is Inverse-Gamma(k, (k-1)μ), so `μ̂/μ - 1` has a law that does not depend
//! on μ. That makes exact (ε, δ) calibration ([`gpas::calibrate`]) and exact
//! confidence intervals possible, and lets TPA ([`tpa`]) produce
//! (ε, δ)-approximations of normalizing-constant ratios.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod error;
pub mod gpas;
pub mod ising;
pub mod numerics;
pub mod replicate;
pub mod stats;
pub mod tpa;

pub use error::{Error, Result};
