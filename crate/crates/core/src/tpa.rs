//! TPA (the Tootsie Pop Algorithm) for Gibbs families, and the two-phase
//! (ε, δ) scheme for the ratio `Z(beta_outer) / Z(beta_inner)`.
//!
//! For `Z(β) = Σ_x exp(β H(x))` with `H >= 0`, the sets
//! `{(x, y) : 0 <= y <= exp(β H(x))}` are nested in β. A uniform point of the
//! set at β is `X ~ Gibbs(β)` with `y = U exp(β H(X))`, and the smallest β'
//! whose set still holds it is `β + ln(U) / H(X)`. Counting the steps that
//! stay above `beta_inner` gives a Poisson(ln(Z(outer)/Z(inner))) variate.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gpas::{
    calibrate, confidence_interval, exact_gpas_calibrated, ConfidenceInterval, PoissonSource,
    DEFAULT_MAX_CALLS,
};
use crate::numerics::RngStream;

pub const DEFAULT_ITERATION_CAP: u64 = 1_000_000;

/// Largest phase-two precision; keeps `1/(1 - ε₂)` finite.
const MAX_PHASE_TWO_EPSILON: f64 = 1.0 - 1e-9;

/// A family of Gibbs distributions `π_β(x) ∝ exp(β H(x))` that can be sampled
/// through its Hamiltonian alone.
pub trait NestedGibbsFamily: Sync {
    /// `H(X)` for `X ~ π_β`.
    fn sample_hamiltonian(&self, beta: f64, rng: &mut RngStream) -> f64;

    fn beta_outer(&self) -> f64;

    fn beta_inner(&self) -> f64;

    fn max_hamiltonian(&self) -> f64;
}

/// One TPA run: the number of β steps that stay strictly above `beta_inner`.
pub fn tpa_run<F: NestedGibbsFamily + ?Sized>(family: &F, rng: &mut RngStream) -> Result<u64> {
    tpa_run_observed(family, rng, DEFAULT_ITERATION_CAP, |_| {})
}

/// [`tpa_run`] with an explicit step cap, reporting every visited β to `observe`.
pub fn tpa_run_observed<F: NestedGibbsFamily + ?Sized>(
    family: &F,
    rng: &mut RngStream,
    iteration_cap: u64,
    mut observe: impl FnMut(f64),
) -> Result<u64> {
    let inner = family.beta_inner();
    let mut beta = family.beta_outer();
    observe(beta);
    for count in 0..iteration_cap {
        let h = family.sample_hamiltonian(beta, rng);
        if h <= 0.0 {
            // ln(U)/H -> -inf
            return Ok(count);
        }
        beta += rng.open_uniform().ln() / h;
        observe(beta);
        if beta <= inner {
            return Ok(count);
        }
    }
    Err(Error::IterationCap(iteration_cap))
}

/// A [`PoissonSource`] whose counts are TPA runs on a Gibbs family.
pub struct TpaSource<'a, F: ?Sized> {
    family: &'a F,
    rng: RngStream,
    calls: u64,
    max_calls: Option<u64>,
    iteration_cap: u64,
}

impl<'a, F: NestedGibbsFamily + ?Sized> TpaSource<'a, F> {
    pub fn new(family: &'a F, rng: RngStream) -> Self {
        Self {
            family,
            rng,
            calls: 0,
            max_calls: Some(DEFAULT_MAX_CALLS),
            iteration_cap: DEFAULT_ITERATION_CAP,
        }
    }

    pub fn with_max_calls(mut self, max_calls: Option<u64>) -> Self {
        self.max_calls = max_calls;
        self
    }

    pub fn with_iteration_cap(mut self, cap: u64) -> Self {
        self.iteration_cap = cap;
        self
    }
}

impl<F: NestedGibbsFamily + ?Sized> PoissonSource for TpaSource<'_, F> {
    fn next_count(&mut self) -> Result<u64> {
        self.calls += 1;
        tpa_run_observed(self.family, &mut self.rng, self.iteration_cap, |_| {})
    }

    fn call_count(&self) -> u64 {
        self.calls
    }

    fn max_calls(&self) -> Option<u64> {
        self.max_calls
    }
}

/// Relative precision on `r` that gives relative precision `ε` on `e^r`.
///
/// `e^{r̂}` is within a factor `1 ± ε` of `e^r` iff `r̂ - r` lies in
/// `[ln(1-ε), ln(1+ε)]`; the upper side is the narrower one.
/// Any `ε > 0` is accepted here; the two-phase scheme itself needs `ε < 1`.
pub fn relative_error_transfer(epsilon: f64, r: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(domain("epsilon", epsilon, "(0, inf)"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain("r", r, "(0, inf)"));
    }
    Ok(epsilon.ln_1p() / r)
}

/// Phase-two precision `ln(1+ε)(1-ε)/r̂₁`, clamped below 1.
pub fn phase_two_epsilon(epsilon: f64, r_hat1: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain("epsilon", epsilon, "(0, 1)"));
    }
    let transfer = relative_error_transfer(epsilon, r_hat1)?;
    Ok((transfer * (1.0 - epsilon)).min(MAX_PHASE_TWO_EPSILON))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpaReport {
    pub epsilon: f64,
    pub delta: f64,
    pub r_hat1: f64,
    pub r_hat2: f64,
    pub epsilon2: f64,
    /// Arrival indices actually used in each phase.
    pub k1: u64,
    pub k2: u64,
    /// `exp(r_hat2)`.
    pub ratio_estimate: f64,
    /// Exact `1 - δ` interval for the ratio.
    pub ci: ConfidenceInterval,
    pub phase1_calls: u64,
    pub phase2_calls: u64,
    pub total_tpa_calls: u64,
}

/// Two-phase (ε, δ)-approximation of `e^r` from any source of Poisson(r) counts.
///
/// Phase one runs the exact estimator at (ε, δ/2) to get `r̂₁`; phase two
/// runs it at (ε₂, δ/2) with `ε₂ = ln(1+ε)(1-ε)/r̂₁` and reports `exp(r̂₂)`.
pub fn two_phase<S: PoissonSource + ?Sized>(
    source: &mut S,
    epsilon: f64,
    delta: f64,
    rng: &mut RngStream,
) -> Result<TpaReport> {
    let half = delta / 2.0;
    let cal1 = calibrate(epsilon, half)?;
    let phase1 = exact_gpas_calibrated(source, &cal1, rng).map_err(|e| match e {
        Error::BudgetExceeded { max_calls, .. } => Error::DegenerateRatio { max_calls },
        other => other,
    })?;

    let epsilon2 = phase_two_epsilon(epsilon, phase1.mu_hat)?;
    let cal2 = calibrate(epsilon2, half)?;
    let phase2 = exact_gpas_calibrated(source, &cal2, rng)?;

    let ci = confidence_interval(&phase2, 1.0 - delta)?.map_increasing(f64::exp);
    Ok(TpaReport {
        epsilon,
        delta,
        r_hat1: phase1.mu_hat,
        r_hat2: phase2.mu_hat,
        epsilon2,
        k1: phase1.k,
        k2: phase2.k,
        ratio_estimate: phase2.mu_hat.exp(),
        ci,
        phase1_calls: phase1.draws_used,
        phase2_calls: phase2.draws_used,
        total_tpa_calls: phase1.draws_used + phase2.draws_used,
    })
}

/// [`two_phase`] on TPA runs of `family`. `source_rng` drives TPA, `rng` the estimator.
pub fn two_phase_scheme<F: NestedGibbsFamily + ?Sized>(
    family: &F,
    epsilon: f64,
    delta: f64,
    source_rng: RngStream,
    rng: &mut RngStream,
) -> Result<TpaReport> {
    let mut source = TpaSource::new(family, source_rng);
    two_phase(&mut source, epsilon, delta, rng)
}
