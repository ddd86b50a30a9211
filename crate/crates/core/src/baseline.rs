//! Fixed-sample comparison arm calibrated with Chernoff bounds.
//!
//! For `S ~ Poisson(nμ)`, `P(S >= (1+ε)nμ) <= exp(-nμ h(ε))` and
//! `P(S <= (1-ε)nμ) <= exp(-nμ h(-ε))` with `h(x) = (1+x)ln(1+x) - x`.
//! Since `h(ε) < h(-ε)`, taking `n = ceil(ln(2/δ) / (μ h(ε)))` draws makes
//! the sample mean an (ε, δ)-approximation. The sample size needs μ, so the
//! arm is handed the true mean; that only flatters it.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::gpas::PoissonSource;
use crate::tpa::phase_two_epsilon;

fn chernoff_rate(epsilon: f64) -> f64 {
    (1.0 + epsilon) * epsilon.ln_1p() - epsilon
}

/// Number of fixed draws needed for an (ε, δ) sample mean of Poisson(μ) counts.
pub fn chernoff_sample_size(mu: f64, epsilon: f64, delta: f64) -> Result<u64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(domain("mu", mu, "(0, inf)"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain("epsilon", epsilon, "(0, 1)"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain("delta", delta, "(0, 1)"));
    }
    Ok(((2.0 / delta).ln() / (mu * chernoff_rate(epsilon))).ceil().max(1.0) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineReport {
    pub r_hat1: f64,
    pub r_hat2: f64,
    pub epsilon2: f64,
    pub phase1_calls: u64,
    pub phase2_calls: u64,
    pub total_calls: u64,
}

fn sample_mean<S: PoissonSource + ?Sized>(source: &mut S, n: u64) -> Result<f64> {
    let mut total = 0u64;
    for _ in 0..n {
        total += source.next_count()?;
    }
    Ok(total as f64 / n as f64)
}

/// Two-phase scheme with fixed Chernoff sample sizes in place of the exact estimator.
pub fn chernoff_two_phase<S: PoissonSource + ?Sized>(
    source: &mut S,
    mu: f64,
    epsilon: f64,
    delta: f64,
) -> Result<BaselineReport> {
    let half = delta / 2.0;
    let n1 = chernoff_sample_size(mu, epsilon, half)?;
    let r_hat1 = sample_mean(source, n1)?;
    if r_hat1 == 0.0 {
        return Err(Error::DegenerateRatio { max_calls: n1 });
    }
    let epsilon2 = phase_two_epsilon(epsilon, r_hat1)?;
    let n2 = chernoff_sample_size(mu, epsilon2, half)?;
    let r_hat2 = sample_mean(source, n2)?;
    Ok(BaselineReport {
        r_hat1,
        r_hat2,
        epsilon2,
        phase1_calls: n1,
        phase2_calls: n2,
        total_calls: n1 + n2,
    })
}
