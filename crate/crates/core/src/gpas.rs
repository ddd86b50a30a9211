//! The Gamma Poisson Approximation Scheme.
//!
//! Counts `N_1, N_2, ...` drawn from a Poisson(μ) source are read as the
//! numbers of points a rate-μ Poisson point process places in the unit
//! intervals `[0,1), [1,2), ...`. Once the running total reaches `k`, the
//! interval `[i, i+1)` holding the k-th point is known, and its position
//! inside the interval is the `(k - A)`-th order statistic of `N_i` uniforms,
//! a Beta draw. The k-th arrival time `T'` is then exactly Gamma(k, μ)
//! distributed, so `μ̂ = (k-1)/T'` is Inverse-Gamma(k, (k-1)μ): unbiased,
//! with standard deviation `μ/sqrt(k-2)` and a relative error whose law is
//! free of μ.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{
    gamma_quantile, reg_lower_gamma, reg_upper_gamma, sample_bernoulli, sample_beta,
    sample_poisson, RngStream,
};

/// Per-run draw budget for synthetic sources.
pub const DEFAULT_MAX_CALLS: u64 = 1_000_000;
/// Largest k the calibration search will consider.
pub const DEFAULT_K_CAP: u64 = 10_000_000;

/// A stream of iid Poisson counts with a common unknown mean.
pub trait PoissonSource {
    fn next_count(&mut self) -> Result<u64>;

    /// Number of counts handed out so far.
    fn call_count(&self) -> u64;

    /// Budget on the number of draws a single estimator run may consume.
    fn max_calls(&self) -> Option<u64> {
        None
    }
}

impl<S: PoissonSource + ?Sized> PoissonSource for &mut S {
    fn next_count(&mut self) -> Result<u64> {
        (**self).next_count()
    }

    fn call_count(&self) -> u64 {
        (**self).call_count()
    }

    fn max_calls(&self) -> Option<u64> {
        (**self).max_calls()
    }
}

/// Poisson(μ) counts from the crate's own sampler.
#[derive(Debug, Clone)]
pub struct SyntheticPoisson {
    mu: f64,
    rng: RngStream,
    calls: u64,
    max_calls: Option<u64>,
}

impl SyntheticPoisson {
    pub fn new(mu: f64, rng: RngStream) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(domain("mu", mu, "[0, inf)"));
        }
        Ok(Self {
            mu,
            rng,
            calls: 0,
            max_calls: Some(DEFAULT_MAX_CALLS),
        })
    }

    pub fn with_max_calls(mut self, max_calls: Option<u64>) -> Self {
        self.max_calls = max_calls;
        self
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl PoissonSource for SyntheticPoisson {
    fn next_count(&mut self) -> Result<u64> {
        self.calls += 1;
        sample_poisson(&mut self.rng, self.mu)
    }

    fn call_count(&self) -> u64 {
        self.calls
    }

    fn max_calls(&self) -> Option<u64> {
        self.max_calls
    }
}

/// Replays a fixed list of counts, then zeros.
#[derive(Debug, Clone, Default)]
pub struct ScriptedSource {
    counts: VecDeque<u64>,
    calls: u64,
    max_calls: Option<u64>,
}

impl ScriptedSource {
    pub fn new(counts: impl IntoIterator<Item = u64>) -> Self {
        Self {
            counts: counts.into_iter().collect(),
            calls: 0,
            max_calls: Some(DEFAULT_MAX_CALLS),
        }
    }

    pub fn with_max_calls(mut self, max_calls: Option<u64>) -> Self {
        self.max_calls = max_calls;
        self
    }
}

impl PoissonSource for ScriptedSource {
    fn next_count(&mut self) -> Result<u64> {
        self.calls += 1;
        Ok(self.counts.pop_front().unwrap_or(0))
    }

    fn call_count(&self) -> u64 {
        self.calls
    }

    fn max_calls(&self) -> Option<u64> {
        self.max_calls
    }
}

/// Outcome of one estimator run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpasResult {
    pub k: u64,
    /// Arrival time of the k-th point; `μ · t_prime ~ Gamma(k, 1)`.
    pub t_prime: f64,
    /// `(k - 1) / t_prime`.
    pub mu_hat: f64,
    pub draws_used: u64,
}

impl GpasResult {
    pub fn relative_error(&self, mu: f64) -> f64 {
        self.mu_hat / mu - 1.0
    }
}

/// Runs the estimator with arrival index `k` against `source`.
///
/// `rng` supplies the Beta draw that places the k-th point inside its unit
/// interval; the source owns whatever randomness produces the counts.
pub fn gpas<S: PoissonSource + ?Sized>(
    source: &mut S,
    k: u64,
    rng: &mut RngStream,
) -> Result<GpasResult> {
    if k < 2 {
        return Err(domain("k", k as f64, "integers >= 2"));
    }
    let budget = source.max_calls();
    let mut accumulated = 0u64;
    let mut interval = 0u64;
    let mut draws = 0u64;
    loop {
        if let Some(max_calls) = budget {
            if draws >= max_calls {
                return Err(Error::BudgetExceeded {
                    max_calls,
                    accumulated,
                    target: k,
                });
            }
        }
        let count = source.next_count()?;
        draws += 1;
        if accumulated.saturating_add(count) >= k {
            let needed = k - accumulated;
            let beyond = count - needed + 1;
            assert!(needed >= 1 && beyond >= 1, "Beta parameters must be >= 1");
            let t_prime = interval as f64 + sample_beta(rng, needed, beyond)?;
            return Ok(GpasResult {
                k,
                t_prime,
                mu_hat: (k - 1) as f64 / t_prime,
                draws_used: draws,
            });
        }
        accumulated += count;
        interval += 1;
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(domain("epsilon", epsilon, "(0, 1)"))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(domain("delta", delta, "(0, 1)"))
    }
}

/// Exact probability that `|μ̂_k / μ - 1| > ε`.
///
/// With `G ~ Gamma(k, k-1)` standing for `μ / μ̂_k`, this is
/// `P(G < 1/(1+ε)) + P(G > 1/(1-ε))`.
pub fn failure_probability(k: u64, epsilon: f64) -> Result<f64> {
    if k < 2 {
        return Err(domain("k", k as f64, "integers >= 2"));
    }
    check_epsilon(epsilon)?;
    let shape = k as f64;
    let rate = (k - 1) as f64;
    let low = reg_lower_gamma(shape, rate / (1.0 + epsilon))?;
    let high = reg_upper_gamma(shape, rate / (1.0 - epsilon))?;
    Ok(low + high)
}

/// Arrival index selection that makes the failure probability exactly δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub epsilon: f64,
    pub delta: f64,
    /// Smallest k >= 3 with `f_k <= delta`.
    pub k: u64,
    /// Probability of running with `k - 1` instead of `k`.
    pub p: f64,
    pub f_k: f64,
    pub f_km1: f64,
}

impl Calibration {
    /// Failure probability of the randomized choice between `k - 1` and `k`.
    pub fn mixed_failure(&self) -> f64 {
        self.p * self.f_km1 + (1.0 - self.p) * self.f_k
    }

    /// Draws the arrival index actually used for one run.
    pub fn choose_k(&self, rng: &mut RngStream) -> u64 {
        if sample_bernoulli(rng, self.p).expect("p is a probability") {
            self.k - 1
        } else {
            self.k
        }
    }

    /// Expected arrival index `k - p`.
    pub fn expected_k(&self) -> f64 {
        self.k as f64 - self.p
    }
}

pub fn calibrate(epsilon: f64, delta: f64) -> Result<Calibration> {
    calibrate_with_cap(epsilon, delta, DEFAULT_K_CAP)
}

/// Finds the smallest `k >= 3` with `failure_probability(k, ε) <= δ` by
/// doubling then bisection.
///
/// The search relies on `f_k` decreasing in k. Every probe is checked
/// against the others; an out-of-order pair aborts with `SearchFailed`.
pub fn calibrate_with_cap(epsilon: f64, delta: f64, k_cap: u64) -> Result<Calibration> {
    check_epsilon(epsilon)?;
    check_delta(delta)?;
    if k_cap < 3 {
        return Err(domain("k_cap", k_cap as f64, "integers >= 3"));
    }

    let mut probes: BTreeMap<u64, f64> = BTreeMap::new();
    let mut probe = |k: u64| -> Result<f64> {
        if let Some(&f) = probes.get(&k) {
            return Ok(f);
        }
        let f = failure_probability(k, epsilon)?;
        let before = probes.range(..k).next_back().map(|(_, &v)| v);
        let after = probes.range(k + 1..).next().map(|(_, &v)| v);
        if before.is_some_and(|b| b < f) || after.is_some_and(|a| a > f) {
            return Err(Error::SearchFailed(format!(
                "failure probability is not monotone in k near k = {k} (epsilon = {epsilon})"
            )));
        }
        probes.insert(k, f);
        Ok(f)
    };

    let k = if probe(3)? <= delta {
        3
    } else {
        let mut lo = 3u64;
        let mut hi = 6u64;
        loop {
            if probe(hi)? <= delta {
                break;
            }
            if hi >= k_cap {
                return Err(Error::SearchFailed(format!(
                    "no k <= {k_cap} reaches failure probability {delta} at epsilon = {epsilon}"
                )));
            }
            lo = hi;
            hi = hi.saturating_mul(2).min(k_cap);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if probe(mid)? <= delta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };

    let f_k = probe(k)?;
    let f_km1 = probe(k - 1)?;
    // At k = 3 the neighbour can already satisfy δ; k never drops below 3 then.
    let p = if f_km1 > delta {
        ((delta - f_k) / (f_km1 - f_k)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(Calibration {
        epsilon,
        delta,
        k,
        p,
        f_k,
        f_km1,
    })
}

/// Calibrates for (ε, δ) and runs the estimator with the randomized k.
pub fn exact_gpas<S: PoissonSource + ?Sized>(
    source: &mut S,
    epsilon: f64,
    delta: f64,
    rng: &mut RngStream,
) -> Result<GpasResult> {
    let calibration = calibrate(epsilon, delta)?;
    exact_gpas_calibrated(source, &calibration, rng)
}

/// Same as [`exact_gpas`] with a precomputed calibration.
pub fn exact_gpas_calibrated<S: PoissonSource + ?Sized>(
    source: &mut S,
    calibration: &Calibration,
    rng: &mut RngStream,
) -> Result<GpasResult> {
    let k = calibration.choose_k(rng);
    gpas(source, k, rng)
}

/// Interval for μ, with its exact coverage probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub coverage: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    /// Image of the interval under an increasing map.
    pub fn map_increasing(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            lower: f(self.lower),
            upper: f(self.upper),
            coverage: self.coverage,
        }
    }
}

/// Equal-tailed interval from `μ · T' ~ Gamma(k, 1)`.
pub fn confidence_interval(result: &GpasResult, coverage: f64) -> Result<ConfidenceInterval> {
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(domain("coverage", coverage, "(0, 1)"));
    }
    let shape = result.k as f64;
    let tail = (1.0 - coverage) / 2.0;
    let lo = gamma_quantile(shape, 1.0, tail)?;
    let hi = gamma_quantile(shape, 1.0, 1.0 - tail)?;
    Ok(ConfidenceInterval {
        lower: lo / result.t_prime,
        upper: hi / result.t_prime,
        coverage,
    })
}

/// The interval `[μ̂/(1+ε), μ̂/(1-ε)]`, which holds μ exactly when the
/// relative error is at most ε; its coverage is `1 - failure_probability`.
pub fn relative_error_interval(result: &GpasResult, epsilon: f64) -> Result<ConfidenceInterval> {
    let failure = failure_probability(result.k, epsilon)?;
    Ok(ConfidenceInterval {
        lower: result.mu_hat / (1.0 + epsilon),
        upper: result.mu_hat / (1.0 - epsilon),
        coverage: 1.0 - failure,
    })
}
