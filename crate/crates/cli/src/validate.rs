//! Statistical self-check of the estimator, the calibration and TPA.
//!
//! Every property is a test at significance 0.001 (two-sided unless noted),
//! run on its own RNG seed derived from the user's seed.

use serde::Serialize;

use gpas_core::gpas::{
    calibrate, confidence_interval, exact_gpas_calibrated, gpas, GpasResult, SyntheticPoisson,
};
use gpas_core::ising::{build_histogram, IsingFamily, LatticeGraph};
use gpas_core::numerics::{ln_gamma, reg_lower_gamma};
use gpas_core::replicate::run_replicates;
use gpas_core::stats::{binomial_sigma, chi_square_discrete, ks_one_sample, ks_two_sample, Summary};
use gpas_core::tpa::{tpa_run, two_phase};

use crate::CliError;

pub const SIGNIFICANCE: f64 = 0.001;
/// Two-sided normal quantile at [`SIGNIFICANCE`].
const Z: f64 = 3.290_526_731_491_926;
/// Below this many replicates the suite reports but does not judge.
pub const MIN_REPLICATES: usize = 100;
/// TPA runs per replicate for the 2×2 Poisson checks.
const TPA_RUNS_PER_REPLICATE: usize = 100;

#[derive(Debug, Serialize)]
pub struct PropertyResult {
    pub name: String,
    /// `pass`, `fail` or `insufficient_replicates`.
    pub status: &'static str,
    pub statistic: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct ValidateOutput {
    pub command: &'static str,
    pub seed: u64,
    pub replicates: usize,
    pub significance: f64,
    pub all_passed: bool,
    pub warnings: Vec<String>,
    pub properties: Vec<PropertyResult>,
}

struct Check {
    name: String,
    statistic: f64,
    threshold: f64,
    passed: bool,
    detail: String,
}

fn property_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn synthetic_gpas(seed: u64, n: usize, mu: f64, k: u64) -> Result<Vec<GpasResult>, CliError> {
    run_replicates(seed, n, |s| {
        let mut source = SyntheticPoisson::new(mu, s.source)?;
        let mut rng = s.estimator;
        gpas(&mut source, k, &mut rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(CliError::from)
}

fn gamma_law(seed: u64, n: usize, mu: f64, k: u64) -> Result<Check, CliError> {
    let mut scaled: Vec<f64> = synthetic_gpas(seed, n, mu, k)?
        .iter()
        .map(|r| mu * r.t_prime)
        .collect();
    let ks = ks_one_sample(&mut scaled, |t| {
        reg_lower_gamma(k as f64, t.max(0.0)).unwrap_or(f64::NAN)
    });
    Ok(Check {
        name: format!("gamma_law_mu{mu}_k{k}"),
        statistic: ks.statistic,
        threshold: ks.critical_value(SIGNIFICANCE),
        passed: !ks.rejects_at(SIGNIFICANCE),
        detail: format!("KS of mu*T' vs Gamma({k},1), p = {:.4}", ks.p_value),
    })
}

fn scale_free(seed: u64, n: usize) -> Result<Check, CliError> {
    let k = 100;
    let mut small: Vec<f64> = synthetic_gpas(seed, n, 0.5, k)?
        .iter()
        .map(|r| r.relative_error(0.5))
        .collect();
    let mut large: Vec<f64> = synthetic_gpas(seed ^ 1, n, 10.0, k)?
        .iter()
        .map(|r| r.relative_error(10.0))
        .collect();
    let ks = ks_two_sample(&mut small, &mut large);
    Ok(Check {
        name: "scale_free_relative_error".into(),
        statistic: ks.statistic,
        threshold: ks.critical_value(SIGNIFICANCE),
        passed: !ks.rejects_at(SIGNIFICANCE),
        detail: format!("two-sample KS of mu_hat/mu - 1 at mu = 0.5 vs 10, k = {k}, p = {:.4}", ks.p_value),
    })
}

fn unbiased(seed: u64, n: usize) -> Result<Check, CliError> {
    let (mu, k) = (3.0, 100u64);
    let s = Summary::of(synthetic_gpas(seed, n, mu, k)?.iter().map(|r| r.mu_hat));
    let sigma = mu / ((k - 2) as f64).sqrt();
    let z = (s.mean - mu) / (sigma / (n as f64).sqrt());
    Ok(Check {
        name: "unbiased_mu3_k100".into(),
        statistic: z.abs(),
        threshold: Z,
        passed: z.abs() <= Z,
        detail: format!("mean mu_hat = {:.5}, sd = {:.5} (theory {:.5})", s.mean, s.sd, sigma),
    })
}

fn expected_draws(seed: u64, n: usize) -> Result<Check, CliError> {
    let (mu, k) = (2.0, 50u64);
    let s = Summary::of(synthetic_gpas(seed, n, mu, k)?.iter().map(|r| r.draws_used as f64));
    let bound = 1.0 + k as f64 / mu;
    let z = (s.mean - bound) / s.std_error();
    Ok(Check {
        name: "expected_draws_mu2_k50".into(),
        statistic: z,
        threshold: Z,
        passed: z <= Z,
        detail: format!("mean draws = {:.3} against bound 1 + k/mu = {bound} (one-sided)", s.mean),
    })
}

fn exact_failure_rate(seed: u64, n: usize) -> Result<Check, CliError> {
    let (eps, delta, mu) = (0.3, 0.05, 5.0);
    let cal = calibrate(eps, delta)?;
    let results = run_replicates(seed, n, |s| {
        let mut source = SyntheticPoisson::new(mu, s.source)?;
        let mut rng = s.estimator;
        exact_gpas_calibrated(&mut source, &cal, &mut rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let freq = results.iter().filter(|r| r.relative_error(mu).abs() > eps).count() as f64 / n as f64;
    let z = (freq - delta) / binomial_sigma(delta, n);
    Ok(Check {
        name: "exact_gpas_failure_rate".into(),
        statistic: z.abs(),
        threshold: Z,
        passed: z.abs() <= Z,
        detail: format!("failure frequency {freq:.5} vs delta {delta} at eps {eps}, mu {mu} (k = {}, p = {:.4})", cal.k, cal.p),
    })
}

fn ci_coverage(seed: u64, n: usize) -> Result<Check, CliError> {
    let (mu, k, coverage) = (2.0, 200u64, 0.9);
    let results = synthetic_gpas(seed, n, mu, k)?;
    let mut hits = 0usize;
    for r in &results {
        if confidence_interval(r, coverage)?.contains(mu) {
            hits += 1;
        }
    }
    let freq = hits as f64 / n as f64;
    let z = (freq - coverage) / binomial_sigma(coverage, n);
    Ok(Check {
        name: "ci_coverage_mu2_k200".into(),
        statistic: z.abs(),
        threshold: Z,
        passed: z.abs() <= Z,
        detail: format!("empirical coverage {freq:.5} of nominal {coverage}"),
    })
}

fn tpa_checks(seed: u64, n: usize) -> Result<[Check; 2], CliError> {
    let hist = build_histogram(&LatticeGraph::grid(2, 2)?)?;
    let family = IsingFamily::new(hist);
    let r = family.ln_ratio();
    let counts: Vec<u64> = run_replicates(seed, n, |mut s| {
        (0..TPA_RUNS_PER_REPLICATE)
            .map(|_| tpa_run(&family, &mut s.source))
            .collect::<Result<Vec<_>, _>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?
    .into_iter()
    .flatten()
    .collect();
    let total = counts.len();
    let pmf = |i: u64| (-r + i as f64 * r.ln() - ln_gamma(i as f64 + 1.0)).exp();
    let chi = chi_square_discrete(&counts, pmf, 5.0);
    let s = Summary::of(counts.iter().map(|&c| c as f64));
    let dispersion = s.variance() / s.mean;
    let z = (dispersion - 1.0) / (2.0 / (total as f64 - 1.0)).sqrt();
    Ok([
        Check {
            name: "tpa_poisson_fit_2x2".into(),
            statistic: chi.statistic,
            threshold: SIGNIFICANCE,
            passed: !chi.rejects_at(SIGNIFICANCE),
            detail: format!(
                "chi-square vs Poisson({r:.5}) over {total} runs, dof {}, p = {:.4}",
                chi.dof, chi.p_value
            ),
        },
        Check {
            name: "tpa_dispersion_2x2".into(),
            statistic: z.abs(),
            threshold: Z,
            passed: z.abs() <= Z,
            detail: format!("variance/mean = {dispersion:.5}, mean = {:.5}", s.mean),
        },
    ])
}

fn two_phase_guarantee(seed: u64, n: usize) -> Result<Check, CliError> {
    let (mu, eps, delta) = (15.4, 0.2, 0.1);
    let reports = run_replicates(seed, n, |s| {
        let mut source = SyntheticPoisson::new(mu, s.source)?;
        let mut rng = s.estimator;
        two_phase(&mut source, eps, delta, &mut rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let truth = mu.exp();
    let freq = reports
        .iter()
        .filter(|r| (r.ratio_estimate / truth - 1.0).abs() > eps)
        .count() as f64
        / n as f64;
    let z = (freq - delta) / binomial_sigma(delta, n);
    Ok(Check {
        name: "two_phase_failure_rate".into(),
        statistic: z,
        threshold: Z,
        passed: z <= Z,
        detail: format!("failure frequency {freq:.5} against delta {delta} (one-sided), mu = {mu}, eps = {eps}"),
    })
}

pub fn cmd_validate(replicates: usize, seed: u64) -> Result<ValidateOutput, CliError> {
    if replicates == 0 {
        return Err(CliError::Usage("--replicates must be positive".into()));
    }
    let n = replicates;
    let mut checks: Vec<Check> = Vec::new();
    let mut index = 0u64;
    let mut next_seed = || {
        index += 1;
        property_seed(seed, index)
    };

    for (mu, k) in [(1.0, 50u64), (3.0, 100), (10.0, 500)] {
        eprintln!("validate: gamma law mu = {mu}, k = {k}");
        checks.push(gamma_law(next_seed(), n, mu, k)?);
    }
    eprintln!("validate: scale-free relative error");
    checks.push(scale_free(next_seed(), n)?);
    eprintln!("validate: unbiasedness");
    checks.push(unbiased(next_seed(), n)?);
    eprintln!("validate: expected draws");
    checks.push(expected_draws(next_seed(), n)?);
    eprintln!("validate: exact calibration");
    checks.push(exact_failure_rate(next_seed(), n)?);
    eprintln!("validate: interval coverage");
    checks.push(ci_coverage(next_seed(), n)?);
    eprintln!("validate: TPA on the 2x2 grid");
    checks.extend(tpa_checks(next_seed(), n)?);
    eprintln!("validate: two-phase guarantee");
    checks.push(two_phase_guarantee(next_seed(), n)?);

    let underpowered = replicates < MIN_REPLICATES;
    let mut warnings = Vec::new();
    if underpowered {
        warnings.push(format!(
            "insufficient replicates: {replicates} < {MIN_REPLICATES}; properties are reported but not judged"
        ));
    }
    let properties: Vec<PropertyResult> = checks
        .into_iter()
        .map(|c| PropertyResult {
            status: if underpowered {
                "insufficient_replicates"
            } else if c.passed {
                "pass"
            } else {
                "fail"
            },
            name: c.name,
            statistic: c.statistic,
            threshold: c.threshold,
            detail: c.detail,
        })
        .collect();
    let all_passed = properties.iter().all(|p| p.status != "fail");
    Ok(ValidateOutput {
        command: "validate",
        seed,
        replicates,
        significance: SIGNIFICANCE,
        all_passed,
        warnings,
        properties,
    })
}
