//! Command implementations. Each returns a serializable payload; printing
//! and exit codes are handled by the caller.

use std::path::PathBuf;

use serde::Serialize;

use gpas_core::baseline::chernoff_two_phase;
use gpas_core::gpas::{
    calibrate, PoissonSource, confidence_interval, exact_gpas_calibrated, gpas, relative_error_interval,
    Calibration, ConfidenceInterval, SyntheticPoisson,
};
use gpas_core::ising::{build_histogram, partition_function, IsingFamily, LatticeGraph};
use gpas_core::numerics::RngStream;
use gpas_core::replicate::run_replicates;
use gpas_core::stats::Summary;
use gpas_core::tpa::{two_phase, TpaReport, TpaSource};
use gpas_core::Error;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct CalibrateOutput {
    pub command: &'static str,
    pub epsilon: f64,
    pub delta: f64,
    pub k: u64,
    pub p: f64,
    pub f_k: f64,
    pub f_km1: f64,
    /// `p f_{k-1} + (1-p) f_k`.
    pub achieved_failure: f64,
    pub expected_k: f64,
}

pub fn cmd_calibrate(epsilon: f64, delta: f64) -> Result<CalibrateOutput, CliError> {
    let c = calibrate(epsilon, delta)?;
    Ok(CalibrateOutput {
        command: "calibrate",
        epsilon,
        delta,
        k: c.k,
        p: c.p,
        f_k: c.f_k,
        f_km1: c.f_km1,
        achieved_failure: c.mixed_failure(),
        expected_k: c.expected_k(),
    })
}

#[derive(Debug, Serialize)]
pub struct EstimateOutput {
    pub command: &'static str,
    pub mu: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Absent when `k` was fixed on the command line.
    pub calibration: Option<Calibration>,
    pub k: u64,
    pub t_prime: f64,
    pub mu_hat: f64,
    pub draws_used: u64,
    /// Equal-tailed interval at coverage `1 - delta`.
    pub ci: ConfidenceInterval,
    /// `[mu_hat/(1+epsilon), mu_hat/(1-epsilon)]` and its exact coverage.
    pub relative_ci: ConfidenceInterval,
}

pub struct EstimateArgs {
    pub mu: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub k: Option<u64>,
    pub seed: u64,
    pub max_calls: u64,
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<EstimateOutput, CliError> {
    calibrate_domain(args.epsilon, args.delta)?;
    let mut source = SyntheticPoisson::new(args.mu, RngStream::new(args.seed, 0))?
        .with_max_calls(Some(args.max_calls));
    let mut rng = RngStream::new(args.seed, 1);
    let (calibration, result) = match args.k {
        Some(k) => (None, gpas(&mut source, k, &mut rng)?),
        None => {
            let cal = calibrate(args.epsilon, args.delta)?;
            let result = exact_gpas_calibrated(&mut source, &cal, &mut rng)?;
            (Some(cal), result)
        }
    };
    Ok(EstimateOutput {
        command: "estimate",
        mu: args.mu,
        epsilon: args.epsilon,
        delta: args.delta,
        seed: args.seed,
        calibration,
        k: result.k,
        t_prime: result.t_prime,
        mu_hat: result.mu_hat,
        draws_used: result.draws_used,
        ci: confidence_interval(&result, 1.0 - args.delta)?,
        relative_ci: relative_error_interval(&result, args.epsilon)?,
    })
}

fn calibrate_domain(epsilon: f64, delta: f64) -> Result<(), CliError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain {
            name: "epsilon",
            value: epsilon,
            domain: "(0, 1)",
        }
        .into());
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
            domain: "(0, 1)",
        }
        .into());
    }
    Ok(())
}

/// How the graph for `tpa-ising` is given.
pub enum GraphSpec {
    Grid { width: usize, height: usize },
    EdgeList { path: PathBuf, vertices: Option<usize> },
}

impl GraphSpec {
    pub fn build(&self) -> Result<LatticeGraph, CliError> {
        match self {
            GraphSpec::Grid { width, height } => Ok(LatticeGraph::grid(*width, *height)?),
            GraphSpec::EdgeList { path, vertices } => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read edge list {}: {e}", path.display()))
                })?;
                Ok(LatticeGraph::parse_edge_list(&text, *vertices)?)
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GraphInfo {
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub vertices: usize,
    pub edges: usize,
}

#[derive(Debug, Serialize)]
pub struct IsingOracle {
    pub z_outer: f64,
    pub z_inner: f64,
    pub ln_ratio: f64,
    pub ratio: f64,
    pub level_counts: Vec<u64>,
}

#[derive(Debug, Serialize)]
pub struct TpaRun {
    pub replicate: u64,
    /// `ok` or `degenerate_ratio`.
    pub status: &'static str,
    pub ratio_estimate: f64,
    /// `ratio_estimate * 2^V`.
    pub z_estimate: f64,
    pub ci: ConfidenceInterval,
    pub within_epsilon: bool,
    /// TPA runs consumed, including those of a degenerate phase one.
    pub total_tpa_calls: u64,
    pub report: Option<TpaReport>,
}

#[derive(Debug, Serialize)]
pub struct CallSummary {
    pub mean: f64,
    /// Sample standard deviation; null for a single replicate.
    pub sd: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct TpaIsingOutput {
    pub command: &'static str,
    pub graph: GraphInfo,
    pub beta_outer: f64,
    pub beta_inner: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub replicates: usize,
    pub oracle: IsingOracle,
    pub total_tpa_calls: CallSummary,
    pub within_epsilon: usize,
    pub degenerate: usize,
    pub runs: Vec<TpaRun>,
}

pub struct TpaIsingArgs {
    pub graph: GraphSpec,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub replicates: usize,
    pub max_calls: u64,
}

fn call_summary(calls: impl IntoIterator<Item = f64>) -> CallSummary {
    let s = Summary::of(calls);
    CallSummary {
        mean: s.mean,
        sd: (s.n > 1).then_some(s.sd),
    }
}

pub fn cmd_tpa_ising(args: &TpaIsingArgs) -> Result<TpaIsingOutput, CliError> {
    calibrate_domain(args.epsilon, args.delta)?;
    if args.replicates == 0 {
        return Err(CliError::Usage("--replicates must be positive".into()));
    }
    let graph = args.graph.build()?;
    let hist = build_histogram(&graph)?;
    let family = IsingFamily::new(hist);
    let hist = family.histogram();
    let z_outer = partition_function(hist, 1.0);
    let z_inner = partition_function(hist, 0.0);
    let oracle_ratio = family.ln_ratio().exp();
    let states = 2f64.powi(graph.vertex_count as i32);

    let runs = run_replicates(args.seed, args.replicates, |s| {
        let mut source = TpaSource::new(&family, s.source).with_max_calls(Some(args.max_calls));
        let mut rng = s.estimator;
        let outcome = two_phase(&mut source, args.epsilon, args.delta, &mut rng);
        let total_tpa_calls = source.call_count();
        match outcome {
            Ok(report) => Ok(TpaRun {
                replicate: s.index,
                status: "ok",
                ratio_estimate: report.ratio_estimate,
                z_estimate: report.ratio_estimate * states,
                ci: report.ci,
                within_epsilon: (report.ratio_estimate / oracle_ratio - 1.0).abs() <= args.epsilon,
                total_tpa_calls,
                report: Some(report),
            }),
            // r = 0: every TPA run returns 0 and the ratio is 1
            Err(Error::DegenerateRatio { .. }) => Ok(TpaRun {
                replicate: s.index,
                status: "degenerate_ratio",
                ratio_estimate: 1.0,
                z_estimate: states,
                ci: ConfidenceInterval {
                    lower: 1.0,
                    upper: 1.0,
                    coverage: 1.0 - args.delta,
                },
                within_epsilon: (1.0 / oracle_ratio - 1.0).abs() <= args.epsilon,
                total_tpa_calls,
                report: None,
            }),
            Err(e) => Err(e),
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let calls = runs.iter().map(|r| r.total_tpa_calls as f64);
    Ok(TpaIsingOutput {
        command: "tpa-ising",
        graph: GraphInfo {
            width: graph.dims.map(|d| d.0),
            height: graph.dims.map(|d| d.1),
            vertices: graph.vertex_count,
            edges: graph.edge_count(),
        },
        beta_outer: 1.0,
        beta_inner: 0.0,
        epsilon: args.epsilon,
        delta: args.delta,
        seed: args.seed,
        replicates: args.replicates,
        oracle: IsingOracle {
            z_outer,
            z_inner,
            ln_ratio: family.ln_ratio(),
            ratio: oracle_ratio,
            level_counts: hist.counts.clone(),
        },
        total_tpa_calls: call_summary(calls),
        within_epsilon: runs.iter().filter(|r| r.within_epsilon).count(),
        degenerate: runs.iter().filter(|r| r.status != "ok").count(),
        runs,
    })
}

#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub method: &'static str,
    pub epsilon: f64,
    pub delta: f64,
    pub mu: f64,
    pub replicates: usize,
    pub mean_calls: f64,
    /// Null (empty in CSV) when there is a single replicate.
    pub sd_calls: Option<f64>,
    pub failure_rate: f64,
}

#[derive(Debug, Serialize)]
pub struct BenchOutput {
    pub command: &'static str,
    pub seed: u64,
    /// The synthetic Poisson(mu) source stands in for TPA runs with log-ratio mu.
    pub assumptions: String,
    pub rows: Vec<BenchRow>,
}

pub struct BenchArgs {
    pub epsilon: f64,
    pub delta: f64,
    pub mu: f64,
    pub replicates: usize,
    pub seed: u64,
    pub max_calls: u64,
}

pub fn cmd_bench(args: &BenchArgs) -> Result<BenchOutput, CliError> {
    calibrate_domain(args.epsilon, args.delta)?;
    if args.mu.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !args.mu.is_finite() {
        return Err(Error::Domain {
            name: "mu",
            value: args.mu,
            domain: "(0, inf)",
        }
        .into());
    }
    if args.replicates == 0 {
        return Err(CliError::Usage("--replicates must be positive".into()));
    }
    let truth = args.mu.exp();
    let failed = |estimate: f64| (estimate / truth - 1.0).abs() > args.epsilon;

    let ours = run_replicates(args.seed, args.replicates, |s| {
        let mut source =
            SyntheticPoisson::new(args.mu, s.source)?.with_max_calls(Some(args.max_calls));
        let mut rng = s.estimator;
        two_phase(&mut source, args.epsilon, args.delta, &mut rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let baseline = run_replicates(args.seed ^ 0x5eed_ba5e, args.replicates, |s| {
        let mut source = SyntheticPoisson::new(args.mu, s.source)?.with_max_calls(None);
        chernoff_two_phase(&mut source, args.mu, args.epsilon, args.delta)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let n = args.replicates as f64;
    let ours_calls = call_summary(ours.iter().map(|r| r.total_tpa_calls as f64));
    let base_calls = call_summary(baseline.iter().map(|r| r.total_calls as f64));
    Ok(BenchOutput {
        command: "bench",
        seed: args.seed,
        assumptions: format!(
            "Poisson counts drawn synthetically with mean mu = {}; the chernoff arm is given the true mu to size its fixed samples",
            args.mu
        ),
        rows: vec![
            BenchRow {
                method: "gpas_two_phase",
                epsilon: args.epsilon,
                delta: args.delta,
                mu: args.mu,
                replicates: args.replicates,
                mean_calls: ours_calls.mean,
                sd_calls: ours_calls.sd,
                failure_rate: ours.iter().filter(|r| failed(r.ratio_estimate)).count() as f64 / n,
            },
            BenchRow {
                method: "chernoff_fixed_sample",
                epsilon: args.epsilon,
                delta: args.delta,
                mu: args.mu,
                replicates: args.replicates,
                mean_calls: base_calls.mean,
                sd_calls: base_calls.sd,
                failure_rate: baseline.iter().filter(|r| failed(r.r_hat2.exp())).count() as f64 / n,
            },
        ],
    })
}
