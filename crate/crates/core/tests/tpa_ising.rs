use gpas_core::baseline::chernoff_two_phase;
use gpas_core::gpas::SyntheticPoisson;
use gpas_core::ising::*;
use gpas_core::numerics::{ln_gamma, RngStream};
use gpas_core::replicate::run_replicates;
use gpas_core::stats::{binomial_sigma, chi_square_discrete, Summary};
use gpas_core::tpa::*;

const ALPHA: f64 = 0.001;

fn family(w: usize, h: usize) -> IsingFamily {
    IsingFamily::new(build_histogram(&LatticeGraph::grid(w, h).unwrap()).unwrap())
}

fn tpa_counts(fam: &IsingFamily, seed: u64, n: usize) -> Vec<u64> {
    // chunks of runs per stream keep the per-replicate overhead low
    let chunk = 1_000;
    run_replicates(seed, n.div_ceil(chunk), |mut s| {
        (0..chunk).map(|_| tpa_run(fam, &mut s.source).unwrap()).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .take(n)
    .collect()
}

#[test]
fn two_by_two_oracle() {
    let fam = family(2, 2);
    let e = std::f64::consts::E;
    let oracle = ((2.0 * e.powi(4) + 12.0 * e.powi(2) + 2.0) / 16.0).ln();
    assert!((fam.ln_ratio() - oracle).abs() < 1e-13);
}

#[test]
fn tpa_two_by_two_is_poisson() {
    let fam = family(2, 2);
    let r = fam.ln_ratio();
    let xs = tpa_counts(&fam, 1, 100_000);
    let s = Summary::of(xs.iter().map(|&x| x as f64));
    assert!((s.mean - r).abs() < 3.0 * s.std_error(), "{s:?} vs {r}");
    let dispersion = s.variance() / s.mean;
    assert!((0.95..=1.05).contains(&dispersion), "{dispersion}");
    let pmf = |i: u64| (-r + i as f64 * r.ln() - ln_gamma(i as f64 + 1.0)).exp();
    let chi = chi_square_discrete(&xs, pmf, 5.0);
    assert!(!chi.rejects_at(ALPHA), "{chi:?}");
}

#[test]
fn tpa_four_by_four_mean() {
    let fam = family(4, 4);
    let xs = tpa_counts(&fam, 2, 10_000);
    let s = Summary::of(xs.iter().map(|&x| x as f64));
    assert!((s.mean - fam.ln_ratio()).abs() < 3.0 * s.std_error(), "{s:?}");
    assert!((s.mean - 15.40).abs() < 3.0 * s.std_error(), "{s:?}");
}

#[test]
fn level_sampler_at_zero_beta() {
    let hist = build_histogram(&LatticeGraph::grid(2, 2).unwrap()).unwrap();
    let mut rng = RngStream::new(3, 0);
    let n = 100_000;
    let mut freq = [0usize; 5];
    for _ in 0..n {
        freq[sample_hamiltonian(&hist, 0.0, &mut rng) as usize] += 1;
    }
    assert_eq!(freq[1] + freq[3], 0);
    for (level, p) in [(4, 2.0 / 16.0), (2, 12.0 / 16.0), (0, 2.0 / 16.0)] {
        let f = freq[level] as f64 / n as f64;
        assert!((f - p).abs() < 3.0 * binomial_sigma(p, n), "level {level}: {f}");
    }
}

#[test]
fn level_sampler_mean_at_beta_one() {
    let hist = build_histogram(&LatticeGraph::grid(2, 2).unwrap()).unwrap();
    let z = partition_function(&hist, 1.0);
    let moments = |power: i32| {
        hist.counts
            .iter()
            .enumerate()
            .map(|(h, &c)| (h as f64).powi(power) * c as f64 * (h as f64).exp())
            .sum::<f64>()
            / z
    };
    let (m1, m2) = (moments(1), moments(2));
    let sd = (m2 - m1 * m1).sqrt();
    let mut rng = RngStream::new(4, 0);
    let n = 100_000;
    let mean = (0..n).map(|_| sample_hamiltonian(&hist, 1.0, &mut rng) as f64).sum::<f64>() / n as f64;
    assert!((mean - m1).abs() < 3.0 * sd / (n as f64).sqrt(), "{mean} vs {m1}");
}

#[test]
fn cumulative_weights_normalize() {
    let hist = build_histogram(&LatticeGraph::grid(4, 4).unwrap()).unwrap();
    for &beta in &[-0.5, 0.0, 0.3, 1.0, 4.0] {
        let direct: f64 = hist
            .counts
            .iter()
            .enumerate()
            .map(|(h, &c)| c as f64 * (beta * h as f64).exp())
            .sum();
        let z = partition_function(&hist, beta);
        assert!((z / direct - 1.0).abs() < 1e-12, "beta={beta}");
    }
}

#[test]
fn empty_graph_family_gives_zero() {
    let fam = family(1, 1);
    let mut rng = RngStream::new(5, 0);
    assert!((0..1_000).all(|_| tpa_run(&fam, &mut rng).unwrap() == 0));
}

#[test]
fn two_phase_failure_rate_synthetic() {
    let (mu, eps, delta) = (15.40, 0.2, 0.1);
    let n = 2_000;
    let reports = run_replicates(6, n, |s| {
        let mut source = SyntheticPoisson::new(mu, s.source).unwrap();
        let mut rng = s.estimator;
        two_phase(&mut source, eps, delta, &mut rng).unwrap()
    });
    let truth = mu.exp();
    let fails = reports
        .iter()
        .filter(|r| (r.ratio_estimate / truth - 1.0).abs() > eps)
        .count();
    let freq = fails as f64 / n as f64;
    assert!(freq <= delta + 3.0 * binomial_sigma(delta, n), "{freq}");
}

#[test]
fn two_phase_beats_chernoff_baseline() {
    for &(eps, delta) in &[(0.2, 0.2), (0.2, 0.01), (0.1, 0.01)] {
        for &mu in &[5.0, 15.4] {
            let n = 200;
            let ours = run_replicates(7, n, |s| {
                let mut source = SyntheticPoisson::new(mu, s.source).unwrap();
                let mut rng = s.estimator;
                two_phase(&mut source, eps, delta, &mut rng).unwrap().total_tpa_calls as f64
            });
            let theirs = run_replicates(8, n, |s| {
                let mut source = SyntheticPoisson::new(mu, s.source).unwrap();
                chernoff_two_phase(&mut source, mu, eps, delta).unwrap().total_calls as f64
            });
            let (a, b) = (Summary::of(ours), Summary::of(theirs));
            assert!(a.mean < b.mean, "eps={eps} delta={delta} mu={mu}: {a:?} vs {b:?}");
        }
    }
}
