use gpas_core::numerics::*;
use gpas_core::stats::{chi_square_discrete, ks_one_sample, ks_two_sample};

const ALPHA: f64 = 0.001;

#[test]
fn uniform_golden_sequence() {
    let mut rng = RngStream::new(20_240_601, 0);
    let got: Vec<u64> = (0..5).map(|_| sample_uniform(&mut rng).to_bits()).collect();
    assert_eq!(
        got,
        [
            4599164155281682448,
            4605725778551823461,
            4571570728131111296,
            4598794407852936490,
            4598242869523448006,
        ]
    );
}

#[test]
fn uniform_ks() {
    let mut rng = RngStream::new(1, 0);
    let mut xs: Vec<f64> = (0..100_000).map(|_| sample_uniform(&mut rng)).collect();
    let ks = ks_one_sample(&mut xs, |x| x.clamp(0.0, 1.0));
    assert!(!ks.rejects_at(ALPHA), "{ks:?}");
}

fn poisson_pmf(mu: f64) -> impl Fn(u64) -> f64 {
    move |i| (-mu + i as f64 * mu.ln() - ln_gamma(i as f64 + 1.0)).exp()
}

#[test]
fn poisson_chi_square() {
    for &(mu, seed) in &[(3.0, 2u64), (0.4, 3), (17.5, 4), (42.0, 5)] {
        let mut rng = RngStream::new(seed, 0);
        let xs: Vec<u64> = (0..100_000)
            .map(|_| sample_poisson(&mut rng, mu).unwrap())
            .collect();
        let chi = chi_square_discrete(&xs, poisson_pmf(mu), 5.0);
        assert!(!chi.rejects_at(ALPHA), "mu={mu}: {chi:?}");
    }
}

#[test]
fn exponential_gamma_ks() {
    let mu = 2.5;
    let mut rng = RngStream::new(6, 0);
    let mut xs: Vec<f64> = (0..100_000)
        .map(|_| sample_gamma(&mut rng, 1.0, mu).unwrap())
        .collect();
    let ks = ks_one_sample(&mut xs, |t| -(-mu * t).exp_m1());
    assert!(!ks.rejects_at(ALPHA), "{ks:?}");
}

#[test]
fn gamma_ks_across_shapes() {
    // exercises both the exponential-sum and the rejection path
    for &(shape, rate, seed) in &[(5.0, 2.0, 7u64), (64.0, 1.0, 8), (65.0, 3.0, 9), (2.5, 0.5, 10), (0.4, 1.0, 11)] {
        let mut rng = RngStream::new(seed, 0);
        let mut xs: Vec<f64> = (0..100_000)
            .map(|_| sample_gamma(&mut rng, shape, rate).unwrap())
            .collect();
        let ks = ks_one_sample(&mut xs, |t| gamma_cdf(shape, rate, t).unwrap());
        assert!(!ks.rejects_at(ALPHA), "shape={shape}: {ks:?}");
    }
}

#[test]
fn sum_of_exponentials_is_gamma() {
    let (k, mu) = (7u32, 1.3);
    let mut a_rng = RngStream::new(12, 0);
    let mut b_rng = RngStream::new(12, 1);
    let mut sums: Vec<f64> = (0..10_000)
        .map(|_| (0..k).map(|_| sample_standard_exponential(&mut a_rng) / mu).sum())
        .collect();
    let mut direct: Vec<f64> = (0..10_000)
        .map(|_| sample_gamma(&mut b_rng, k as f64, mu).unwrap())
        .collect();
    let ks = ks_two_sample(&mut sums, &mut direct);
    assert!(!ks.rejects_at(ALPHA), "{ks:?}");
}

#[test]
fn beta_one_one_is_uniform() {
    let mut rng = RngStream::new(13, 0);
    let mut xs: Vec<f64> = (0..100_000).map(|_| sample_beta(&mut rng, 1, 1).unwrap()).collect();
    let ks = ks_one_sample(&mut xs, |x| x.clamp(0.0, 1.0));
    assert!(!ks.rejects_at(ALPHA), "{ks:?}");
}

#[test]
fn uniform_order_statistic_is_beta() {
    let (n, i) = (7usize, 3usize);
    let mut u_rng = RngStream::new(14, 0);
    let mut b_rng = RngStream::new(14, 1);
    let mut order: Vec<f64> = (0..10_000)
        .map(|_| {
            let mut us: Vec<f64> = (0..n).map(|_| u_rng.uniform()).collect();
            us.sort_by(f64::total_cmp);
            us[i - 1]
        })
        .collect();
    let mut betas: Vec<f64> = (0..10_000)
        .map(|_| sample_beta(&mut b_rng, i as u64, (n - i + 1) as u64).unwrap())
        .collect();
    let ks = ks_two_sample(&mut order, &mut betas);
    assert!(!ks.rejects_at(ALPHA), "{ks:?}");

    // and against the exact Beta(3, 5) CDF: P(U_(3) <= x) = P(Bin(7, x) >= 3)
    let cdf = |x: f64| {
        let x = x.clamp(0.0, 1.0);
        (i..=n)
            .map(|j| binomial(n, j) * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32))
            .sum::<f64>()
    };
    let ks = ks_one_sample(&mut betas, cdf);
    assert!(!ks.rejects_at(ALPHA), "{ks:?}");
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn lower_gamma_nondecreasing(shape in 0.05f64..2_000.0, x in 0.0f64..3_000.0, dx in 0.0f64..50.0) {
            let a = reg_lower_gamma(shape, x).unwrap();
            let b = reg_lower_gamma(shape, x + dx).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b >= a - 1e-15);
        }

        #[test]
        fn quantile_round_trip(shape in 0.2f64..5_000.0, rate in 0.01f64..100.0, q in 1e-6f64..(1.0 - 1e-6)) {
            let t = gamma_quantile(shape, rate, q).unwrap();
            let back = reg_lower_gamma(shape, rate * t).unwrap();
            prop_assert!((back - q).abs() <= 1e-10, "back={}", back);
        }

        #[test]
        fn quantile_increasing(shape in 0.5f64..500.0, q in 0.01f64..0.98, dq in 0.001f64..0.01) {
            let a = gamma_quantile(shape, 1.0, q).unwrap();
            let b = gamma_quantile(shape, 1.0, q + dq).unwrap();
            prop_assert!(b > a);
        }

        #[test]
        fn streams_replay(seed in any::<u64>(), stream in any::<u64>()) {
            let mut a = RngStream::new(seed, stream);
            let mut b = RngStream::new(seed, stream);
            for _ in 0..16 {
                prop_assert_eq!(
                    sample_poisson(&mut a, 2.5).unwrap(),
                    sample_poisson(&mut b, 2.5).unwrap()
                );
                prop_assert_eq!(sample_beta(&mut a, 3, 4).unwrap().to_bits(), sample_beta(&mut b, 3, 4).unwrap().to_bits());
            }
        }
    }
}
