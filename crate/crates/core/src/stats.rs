//! Goodness-of-fit statistics used by the validation suites.

use crate::numerics::reg_upper_gamma;

/// Kolmogorov distribution tail `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Effective sample size used for the asymptotic p-value.
    pub n_eff: f64,
}

impl KsResult {
    fn new(statistic: f64, n_eff: f64) -> Self {
        let root = n_eff.sqrt();
        let lambda = (root + 0.12 + 0.11 / root) * statistic;
        Self {
            statistic,
            p_value: kolmogorov_sf(lambda),
            n_eff,
        }
    }

    /// Asymptotic critical value of the statistic at significance `alpha`.
    pub fn critical_value(&self, alpha: f64) -> f64 {
        ks_critical_value(self.n_eff, alpha)
    }

    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Critical value `c_alpha / sqrt(n)` with `c_alpha = sqrt(-ln(alpha / 2) / 2)`.
pub fn ks_critical_value(n_eff: f64, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / n_eff.sqrt()
}

/// One-sample KS test of `sample` against a continuous CDF. Sorts in place.
pub fn ks_one_sample(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    KsResult::new(d, n)
}

/// Two-sample KS test. Sorts both inputs in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> KsResult {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n * m) as f64 / (n + m) as f64;
    KsResult::new(d, n_eff)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins: usize,
}

impl ChiSquareResult {
    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Pearson chi-square goodness of fit of integer `observations` against a pmf.
///
/// Cells are formed left to right and merged until each holds an expected
/// count of at least `min_expected`; the right tail cell absorbs all mass
/// beyond the last formed cell.
pub fn chi_square_discrete(
    observations: &[u64],
    pmf: impl Fn(u64) -> f64,
    min_expected: f64,
) -> ChiSquareResult {
    let n = observations.len() as f64;
    let max_obs = observations.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0u64; max_obs as usize + 1];
    for &x in observations {
        counts[x as usize] += 1;
    }

    // (expected, observed) per merged cell
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut acc_e = 0.0;
    let mut acc_o = 0.0;
    let mut cum_p = 0.0;
    let mut v = 0u64;
    loop {
        let p = pmf(v);
        cum_p += p;
        acc_e += n * p;
        acc_o += counts.get(v as usize).copied().unwrap_or(0) as f64;
        v += 1;
        let tail_e = n * (1.0 - cum_p).max(0.0);
        if acc_e >= min_expected && tail_e >= min_expected {
            cells.push((acc_e, acc_o));
            acc_e = 0.0;
            acc_o = 0.0;
        } else if tail_e < min_expected && (v > max_obs || tail_e <= 0.0) {
            break;
        }
        if v > max_obs + 10_000 {
            break;
        }
    }
    // fold leftover plus the unformed right tail into the last cell
    let tail_obs = counts.iter().skip(v as usize).sum::<u64>() as f64;
    let tail_e = acc_e + n * (1.0 - cum_p).max(0.0);
    let tail_o = acc_o + tail_obs;
    match cells.last_mut() {
        Some(last) if tail_e < min_expected => {
            last.0 += tail_e;
            last.1 += tail_o;
        }
        _ => cells.push((tail_e, tail_o)),
    }

    let statistic = cells
        .iter()
        .filter(|(e, _)| *e > 0.0)
        .map(|(e, o)| (o - e).powi(2) / e)
        .sum::<f64>();
    let dof = cells.len().saturating_sub(1).max(1);
    ChiSquareResult {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
        bins: cells.len(),
    }
}

/// Upper tail of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_sf(x: f64, dof: usize) -> f64 {
    reg_upper_gamma(dof as f64 / 2.0, (x / 2.0).max(0.0)).unwrap_or(f64::NAN)
}

/// Sample mean and (n-1) standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

impl Summary {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        // Welford
        let mut n = 0usize;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for x in xs {
            n += 1;
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
        let sd = if n > 1 { (m2 / (n - 1) as f64).sqrt() } else { f64::NAN };
        Self { n, mean, sd }
    }

    pub fn variance(&self) -> f64 {
        self.sd * self.sd
    }

    pub fn std_error(&self) -> f64 {
        self.sd / (self.n as f64).sqrt()
    }
}

/// Binomial standard deviation of a frequency estimated from `n` trials.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
