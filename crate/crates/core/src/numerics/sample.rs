//! Random variate generators driven by [`RngStream`].

use super::RngStream;
use crate::error::{domain, Result};

/// Largest Poisson mean handled by a single sequential search.
const POISSON_INVERSION_MAX: f64 = 30.0;
/// Integer Gamma shapes up to this size are summed from exponentials.
const GAMMA_EXP_SUM_MAX: f64 = 64.0;

pub fn sample_uniform(rng: &mut RngStream) -> f64 {
    rng.uniform()
}

pub fn sample_bernoulli(rng: &mut RngStream, p: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain("p", p, "[0, 1]"));
    }
    Ok(rng.uniform() < p)
}

/// Exact Poisson(mu) draw.
///
/// Inversion by sequential search for `mu <= 30`; larger means are split into
/// `ceil(mu / 30)` equal parts whose draws are summed.
pub fn sample_poisson(rng: &mut RngStream, mu: f64) -> Result<u64> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(domain("mu", mu, "[0, inf)"));
    }
    if mu == 0.0 {
        return Ok(0);
    }
    if mu <= POISSON_INVERSION_MAX {
        return Ok(poisson_inversion(rng, mu));
    }
    let parts = (mu / POISSON_INVERSION_MAX).ceil();
    let sub = mu / parts;
    Ok((0..parts as u64).map(|_| poisson_inversion(rng, sub)).sum())
}

fn poisson_inversion(rng: &mut RngStream, mu: f64) -> u64 {
    let u = rng.uniform();
    let mut n = 0u64;
    let mut pmf = (-mu).exp();
    let mut cdf = pmf;
    while u >= cdf {
        n += 1;
        pmf *= mu / n as f64;
        let next = cdf + pmf;
        if next == cdf {
            // the remaining mass is below double resolution
            break;
        }
        cdf = next;
    }
    n
}

/// Exponential with rate 1.
#[inline]
pub fn sample_standard_exponential(rng: &mut RngStream) -> f64 {
    -rng.open_uniform().ln()
}

fn sample_standard_normal(rng: &mut RngStream) -> f64 {
    // Marsaglia polar method; the partner variate is discarded to keep the stream stateless.
    loop {
        let u = 2.0 * rng.uniform() - 1.0;
        let v = 2.0 * rng.uniform() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Marsaglia-Tsang squeeze for shape >= 1, unit rate.
fn gamma_marsaglia_tsang(rng: &mut RngStream, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let (x, v) = loop {
            let x = sample_standard_normal(rng);
            let v = 1.0 + c * x;
            if v > 0.0 {
                break (x, v * v * v);
            }
        };
        let u = rng.open_uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

fn standard_gamma(rng: &mut RngStream, shape: f64) -> f64 {
    if shape.fract() == 0.0 && shape <= GAMMA_EXP_SUM_MAX {
        (0..shape as u32).map(|_| sample_standard_exponential(rng)).sum()
    } else if shape >= 1.0 {
        gamma_marsaglia_tsang(rng, shape)
    } else {
        // boost: Gamma(a) = Gamma(a + 1) * U^(1/a)
        let g = gamma_marsaglia_tsang(rng, shape + 1.0);
        g * rng.open_uniform().powf(1.0 / shape)
    }
}

/// Gamma(shape, rate) draw.
pub fn sample_gamma(rng: &mut RngStream, shape: f64, rate: f64) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(domain("shape", shape, "(0, inf)"));
    }
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(domain("rate", rate, "(0, inf)"));
    }
    Ok(standard_gamma(rng, shape) / rate)
}

/// Beta(a, b) for integer parameters, as `G1 / (G1 + G2)`.
pub fn sample_beta(rng: &mut RngStream, a: u64, b: u64) -> Result<f64> {
    if a < 1 {
        return Err(domain("a", a as f64, "integers >= 1"));
    }
    if b < 1 {
        return Err(domain("b", b as f64, "integers >= 1"));
    }
    let g1 = standard_gamma(rng, a as f64);
    let g2 = standard_gamma(rng, b as f64);
    Ok(g1 / (g1 + g2))
}
