//! Special functions and random variate generation.

mod rng;
mod sample;
mod special;

pub use rng::RngStream;
pub use sample::{
    sample_bernoulli, sample_beta, sample_gamma, sample_poisson, sample_standard_exponential,
    sample_uniform,
};
pub use special::{
    gamma_cdf, gamma_quantile, gamma_sf, ln_gamma, reg_lower_gamma, reg_upper_gamma,
};

use crate::error::{domain, Error};

/// Shape and rate of a Gamma law, both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GammaShapeRate {
    shape: f64,
    rate: f64,
}

impl GammaShapeRate {
    pub fn new(shape: f64, rate: f64) -> Result<Self, Error> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(domain("shape", shape, "(0, inf)"));
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(domain("rate", rate, "(0, inf)"));
        }
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn cdf(&self, t: f64) -> f64 {
        reg_lower_gamma(self.shape, self.rate * t.max(0.0)).expect("validated parameters")
    }

    pub fn sf(&self, t: f64) -> f64 {
        reg_upper_gamma(self.shape, self.rate * t.max(0.0)).expect("validated parameters")
    }

    pub fn quantile(&self, q: f64) -> Result<f64, Error> {
        gamma_quantile(self.shape, self.rate, q)
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        sample_gamma(rng, self.shape, self.rate).expect("validated parameters")
    }
}
