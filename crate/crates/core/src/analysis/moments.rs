use std::f64::consts::PI;

use statrs::distribution::{ContinuousCDF, Gamma};

use crate::channel::MAX_PHASE_BITS;
use crate::error::{config_err, Error, Result};
use crate::special::laguerre_half;

/// First two moments of `Re(X)` for a block of `n_block` phase-compensated
/// elements with `B`-bit quantization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMoments {
    pub mean: f64,
    pub second: f64,
    pub n_block: usize,
    pub bits: u32,
    pub kappa_prime: f64,
}

impl GainMoments {
    pub fn variance(&self) -> f64 {
        self.second - self.mean * self.mean
    }

    /// Moment-matched Gamma approximation.
    pub fn gamma_fit(&self) -> Result<GammaFit> {
        GammaFit::from_moments(self.mean, self.second)
    }
}

/// `E[|g| cos ε]` for one unit-power Rician element with residual phase
/// error `ε ~ U(−π/2^B, π/2^B)`.
pub fn per_element_mean(kappa_prime: f64, bits: u32) -> Result<f64> {
    check_bits(bits)?;
    let levels = (1u64 << bits) as f64;
    let angular = levels / PI * (PI / levels).sin();
    let rician = PI.sqrt() / 2.0 * laguerre_half(kappa_prime)? / (1.0 + kappa_prime).sqrt();
    Ok(angular * rician)
}

fn check_bits(bits: u32) -> Result<()> {
    if bits == 0 || bits > MAX_PHASE_BITS {
        return config_err(format!("B must be in 1..={MAX_PHASE_BITS}: B={bits}"));
    }
    Ok(())
}

pub fn gain_moments(n_block: usize, bits: u32, kappa_prime: f64) -> Result<GainMoments> {
    if n_block == 0 {
        return config_err("block must hold at least one element");
    }
    let mu = per_element_mean(kappa_prime, bits)?;
    let levels = (1u64 << bits) as f64;
    let cos2 = (1.0 + levels / (2.0 * PI) * (2.0 * PI / levels).sin()) / 2.0;
    let n = n_block as f64;
    Ok(GainMoments {
        mean: n * mu,
        second: n * (n - 1.0) * mu * mu + n * cos2,
        n_block,
        bits,
        kappa_prime,
    })
}

/// Gamma distribution with shape `k` and scale `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFit {
    pub shape: f64,
    pub scale: f64,
}

impl GammaFit {
    pub fn from_moments(mean: f64, second: f64) -> Result<Self> {
        let var = second - mean * mean;
        if !(var > 0.0) || !(mean > 0.0) {
            return Err(Error::Numerical(format!(
                "Gamma fit needs positive mean and variance: mean={mean}, var={var}"
            )));
        }
        Ok(Self {
            shape: mean * mean / var,
            scale: var / mean,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        // shape and scale were checked positive on construction
        Gamma::new(self.shape, 1.0 / self.scale)
            .expect("positive parameters")
            .cdf(x)
    }
}

/// Kolmogorov-Smirnov distance between `samples` and a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
