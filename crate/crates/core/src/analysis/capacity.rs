use std::f64::consts::PI;

use num_complex::Complex64;

use super::moments::gain_moments;
use crate::error::{config_err, Error, Result};
use crate::modulation::{BlockGains, ConstellationSet, SchemeConfig, SchemeKind};
use crate::quadrature::GaussHermite;

// Allowed excursion outside [0, log2 M] before a result counts as broken.
const RANGE_SLACK: f64 = 1e-6;

/// DCMC capacity (bits) of a fixed constellation observed as
/// `y = sqrt(ρ′)·z + n`, `n ~ CN(0, 1)`, via a `P×P` Gauss-Hermite rule.
///
/// The inner sum over `m₂` runs through log-sum-exp so high SNR does not
/// overflow.
pub fn dcmc_capacity_gh(points: &[Complex64], rho_prime: f64, rule: &GaussHermite) -> Result<f64> {
    let m = points.len();
    if m < 2 {
        return config_err(format!("capacity needs at least 2 points: M={m}"));
    }
    if !(rho_prime >= 0.0) || !rho_prime.is_finite() {
        return config_err(format!("rho' must be finite and >= 0: {rho_prime}"));
    }
    let s = rho_prime.sqrt();
    let scaled: Vec<Complex64> = points.iter().map(|z| z * s).collect();
    let mut expo = vec![0.0; m];
    let mut acc = 0.0;
    for (i, &t1) in rule.nodes.iter().enumerate() {
        for (j, &t2) in rule.nodes.iter().enumerate() {
            let w = rule.weights[i] * rule.weights[j];
            let mut inner = 0.0;
            for z1 in &scaled {
                let mut peak = f64::NEG_INFINITY;
                for (e, z2) in expo.iter_mut().zip(&scaled) {
                    let d = z1 - z2;
                    *e = -2.0 * (t1 * d.re + t2 * d.im) - d.norm_sqr();
                    peak = peak.max(*e);
                }
                let sum: f64 = expo.iter().map(|e| (e - peak).exp()).sum();
                inner += peak + sum.ln();
            }
            acc += w * inner;
        }
    }
    let log2m = (m as f64).log2();
    let r = log2m - acc / (m as f64 * PI * std::f64::consts::LN_2);
    if !r.is_finite() || r < -RANGE_SLACK || r > log2m + RANGE_SLACK {
        return Err(Error::Numerical(format!(
            "capacity {r} outside [0, {log2m}] at rho'={rho_prime}"
        )));
    }
    Ok(r)
}

/// Block gains replaced by their means `E[Re X]` for each block.
pub fn mean_block_gains(
    scheme: &SchemeConfig,
    n: usize,
    bits: u32,
    kappa_prime: f64,
) -> Result<BlockGains> {
    scheme.validate(n, bits)?;
    let mean = Complex64::new(
        gain_moments(scheme.block_size(n), bits, kappa_prime)?.mean,
        0.0,
    );
    let layers = scheme.layers();
    Ok(match scheme.kind {
        SchemeKind::Psk => BlockGains::Psk(mean),
        SchemeKind::Apsk => BlockGains::Apsk(vec![mean; layers]),
        SchemeKind::Qapsk => BlockGains::Qapsk {
            i: vec![mean; layers],
            q: vec![mean; layers],
        },
    })
}

/// Deterministic constellation built from the mean block gains.
pub fn mean_constellation(
    scheme: &SchemeConfig,
    n: usize,
    bits: u32,
    kappa_prime: f64,
) -> Result<ConstellationSet> {
    ConstellationSet::from_block_gains(scheme, mean_block_gains(scheme, n, bits, kappa_prime)?)
}

/// Capacity upper bound: the Gauss-Hermite capacity of the mean constellation.
pub fn dcmc_capacity_ub(
    scheme: &SchemeConfig,
    n: usize,
    bits: u32,
    kappa_prime: f64,
    rho_prime: f64,
    rule: &GaussHermite,
) -> Result<f64> {
    let c = mean_constellation(scheme, n, bits, kappa_prime)?;
    dcmc_capacity_gh(&c.points, rho_prime, rule)
}
