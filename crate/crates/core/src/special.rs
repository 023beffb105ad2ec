//! Special functions used by the moment and error-probability formulas.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{config_err, Result};

// Above this argument the asymptotic expansion is accurate to rounding.
const ASYMPTOTIC_FROM: f64 = 30.0;

/// `e^{-z}·I_ν(z)` for `ν ∈ {0, 1}`, `z >= 0`.
fn bessel_i_scaled(order: u32, z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z <= ASYMPTOTIC_FROM {
        bessel_series(order, z)
    } else {
        bessel_asymptotic(order, z)
    }
}

// Power series; every term is positive so there is no cancellation.
fn bessel_series(order: u32, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = if order == 0 { 1.0 } else { 0.5 * z };
    let mut sum = term;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * (k + order as f64));
        sum += term;
        k += 1.0;
    }
    sum * (-z).exp()
}

// Hankel expansion, summed until the terms stop shrinking.
fn bessel_asymptotic(order: u32, z: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 1.0f64;
    loop {
        let next = -term * (mu - (2.0 * k - 1.0).powi(2)) / (k * 8.0 * z);
        if next.abs() >= term.abs() || next.abs() < 1e-17 * sum.abs() {
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum / (2.0 * PI * z).sqrt()
}

/// Exponentially scaled modified Bessel function `e^{-z} I₀(z)`.
pub fn bessel_i0_scaled(z: f64) -> f64 {
    bessel_i_scaled(0, z.abs())
}

/// Exponentially scaled modified Bessel function `e^{-z} I₁(z)` (odd in `z`).
pub fn bessel_i1_scaled(z: f64) -> f64 {
    z.signum() * bessel_i_scaled(1, z.abs())
}

/// Laguerre function `L_{1/2}(−x)` for `x >= 0`:
/// `e^{−x/2}[(1+x) I₀(x/2) + x I₁(x/2)]`.
pub fn laguerre_half(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return config_err(format!("laguerre_half needs a finite x >= 0: x={x}"));
    }
    let h = 0.5 * x;
    Ok((1.0 + x) * bessel_i0_scaled(h) + x * bessel_i1_scaled(h))
}

/// Gaussian tail `Q(x) = ½ erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}
