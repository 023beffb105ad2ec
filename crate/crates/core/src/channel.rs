//! Rician RIS-to-receiver channel, receiver combining and B-bit phase quantization.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::rng::RngStream;

/// Physical and system parameters of one RIS link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    /// Number of RIS elements `N`.
    pub elements: usize,
    /// Number of receive antennas `K`.
    pub rx_antennas: usize,
    /// Rician factor, linear.
    pub kappa: f64,
    /// Phase resolution `B` in bits.
    pub phase_bits: u32,
    /// Receive-antenna spacing over wavelength, `d/λ`.
    #[serde(default = "default_spacing")]
    pub ra_spacing_over_lambda: f64,
    /// Angle of arrival at the receiver in radians.
    #[serde(default)]
    pub aoa_phi: f64,
    /// Receive SNR, linear.
    #[serde(default = "default_rho")]
    pub rho: f64,
}

fn default_spacing() -> f64 {
    0.5
}

fn default_rho() -> f64 {
    1.0
}

/// Largest supported phase resolution.
pub const MAX_PHASE_BITS: u32 = 16;

impl LinkConfig {
    pub fn new(elements: usize, rx_antennas: usize, kappa: f64, phase_bits: u32) -> Self {
        Self {
            elements,
            rx_antennas,
            kappa,
            phase_bits,
            ra_spacing_over_lambda: default_spacing(),
            aoa_phi: 0.0,
            rho: default_rho(),
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.elements == 0 {
            return config_err("N must be positive");
        }
        if self.rx_antennas == 0 {
            return config_err("K must be positive");
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return config_err(format!(
                "kappa must be finite and >= 0: kappa={}",
                self.kappa
            ));
        }
        if self.phase_bits == 0 || self.phase_bits > MAX_PHASE_BITS {
            return config_err(format!(
                "B must be in 1..={MAX_PHASE_BITS}: B={}",
                self.phase_bits
            ));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return config_err(format!("rho must be finite and > 0: rho={}", self.rho));
        }
        if !(self.aoa_phi.is_finite() && self.aoa_phi.abs() <= PI / 2.0) {
            return config_err(format!(
                "aoa_phi must lie in [-pi/2, pi/2]: aoa_phi={}",
                self.aoa_phi
            ));
        }
        if !(self.ra_spacing_over_lambda.is_finite() && self.ra_spacing_over_lambda > 0.0) {
            return config_err(format!(
                "ra_spacing_over_lambda must be > 0: {}",
                self.ra_spacing_over_lambda
            ));
        }
        Ok(())
    }

    /// Power `E|g_n|²` of one entry of the combined channel.
    pub fn combined_power(&self) -> f64 {
        let k = self.rx_antennas as f64;
        (self.kappa * k * k + k) / (1.0 + self.kappa)
    }
}

/// Single-antenna equivalent of a `K`-antenna receiver with statistical-CSI combining.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentLink {
    pub rho_prime: f64,
    pub kappa_prime: f64,
}

pub fn equivalent_link(cfg: &LinkConfig) -> Result<EquivalentLink> {
    cfg.validate()?;
    let k = cfg.rx_antennas as f64;
    Ok(EquivalentLink {
        rho_prime: (cfg.kappa * k + 1.0) / (1.0 + cfg.kappa) * cfg.rho,
        kappa_prime: k * cfg.kappa,
    })
}

/// One draw of the combined channel `g = w·H`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Combined channel, one entry per RIS element.
    pub g: Vec<Complex64>,
    /// Unit-modulus LoS vector of the first antenna (before the `K` array gain).
    pub los_unit: Vec<Complex64>,
    /// Combined NLoS aggregate, `CN(0, K)` per entry.
    pub nlos: Vec<Complex64>,
    power: f64,
}

impl ChannelRealization {
    /// The channel rescaled to unit average power per element.
    ///
    /// Dividing out `sqrt(K(κK+1)/(1+κ))` (the array gain and the combined
    /// noise power `K`) leaves a single-antenna Rician channel with factor
    /// `κ' = Kκ`, which is what pairs with the equivalent SNR `ρ'`.
    pub fn equivalent_gains(&self) -> Vec<Complex64> {
        let s = 1.0 / self.power.sqrt();
        self.g.iter().map(|&x| x * s).collect()
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws one channel realization.
///
/// Each element consumes, in order: one uniform LoS phase, then `K`
/// complex-normal NLoS coefficients (real part first).
pub fn draw_channel(cfg: &LinkConfig, stream: RngStream) -> Result<ChannelRealization> {
    cfg.validate()?;
    let mut rng = stream.rng();
    Ok(draw_channel_with(cfg, &mut rng))
}

pub(crate) fn draw_channel_with<R: Rng + ?Sized>(
    cfg: &LinkConfig,
    rng: &mut R,
) -> ChannelRealization {
    let n = cfg.elements;
    let k = cfg.rx_antennas;
    let los_amp = (cfg.kappa / (1.0 + cfg.kappa)).sqrt() * k as f64;
    let nlos_amp = (1.0 / (1.0 + cfg.kappa)).sqrt();
    let ramp_step = TAU * cfg.ra_spacing_over_lambda * cfg.aoa_phi.sin();
    let ramp: Vec<Complex64> = (0..k)
        .map(|i| Complex64::from_polar(1.0, ramp_step * i as f64))
        .collect();

    let mut g = Vec::with_capacity(n);
    let mut los_unit = Vec::with_capacity(n);
    let mut nlos = Vec::with_capacity(n);
    for _ in 0..n {
        let phase: f64 = rng.random_range(0.0..TAU);
        let los = Complex64::from_polar(1.0, phase);
        let agg: Complex64 = ramp.iter().map(|&w| complex_normal(rng) * w).sum();
        g.push(los * los_amp + agg * nlos_amp);
        los_unit.push(los);
        nlos.push(agg);
    }
    ChannelRealization {
        g,
        los_unit,
        nlos,
        power: cfg.combined_power(),
    }
}

/// A phase on the `B`-bit grid `{k·2π/2^B}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantizedPhase {
    index: u32,
    bits: u32,
}

impl QuantizedPhase {
    pub fn from_index(index: u32, bits: u32) -> Self {
        let levels = 1u32 << bits;
        Self {
            index: index % levels,
            bits,
        }
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn value(&self) -> f64 {
        self.index as f64 * grid_step(self.bits)
    }

    /// `e^{jθ}`.
    pub fn phasor(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.value())
    }
}

pub(crate) fn grid_step(bits: u32) -> f64 {
    TAU / (1u64 << bits) as f64
}

// Fractional parts this close to one half are treated as exact midpoints.
const TIE_EPS: f64 = 1e-12;

/// Rounds `arg(z)` to the nearest point of the `B`-bit phase grid.
///
/// Exact midpoints go to the smaller grid index.
pub fn quantize_phase(z: Complex64, bits: u32) -> Result<QuantizedPhase> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::UndefinedPhase);
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Numerical(format!("non-finite input {z}")));
    }
    if bits == 0 || bits > MAX_PHASE_BITS {
        return config_err(format!("B must be in 1..={MAX_PHASE_BITS}: B={bits}"));
    }
    Ok(quantize_arg(z.arg(), bits))
}

pub(crate) fn quantize_arg(arg: f64, bits: u32) -> QuantizedPhase {
    let levels = 1u64 << bits;
    let mut x = arg / grid_step(bits);
    if x < 0.0 {
        x += levels as f64;
    }
    let lower = x.floor();
    let frac = x - lower;
    let idx = if frac > 0.5 + TIE_EPS {
        lower + 1.0
    } else {
        lower
    };
    QuantizedPhase::from_index((idx as u64 % levels) as u32, bits)
}

/// Wrapped distance between two phases, in `[0, π]`.
pub fn wrapped_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn link(n: usize, k: usize, kappa: f64) -> LinkConfig {
        LinkConfig::new(n, k, kappa, 3)
    }

    #[test]
    fn equivalent_link_examples() {
        let e = equivalent_link(&link(4, 1, 1.0)).unwrap();
        assert_eq!((e.rho_prime, e.kappa_prime), (1.0, 1.0));
        let e = equivalent_link(&link(4, 4, 1.0)).unwrap();
        assert_eq!((e.rho_prime, e.kappa_prime), (2.5, 4.0));
        let e = equivalent_link(&link(4, 8, 0.0)).unwrap();
        assert_eq!((e.rho_prime, e.kappa_prime), (1.0, 0.0));
    }

    #[test]
    fn config_validation() {
        assert!(link(0, 1, 1.0).validate().is_err());
        assert!(link(4, 0, 1.0).validate().is_err());
        assert!(link(4, 1, -1.0).validate().is_err());
        assert!(LinkConfig::new(4, 1, 1.0, 0).validate().is_err());
        assert!(link(4, 1, 1.0).with_rho(0.0).validate().is_err());
        let mut c = link(4, 1, 1.0);
        c.aoa_phi = 2.0;
        assert!(c.validate().is_err());
        c.aoa_phi = -PI / 2.0;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn los_only_limit() {
        let cfg = link(256, 4, 1e9);
        let ch = draw_channel(&cfg, RngStream::new(1, 0)).unwrap();
        for x in &ch.g {
            assert!((x.norm() - 4.0).abs() / 4.0 < 1e-3);
        }
        for l in &ch.los_unit {
            assert!((l.norm() - 1.0).abs() < 1e-15);
        }
    }

    fn mean_power(cfg: &LinkConfig) -> f64 {
        let ch = draw_channel(cfg, RngStream::new(11, 5)).unwrap();
        ch.g.iter().map(|x| x.norm_sqr()).sum::<f64>() / ch.g.len() as f64
    }

    #[test]
    fn rayleigh_unit_power() {
        let p = mean_power(&link(100_000, 1, 0.0));
        assert!((p - 1.0).abs() < 0.02, "{p}");
    }

    #[test]
    fn combined_power_k4() {
        // LoS κK²/(1+κ) = 8 plus NLoS K/(1+κ) = 2.
        let cfg = link(100_000, 4, 1.0);
        assert_eq!(cfg.combined_power(), 10.0);
        let p = mean_power(&cfg);
        assert!((p - 10.0).abs() / 10.0 < 0.02, "{p}");
    }

    #[test]
    fn channel_composition() {
        let cfg = link(64, 3, 2.0);
        let ch = draw_channel(&cfg, RngStream::new(3, 9)).unwrap();
        let a = (2.0f64 / 3.0).sqrt() * 3.0;
        let b = (1.0f64 / 3.0).sqrt();
        for i in 0..64 {
            let expect = ch.los_unit[i] * a + ch.nlos[i] * b;
            assert!((expect - ch.g[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn deterministic_draws() {
        let cfg = link(32, 2, 1.0);
        let a = draw_channel(&cfg, RngStream::new(5, 1)).unwrap();
        let b = draw_channel(&cfg, RngStream::new(5, 1)).unwrap();
        assert_eq!(a, b);
        let c = draw_channel(&cfg, RngStream::new(5, 2)).unwrap();
        assert_ne!(a.g, c.g);
    }

    #[test]
    fn equivalent_gains_unit_power() {
        let cfg = link(100_000, 4, 1.0);
        let ch = draw_channel(&cfg, RngStream::new(2, 2)).unwrap();
        let eq = ch.equivalent_gains();
        let p = eq.iter().map(|x| x.norm_sqr()).sum::<f64>() / eq.len() as f64;
        assert!((p - 1.0).abs() < 0.02, "{p}");
    }

    #[test]
    fn quantizer_examples() {
        let q = quantize_phase(Complex64::from_polar(1.0, 0.3), 3).unwrap();
        assert_eq!(q.index(), 0);
        let q = quantize_phase(Complex64::from_polar(1.0, PI), 1).unwrap();
        assert_eq!(q.index(), 1);
        assert_eq!(q.value(), PI);
        let q = quantize_phase(Complex64::from_polar(1.0, PI / 4.0), 2).unwrap();
        assert_eq!(q.index(), 0);
        // midpoint between the last grid point and 2π goes to the last index
        let q = quantize_phase(Complex64::from_polar(1.0, -PI / 4.0), 2).unwrap();
        assert_eq!(q.index(), 3);
        assert_eq!(
            quantize_phase(Complex64::new(0.0, 0.0), 3),
            Err(Error::UndefinedPhase)
        );
    }

    #[test]
    fn quantizer_matches_exhaustive_search() {
        let mut rng = RngStream::new(99, 0).rng();
        for bits in 1..=5 {
            let levels = 1u32 << bits;
            for _ in 0..2000 {
                let a: f64 = rng.random_range(-PI..PI);
                let q = quantize_phase(Complex64::from_polar(2.5, a), bits).unwrap();
                let best = (0..levels)
                    .min_by(|&i, &j| {
                        let di = wrapped_distance(a, i as f64 * grid_step(bits));
                        let dj = wrapped_distance(a, j as f64 * grid_step(bits));
                        di.partial_cmp(&dj).unwrap()
                    })
                    .unwrap();
                assert_eq!(q.index(), best, "a={a} B={bits}");
            }
        }
    }

    #[test]
    fn wrapped_distance_basics() {
        assert!((wrapped_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert!((wrapped_distance(PI, -PI)).abs() < 1e-12);
    }
}
