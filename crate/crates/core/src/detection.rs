//! Maximum-likelihood detection by exhaustive minimum-distance search.

use num_complex::Complex64;

use crate::modulation::{ConstellationSet, SymbolLabel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceivedSample {
    pub y: Complex64,
    /// Equivalent SNR `ρ'`, linear.
    pub rho_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// Label index in `[0, M)`.
    pub index: usize,
    pub label: SymbolLabel,
    /// Squared distance `|y − sqrt(ρ')·z|²` to the chosen point.
    pub metric: f64,
}

/// `argmin_k |y − sqrt(ρ')·z_k|²`, ties to the smallest index.
pub fn ml_detect(sample: &ReceivedSample, constellation: &ConstellationSet) -> Detection {
    let d = Detector::new(constellation, sample.rho_prime);
    let (index, metric) = d.detect(sample.y);
    Detection {
        index,
        label: constellation.labels[index],
        metric,
    }
}

/// ML detector with the constellation pre-scaled by `sqrt(ρ')`.
#[derive(Debug, Clone)]
pub struct Detector {
    scaled: Vec<Complex64>,
}

impl Detector {
    pub fn new(constellation: &ConstellationSet, rho_prime: f64) -> Self {
        assert!(!constellation.is_empty(), "empty constellation");
        let a = rho_prime.sqrt();
        Self {
            scaled: constellation.points.iter().map(|z| z * a).collect(),
        }
    }

    /// Scaled point of label index `k`.
    pub fn point(&self, k: usize) -> Complex64 {
        self.scaled[k]
    }

    pub fn detect(&self, y: Complex64) -> (usize, f64) {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, z) in self.scaled.iter().enumerate() {
            let d = (y - z).norm_sqr();
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        (best, best_d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channel, LinkConfig};
    use crate::modulation::{partition_blocks, received_signal_set, BlockGains, SchemeConfig};
    use crate::rng::RngStream;
    use rand::Rng;

    fn bpsk(a: Complex64) -> ConstellationSet {
        ConstellationSet::from_block_gains(&SchemeConfig::psk(2), BlockGains::Psk(a)).unwrap()
    }

    #[test]
    fn noiseless_sample_detected() {
        let c = bpsk(Complex64::new(1.5, 0.5));
        for k in 0..2 {
            let y = c.points[k] * 4.0f64.sqrt();
            let d = ml_detect(&ReceivedSample { y, rho_prime: 4.0 }, &c);
            assert_eq!(d.index, k);
            assert!(d.metric < 1e-24);
        }
    }

    #[test]
    fn sign_detector() {
        let a = Complex64::new(2.0, 0.0);
        let c = bpsk(a);
        let y = a * 0.1 * 3.0f64.sqrt();
        assert_eq!(
            ml_detect(&ReceivedSample { y, rho_prime: 3.0 }, &c).index,
            0
        );
        assert_eq!(
            ml_detect(
                &ReceivedSample {
                    y: -y,
                    rho_prime: 3.0
                },
                &c
            )
            .index,
            1
        );
    }

    #[test]
    fn ties_go_to_smallest_index() {
        let mut c = bpsk(Complex64::new(1.0, 0.0));
        // exact mirror images, so y on the imaginary axis is equidistant
        c.points = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let d = ml_detect(
            &ReceivedSample {
                y: Complex64::new(0.0, 1.0),
                rho_prime: 1.0,
            },
            &c,
        );
        assert_eq!(d.index, 0);
        c.points.reverse();
        assert_eq!(
            ml_detect(
                &ReceivedSample {
                    y: Complex64::new(0.0, -3.0),
                    rho_prime: 1.0
                },
                &c
            )
            .index,
            0
        );
    }

    fn brute_force(y: Complex64, rho: f64, pts: &[Complex64]) -> usize {
        let mut best = None::<(usize, f64)>;
        for (k, p) in pts.iter().enumerate() {
            let dr = y.re - rho.sqrt() * p.re;
            let di = y.im - rho.sqrt() * p.im;
            let d = dr * dr + di * di;
            match best {
                Some((_, bd)) if bd <= d => {}
                _ => best = Some((k, d)),
            }
        }
        best.unwrap().0
    }

    #[test]
    fn matches_brute_force_and_noiseless_for_all_schemes() {
        let mut rng = RngStream::new(4, 4).rng();
        for s in [
            SchemeConfig::psk(16),
            SchemeConfig::apsk(16, 4),
            SchemeConfig::qapsk(16, 4),
            SchemeConfig::apsk(128, 8),
        ] {
            for seed in 0..5 {
                let g = draw_channel(&LinkConfig::new(64, 1, 1.0, 3), RngStream::new(seed, 1))
                    .unwrap()
                    .equivalent_gains();
                let part = partition_blocks(64, &s).unwrap();
                let c = received_signal_set(&g, &s, &part, 3).unwrap();
                let rho: f64 = 0.05;
                for k in 0..c.len() {
                    let y = c.points[k] * rho.sqrt();
                    assert_eq!(
                        ml_detect(&ReceivedSample { y, rho_prime: rho }, &c).index,
                        k
                    );
                }
                for _ in 0..200 {
                    let y = Complex64::new(
                        rng.random_range(-20.0..20.0),
                        rng.random_range(-20.0..20.0),
                    );
                    assert_eq!(
                        ml_detect(&ReceivedSample { y, rho_prime: rho }, &c).index,
                        brute_force(y, rho, &c.points)
                    );
                }
            }
        }
    }

    #[test]
    fn scale_covariance() {
        let g = draw_channel(&LinkConfig::new(64, 1, 1.0, 3), RngStream::new(2, 1))
            .unwrap()
            .equivalent_gains();
        let s = SchemeConfig::qapsk(16, 4);
        let part = partition_blocks(64, &s).unwrap();
        let c = received_signal_set(&g, &s, &part, 3).unwrap();
        let factor = Complex64::new(-0.3, 1.7);
        let mut scaled = c.clone();
        scaled.points.iter_mut().for_each(|p| *p *= factor);
        let mut rng = RngStream::new(9, 9).rng();
        for _ in 0..500 {
            let y = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let a = ml_detect(&ReceivedSample { y, rho_prime: 0.1 }, &c).index;
            let b = ml_detect(
                &ReceivedSample {
                    y: y * factor,
                    rho_prime: 0.1,
                },
                &scaled,
            )
            .index;
            assert_eq!(a, b);
        }
    }
}
