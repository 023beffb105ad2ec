//! Numerical integration: Gauss-Hermite rules and adaptive Simpson.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `P`-point Gauss-Hermite rule for `∫ e^{-t²} f(t) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub const DEFAULT_GH_ORDER: usize = 16;
const MAX_GH_ORDER: usize = 128;

/// Orthonormal Hermite recurrence; returns `(h_P(x), h_{P-1}(x))`.
fn hermite_pair(p: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    for j in 1..=p {
        let next = x * (2.0 / j as f64).sqrt() * cur - ((j - 1) as f64 / j as f64).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

impl GaussHermite {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > MAX_GH_ORDER {
            return Err(Error::Config(format!(
                "Gauss-Hermite order must be in 1..={MAX_GH_ORDER}: {order}"
            )));
        }
        let p = order;
        let mut nodes = vec![0.0; p];
        let mut weights = vec![0.0; p];
        // Newton on the largest roots first, seeded from the previous root.
        let half = p.div_ceil(2);
        let mut z = 0.0;
        for i in 0..half {
            z = match i {
                0 => {
                    (2.0 * p as f64 + 1.0).sqrt()
                        - 1.85575 * (2.0 * p as f64 + 1.0).powf(-1.0 / 6.0)
                }
                1 => z - 1.14 * (p as f64).powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[p - 1],
                3 => 1.91 * z - 0.91 * nodes[p - 2],
                _ => 2.0 * z - nodes[p - i + 1],
            };
            let mut converged = false;
            for _ in 0..100 {
                let (h, hm1) = hermite_pair(p, z);
                let d = (2.0 * p as f64).sqrt() * hm1;
                let dz = h / d;
                z -= dz;
                if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numerical(format!(
                    "Gauss-Hermite root {i} of order {p} did not converge"
                )));
            }
            let (_, hm1) = hermite_pair(p, z);
            let w = 1.0 / (p as f64 * hm1 * hm1);
            nodes[p - 1 - i] = z;
            nodes[i] = -z;
            weights[p - 1 - i] = w;
            weights[i] = w;
        }
        if p % 2 == 1 {
            nodes[p / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance.
///
/// Fails with [`Error::Numerical`] when the recursion hits `max_depth`
/// without meeting the tolerance or the integrand is not finite.
pub fn adaptive_simpson(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let v = simpson_step(&f, a, b, fa, fm, fb, whole, abs_tol, max_depth)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!(
            "non-finite integral on [{a}, {b}]"
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::Numerical(format!("non-finite integrand near {m}")));
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerical(format!(
            "adaptive Simpson did not converge near [{a}, {b}]"
        )));
    }
    Ok(
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?,
    )
}
