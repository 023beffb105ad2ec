use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{config_err, Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::special::q_function;

pub const CRAIG_ABS_TOL: f64 = 1e-12;
pub const CRAIG_MAX_DEPTH: u32 = 40;

/// One Craig-form wedge term `(1/2π)∫₀^{θmax} exp(−ρ′b²sin²ψ / sin²(θ+ψ)) dθ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wedge {
    pub b: f64,
    pub theta_max: f64,
    pub psi: f64,
    /// How many times the term enters the layer's error probability.
    pub weight: f64,
}

/// Decision-region wedges of one A-PSK layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionGeometry {
    pub layer: usize,
    pub wedges: Vec<Wedge>,
}

pub fn craig_wedge(b: f64, theta_max: f64, psi: f64, rho_prime: f64) -> Result<f64> {
    if !(b > 0.0) || !(theta_max > 0.0 && theta_max < TAU) || !(psi > 0.0 && psi < PI) {
        return config_err(format!(
            "craig wedge out of range: b={b}, theta_max={theta_max}, psi={psi}"
        ));
    }
    if !(rho_prime >= 0.0) {
        return config_err(format!("rho' must be >= 0: {rho_prime}"));
    }
    let c = rho_prime * b * b * psi.sin().powi(2);
    let f = |t: f64| {
        let s = (t + psi).sin();
        if s == 0.0 {
            0.0
        } else {
            (-c / (s * s)).exp()
        }
    };
    let v = adaptive_simpson(f, 0.0, theta_max, CRAIG_ABS_TOL * TAU, CRAIG_MAX_DEPTH)
        .map_err(|e| Error::Numerical(format!("craig wedge (b={b}, psi={psi}): {e}")))?;
    Ok(v / TAU)
}

/// `(A, b)` of the boundary between the ring of radius `inner` and the next
/// layer of gain `x`: `A = arctan((1 + 2·inner/x)·tan(π/V))` and
/// `b = sqrt((inner + x/2)²tan²(π/V) + (x/2)²)`.
fn boundary(inner: f64, x: f64, v: usize) -> (f64, f64) {
    let t = (PI / v as f64).tan();
    let a = ((1.0 + 2.0 * inner / x) * t).atan();
    let b = ((inner + 0.5 * x).powi(2) * t * t + (0.5 * x).powi(2)).sqrt();
    (a, b)
}

/// Wedges of every layer for real block gains `x[0..L]`, `L = M/V >= 2`.
pub fn apsk_geometry(x: &[f64], v: usize) -> Result<Vec<DecisionGeometry>> {
    let l_max = x.len();
    if l_max < 2 {
        return config_err(format!("A-PSK theory needs M/V >= 2 layers, got {l_max}"));
    }
    if v < 2 {
        return config_err(format!("A-PSK theory needs V >= 2, got {v}"));
    }
    if let Some(l) = x.iter().position(|&g| !(g > 0.0) || !g.is_finite()) {
        return Err(Error::Numerical(format!(
            "layer {}: block gain must be positive, got {}",
            l + 1,
            x[l]
        )));
    }
    let step = PI / v as f64;
    let w = |b, theta_max, psi, weight| Wedge {
        b,
        theta_max,
        psi,
        weight,
    };
    // prefix[l] = X_1 + ... + X_l
    let mut prefix = vec![0.0; l_max + 1];
    for l in 0..l_max {
        prefix[l + 1] = prefix[l] + x[l];
    }
    let mut out = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        let wedges = if l == 1 {
            let (a, b0) = boundary(prefix[1], x[1], v);
            vec![
                w(b0, PI - a, a - step, 1.0),
                w(x[0], 2.0 * a, step, 1.0),
                w(b0, PI - a, FRAC_PI_2 - a, 1.0),
            ]
        } else if l < l_max {
            let (a_in, b_in) = boundary(prefix[l - 1], x[l - 1], v);
            let (a_out, b_out) = boundary(prefix[l], x[l], v);
            vec![
                w(b_out, PI - a_in, a_out - step, 1.0),
                w(b_in, 2.0 * a_in, FRAC_PI_2 - a_in, 1.0),
                w(b_in, PI - a_in, a_in + step, 1.0),
                w(b_out, 2.0 * a_out, FRAC_PI_2 - a_out, 1.0),
            ]
        } else {
            let (a_in, b_in) = boundary(prefix[l - 1], x[l - 1], v);
            let psi1 = a_in + step;
            // (1/π)Σ_{k=0}^{1}∫₀^{π−ψ₁} exp(−ρ′b²sin²ψ₁/sin²θ)dθ: the integrand
            // does not depend on k, and reflecting θ → π−θ maps it onto a
            // standard wedge, so it enters as four wedge units.
            vec![
                w(b_in, 2.0 * a_in, FRAC_PI_2 - a_in, 1.0),
                w(b_in, PI - psi1, psi1, 4.0),
            ]
        };
        for wd in &wedges {
            let ok = wd.b > 0.0
                && wd.theta_max > 0.0
                && wd.theta_max < TAU
                && wd.psi > 0.0
                && wd.psi < PI;
            if !ok {
                return Err(Error::Numerical(format!(
                    "layer {l}: invalid decision geometry b={}, theta={}, psi={}",
                    wd.b, wd.theta_max, wd.psi
                )));
            }
        }
        out.push(DecisionGeometry { layer: l, wedges });
    }
    Ok(out)
}

/// A-PSK SEP approximation from real block gains: per-layer wedge sums
/// averaged with weight `V/M`.
pub fn sep_apsk_theory(x: &[f64], rho_prime: f64, m: usize, v: usize) -> Result<f64> {
    if v == 0 || !m.is_multiple_of(v) || m / v != x.len() {
        return config_err(format!(
            "A-PSK theory needs M/V block gains: M={m}, V={v}, got {}",
            x.len()
        ));
    }
    let geometry = apsk_geometry(x, v)?;
    let mut total = 0.0;
    for layer in &geometry {
        for wd in &layer.wedges {
            total += wd.weight * craig_wedge(wd.b, wd.theta_max, wd.psi, rho_prime)?;
        }
    }
    Ok(total / x.len() as f64)
}

/// QA-PSK SEP approximation from the real I/Q block gains
/// (`x_i[0]`, `x_q[0]` are the first blocks and do not enter).
///
/// Nearest-neighbour terms use `Q(sqrt(ρ′/2)·d)` for a distance `d`, which is
/// the pairwise error probability under `CN(0, 1)` noise.
pub fn sep_qapsk_theory(
    x_i: &[f64],
    x_q: &[f64],
    rho_prime: f64,
    m: usize,
    v: usize,
) -> Result<f64> {
    let side = x_i.len();
    if x_q.len() != side || v == 0 || !m.is_multiple_of(v) || side * side != m / v {
        return config_err(format!(
            "QA-PSK theory needs sqrt(M/V) gains per branch: M={m}, V={v}, I={}, Q={}",
            x_i.len(),
            x_q.len()
        ));
    }
    if v < 4 {
        return config_err(format!("QA-PSK theory requires V >= 4: V={v}"));
    }
    if !(rho_prime >= 0.0) {
        return config_err(format!("rho' must be >= 0: {rho_prime}"));
    }
    if let Some(g) = x_i.iter().chain(x_q).find(|g| !(**g > 0.0)) {
        return Err(Error::Numerical(format!(
            "QA-PSK block gain must be positive, got {g}"
        )));
    }
    let q = if v == 4 { 4.0 } else { 2.0 };
    let c = (2.0 * PI / v as f64).cos();
    let h = (rho_prime / 2.0).sqrt();
    let mut near = 0.0;
    let mut cross = 0.0;
    for l in 1..side {
        let (a, b) = (x_i[l], x_q[l]);
        near += q_function(h * a) + q_function(h * b);
        cross += q_function((rho_prime * (a * a + b * b - 2.0 * c * a * b) / 2.0).sqrt());
    }
    Ok(2.0 / side as f64 * near + q / (m / v) as f64 * cross)
}
