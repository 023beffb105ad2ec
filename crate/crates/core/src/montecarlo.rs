//! Seeded Monte Carlo sweeps of SEP and mutual information, and theory sweeps
//! evaluated over the same channel draws.
//!
//! Channel `c` of every SNR point comes from the stream `(CHANNEL, c)`, so all
//! points of a sweep see the same channels. Noise for channel `c` at SNR index
//! `s` comes from `(SEP_NOISE | MI_NOISE, s, c)`. Results are merged in index
//! order, which makes them independent of the worker count.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::analysis::{
    dcmc_capacity_ub, mean_block_gains, sep_apsk_theory, sep_qapsk_theory, TheoryMode,
};
use crate::channel::{draw_channel, equivalent_link, LinkConfig};
use crate::detection::Detector;
use crate::error::{config_err, Error, Result};
use crate::modulation::{
    partition_blocks, received_signal_set, BlockGains, BlockPartition, ConstellationSet,
    SchemeConfig, SchemeKind,
};
use crate::quadrature::{GaussHermite, DEFAULT_GH_ORDER};
use crate::rng::{tags, RngStream};

/// Errors a point must collect before early stop may end it.
pub const EARLY_STOP_ERRORS: u64 = 100;
/// Channels evaluated between early-stop checks. Fixed so the stopping point
/// does not depend on scheduling.
pub const EARLY_STOP_CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub link: LinkConfig,
    pub scheme: SchemeConfig,
    /// Receive SNR `ρ` in dB, strictly increasing.
    pub snr_grid_db: Vec<f64>,
    pub trials_per_point: u64,
    pub channels_per_point: usize,
    pub master_seed: u64,
    pub early_stop: bool,
    pub theory_mode: TheoryMode,
    pub gh_order: usize,
}

impl SweepSpec {
    pub fn new(link: LinkConfig, scheme: SchemeConfig, snr_grid_db: Vec<f64>) -> Self {
        Self {
            link,
            scheme,
            snr_grid_db,
            trials_per_point: 10_000,
            channels_per_point: 100,
            master_seed: 0,
            early_stop: false,
            theory_mode: TheoryMode::ChannelAverage,
            gh_order: DEFAULT_GH_ORDER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.scheme
            .validate(self.link.elements, self.link.phase_bits)?;
        if self.snr_grid_db.is_empty() {
            return config_err("SNR grid is empty");
        }
        if self.snr_grid_db.iter().any(|x| !x.is_finite()) {
            return config_err("SNR grid must be finite");
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return config_err("SNR grid must be strictly increasing");
        }
        if self.trials_per_point == 0 {
            return config_err("trials_per_point must be >= 1");
        }
        if self.channels_per_point == 0 {
            return config_err("channels_per_point must be >= 1");
        }
        if self.trials_per_point < self.channels_per_point as u64 {
            return config_err(format!(
                "trials_per_point ({}) must be >= channels_per_point ({})",
                self.trials_per_point, self.channels_per_point
            ));
        }
        Ok(())
    }

    /// Equivalent SNR `ρ′` for a receive SNR in dB.
    pub fn rho_prime(&self, snr_db: f64) -> Result<f64> {
        Ok(equivalent_link(&self.link.with_rho(db_to_linear(snr_db)))?.rho_prime)
    }

    pub fn kappa_prime(&self) -> Result<f64> {
        Ok(equivalent_link(&self.link)?.kappa_prime)
    }

    /// Trials sent over channel `c`; the remainder goes to the first channels.
    fn trials_for(&self, c: usize) -> u64 {
        let n = self.channels_per_point as u64;
        self.trials_per_point / n + u64::from((c as u64) < self.trials_per_point % n)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A pooled Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub trials: u64,
    pub channels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub rho_prime: f64,
    pub sep_sim: Option<Estimate>,
    pub sep_theory: Option<f64>,
    pub capacity_sim: Option<Estimate>,
    pub capacity_ub: Option<f64>,
}

impl SweepPoint {
    fn empty(snr_db: f64, rho_prime: f64) -> Self {
        Self {
            snr_db,
            rho_prime,
            sep_sim: None,
            sep_theory: None,
            capacity_sim: None,
            capacity_ub: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

struct Prepared {
    partition: BlockPartition,
    rho_prime: Vec<f64>,
}

fn prepare(spec: &SweepSpec) -> Result<Prepared> {
    spec.validate()?;
    Ok(Prepared {
        partition: partition_blocks(spec.link.elements, &spec.scheme)?,
        rho_prime: spec
            .snr_grid_db
            .iter()
            .map(|&db| spec.rho_prime(db))
            .collect::<Result<_>>()?,
    })
}

/// Noiseless constellation of channel `c` of the sweep.
pub fn sweep_channel_constellation(spec: &SweepSpec, c: usize) -> Result<ConstellationSet> {
    let part = partition_blocks(spec.link.elements, &spec.scheme)?;
    channel_constellation(spec, &part, c)
}

fn channel_constellation(
    spec: &SweepSpec,
    part: &BlockPartition,
    c: usize,
) -> Result<ConstellationSet> {
    let stream = RngStream::derive(spec.master_seed, tags::CHANNEL, &[c as u64]);
    let g = draw_channel(&spec.link, stream)?.equivalent_gains();
    received_signal_set(&g, &spec.scheme, part, spec.link.phase_bits)
}

/// Symbol errors over `trials` uniform symbols through one fixed constellation.
pub fn count_symbol_errors(
    constellation: &ConstellationSet,
    rho_prime: f64,
    trials: u64,
    stream: RngStream,
) -> u64 {
    let det = Detector::new(constellation, rho_prime);
    let m = constellation.len();
    let mut rng = stream.rng();
    let mut errors = 0;
    for _ in 0..trials {
        let k = rng.random_range(0..m);
        let y = det.point(k) + complex_normal(&mut rng);
        if det.detect(y).0 != k {
            errors += 1;
        }
    }
    errors
}

pub fn simulate_sep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    let prep = prepare(spec)?;
    let pool = pool(workers)?;
    let n_snr = spec.snr_grid_db.len();
    let mut errors = vec![0u64; n_snr];
    let mut trials = vec![0u64; n_snr];
    let mut channels = vec![0usize; n_snr];
    let chunk = if spec.early_stop {
        EARLY_STOP_CHUNK
    } else {
        spec.channels_per_point
    };
    let mut start = 0;
    while start < spec.channels_per_point {
        let end = (start + chunk).min(spec.channels_per_point);
        let active: Vec<usize> = (0..n_snr)
            .filter(|&s| !spec.early_stop || errors[s] < EARLY_STOP_ERRORS)
            .collect();
        if active.is_empty() {
            break;
        }
        let tasks: Vec<(usize, usize)> = active
            .iter()
            .flat_map(|&s| (start..end).map(move |c| (s, c)))
            .collect();
        let counts: Vec<u64> = pool.install(|| {
            tasks
                .par_iter()
                .map(|&(s, c)| {
                    let con = channel_constellation(spec, &prep.partition, c)?;
                    let stream =
                        RngStream::derive(spec.master_seed, tags::SEP_NOISE, &[s as u64, c as u64]);
                    Ok(count_symbol_errors(
                        &con,
                        prep.rho_prime[s],
                        spec.trials_for(c),
                        stream,
                    ))
                })
                .collect::<Result<_>>()
        })?;
        for (&(s, c), e) in tasks.iter().zip(counts) {
            errors[s] += e;
            trials[s] += spec.trials_for(c);
            channels[s] += 1;
        }
        start = end;
    }
    let points = (0..n_snr)
        .map(|s| {
            let p = errors[s] as f64 / trials[s] as f64;
            let mut pt = SweepPoint::empty(spec.snr_grid_db[s], prep.rho_prime[s]);
            pt.sep_sim = Some(Estimate {
                value: p,
                stderr: (p * (1.0 - p) / trials[s] as f64).sqrt(),
                trials: trials[s],
                channels: channels[s],
            });
            pt
        })
        .collect();
    Ok(SweepResult { points })
}

/// Running first and second moments of per-trial samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MiSamples {
    pub sum: f64,
    pub sum_sq: f64,
    pub count: u64,
}

impl MiSamples {
    fn merge(&mut self, o: &MiSamples) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self.count += o.count;
    }

    /// `(log₂M − mean, standard error)`.
    pub fn capacity(&self, m: usize) -> (f64, f64) {
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        ((m as f64).log2() - mean, (var / n).sqrt())
    }
}

/// Samples of `log₂ Σ_{m₂} exp(−|d + n|² + |n|²)`, `d = sqrt(ρ′)(z_{m₁} − z_{m₂})`,
/// with the transmitted index `m₁` cycling through all labels.
pub fn mutual_information_samples(
    points: &[Complex64],
    rho_prime: f64,
    trials: u64,
    stream: RngStream,
) -> MiSamples {
    let a = rho_prime.sqrt();
    let scaled: Vec<Complex64> = points.iter().map(|z| z * a).collect();
    let m = scaled.len();
    let mut rng = stream.rng();
    let mut out = MiSamples::default();
    let mut expo = vec![0.0; m];
    for t in 0..trials {
        let z1 = scaled[(t % m as u64) as usize];
        let n = complex_normal(&mut rng);
        let base = n.norm_sqr();
        let mut peak = f64::NEG_INFINITY;
        for (e, z2) in expo.iter_mut().zip(&scaled) {
            *e = base - (z1 - z2 + n).norm_sqr();
            peak = peak.max(*e);
        }
        let v = (peak + expo.iter().map(|e| (e - peak).exp()).sum::<f64>().ln())
            / std::f64::consts::LN_2;
        out.sum += v;
        out.sum_sq += v * v;
        out.count += 1;
    }
    out
}

/// Monte Carlo mutual information of one fixed constellation: `(bits, stderr)`.
pub fn mutual_information_mc(
    points: &[Complex64],
    rho_prime: f64,
    trials: u64,
    stream: RngStream,
) -> (f64, f64) {
    mutual_information_samples(points, rho_prime, trials, stream).capacity(points.len())
}

pub fn simulate_capacity(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    let prep = prepare(spec)?;
    let pool = pool(workers)?;
    let n_snr = spec.snr_grid_db.len();
    let tasks: Vec<(usize, usize)> = (0..n_snr)
        .flat_map(|s| (0..spec.channels_per_point).map(move |c| (s, c)))
        .collect();
    let samples: Vec<MiSamples> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(s, c)| {
                let con = channel_constellation(spec, &prep.partition, c)?;
                let stream =
                    RngStream::derive(spec.master_seed, tags::MI_NOISE, &[s as u64, c as u64]);
                Ok(mutual_information_samples(
                    &con.points,
                    prep.rho_prime[s],
                    spec.trials_for(c),
                    stream,
                ))
            })
            .collect::<Result<_>>()
    })?;
    let mut pooled = vec![MiSamples::default(); n_snr];
    for (&(s, _), smp) in tasks.iter().zip(&samples) {
        pooled[s].merge(smp);
    }
    let points = (0..n_snr)
        .map(|s| {
            let (value, stderr) = pooled[s].capacity(spec.scheme.order);
            let mut pt = SweepPoint::empty(spec.snr_grid_db[s], prep.rho_prime[s]);
            pt.capacity_sim = Some(Estimate {
                value,
                stderr,
                trials: pooled[s].count,
                channels: spec.channels_per_point,
            });
            pt
        })
        .collect();
    Ok(SweepResult { points })
}

fn real_parts(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|z| z.re).collect()
}

/// SEP approximation for real-valued block gains; `None` for PSK, which has
/// no closed form.
pub fn sep_theory_for(
    scheme: &SchemeConfig,
    gains: &BlockGains,
    rho_prime: f64,
) -> Result<Option<f64>> {
    let m = scheme.order;
    let v = scheme.phases();
    match (scheme.kind, gains) {
        (SchemeKind::Psk, _) => Ok(None),
        (SchemeKind::Apsk, BlockGains::Apsk(x)) => {
            sep_apsk_theory(&real_parts(x), rho_prime, m, v).map(Some)
        }
        (SchemeKind::Qapsk, BlockGains::Qapsk { i, q }) => {
            sep_qapsk_theory(&real_parts(i), &real_parts(q), rho_prime, m, v).map(Some)
        }
        _ => config_err("block gains do not match the scheme"),
    }
}

/// Theory sweep: SEP approximation (A-PSK and QA-PSK) and the capacity upper
/// bound at every grid point.
pub fn theory_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    let prep = prepare(spec)?;
    let pool = pool(workers)?;
    let kappa_prime = spec.kappa_prime()?;
    let n = spec.link.elements;
    let bits = spec.link.phase_bits;
    let rule = GaussHermite::new(spec.gh_order)?;

    let gains: Vec<BlockGains> = match spec.theory_mode {
        TheoryMode::MeanGains => vec![mean_block_gains(&spec.scheme, n, bits, kappa_prime)?],
        TheoryMode::ChannelAverage => pool.install(|| {
            (0..spec.channels_per_point)
                .into_par_iter()
                .map(|c| Ok(channel_constellation(spec, &prep.partition, c)?.block_gains))
                .collect::<Result<_>>()
        })?,
    };

    let points: Vec<SweepPoint> = pool.install(|| {
        (0..spec.snr_grid_db.len())
            .into_par_iter()
            .map(|s| {
                let rho = prep.rho_prime[s];
                let mut pt = SweepPoint::empty(spec.snr_grid_db[s], rho);
                let mut total = 0.0;
                let mut any = false;
                for g in &gains {
                    if let Some(p) = sep_theory_for(&spec.scheme, g, rho)? {
                        total += p;
                        any = true;
                    }
                }
                pt.sep_theory = any.then(|| total / gains.len() as f64);
                pt.capacity_ub = Some(dcmc_capacity_ub(
                    &spec.scheme,
                    n,
                    bits,
                    kappa_prime,
                    rho,
                    &rule,
                )?);
                Ok(pt)
            })
            .collect::<Result<_>>()
    })?;
    Ok(SweepResult { points })
}

/// First SNR at which `proposed` exceeds `baseline`, linearly interpolated
/// between grid points; `None` when it never does or already does at the
/// first point.
pub fn crossover_scan(snr_db: &[f64], proposed: &[f64], baseline: &[f64]) -> Option<f64> {
    let diff: Vec<f64> = proposed.iter().zip(baseline).map(|(p, b)| p - b).collect();
    if diff.len() != snr_db.len() || diff.is_empty() || diff[0] > 0.0 {
        return None;
    }
    for i in 1..diff.len() {
        if diff[i] > 0.0 {
            let (d0, d1) = (diff[i - 1], diff[i]);
            let t = -d0 / (d1 - d0);
            return Some(snr_db[i - 1] + t * (snr_db[i] - snr_db[i - 1]));
        }
    }
    None
}

/// SNR at which a decreasing curve crosses `target`, by linear interpolation
/// in `log10(value)`.
pub fn snr_at_level(snr_db: &[f64], values: &[f64], target: f64) -> Option<f64> {
    let lt = target.log10();
    for i in 1..values.len().min(snr_db.len()) {
        let (a, b) = (values[i - 1], values[i]);
        if a >= target && b < target {
            if b <= 0.0 {
                return Some(snr_db[i]);
            }
            let (la, lb) = (a.log10(), b.log10());
            let t = (la - lt) / (la - lb);
            return Some(snr_db[i - 1] + t * (snr_db[i] - snr_db[i - 1]));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(scheme: SchemeConfig, n: usize, grid: Vec<f64>) -> SweepSpec {
        let mut s = SweepSpec::new(LinkConfig::new(n, 1, 1.0, 3), scheme, grid);
        s.trials_per_point = 4_000;
        s.channels_per_point = 10;
        s.master_seed = 5;
        s
    }

    #[test]
    fn validation() {
        let mut s = spec(SchemeConfig::psk(8), 16, vec![]);
        assert!(simulate_sep(&s, 1)
            .unwrap_err()
            .to_string()
            .contains("empty"));
        s.snr_grid_db = vec![0.0, 0.0];
        assert!(s.validate().is_err());
        s.snr_grid_db = vec![0.0];
        s.trials_per_point = 0;
        assert!(s.validate().is_err());
        s.trials_per_point = 5;
        assert!(s.validate().is_err());
        let s = spec(SchemeConfig::apsk(16, 4), 30, vec![0.0]);
        assert!(matches!(simulate_sep(&s, 1), Err(Error::Config(_))));
    }

    #[test]
    fn trial_split() {
        let mut s = spec(SchemeConfig::psk(8), 16, vec![0.0]);
        s.trials_per_point = 23;
        s.channels_per_point = 5;
        let t: Vec<u64> = (0..5).map(|c| s.trials_for(c)).collect();
        assert_eq!(t, vec![5, 5, 5, 4, 4]);
    }

    #[test]
    fn noise_free_regime_has_no_errors() {
        let s = spec(SchemeConfig::qapsk(16, 4), 64, vec![30.0]);
        let r = simulate_sep(&s, 2).unwrap();
        assert!(r.points[0].rho_prime >= 1e6 * 0.0 + 16.0);
        let e = r.points[0].sep_sim.unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.trials, 4_000);
    }

    #[test]
    fn zero_snr_is_guessing() {
        let mut s = spec(SchemeConfig::apsk(16, 4), 64, vec![-300.0]);
        s.trials_per_point = 20_000;
        let e = simulate_sep(&s, 2).unwrap().points[0].sep_sim.unwrap();
        assert!(
            (e.value - 15.0 / 16.0).abs() < 3.0 * e.stderr + 1e-3,
            "{e:?}"
        );
        let c = simulate_capacity(&s, 2).unwrap().points[0]
            .capacity_sim
            .unwrap();
        assert!(c.value.abs() < 3.0 * c.stderr + 1e-9, "{c:?}");
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut s = spec(SchemeConfig::qapsk(16, 4), 64, vec![-20.0, -17.0, -14.0]);
        s.early_stop = true;
        s.channels_per_point = 20;
        assert_eq!(simulate_sep(&s, 1).unwrap(), simulate_sep(&s, 3).unwrap());
        assert_eq!(
            simulate_capacity(&s, 1).unwrap(),
            simulate_capacity(&s, 4).unwrap()
        );
        assert_eq!(theory_sweep(&s, 1).unwrap(), theory_sweep(&s, 4).unwrap());
    }

    #[test]
    fn early_stop_stops_on_chunk_boundary() {
        let mut s = spec(SchemeConfig::psk(16), 16, vec![-30.0, 10.0]);
        s.early_stop = true;
        s.channels_per_point = 40;
        s.trials_per_point = 40_000;
        let r = simulate_sep(&s, 2).unwrap();
        let low = r.points[0].sep_sim.unwrap();
        assert_eq!(low.channels, EARLY_STOP_CHUNK);
        assert_eq!(low.trials, 8_000);
        // A point that never reaches the error target runs to completion.
        assert_eq!(r.points[1].sep_sim.unwrap().channels, 40);
    }

    #[test]
    fn crossover_examples() {
        let g = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(
            crossover_scan(&g, &[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]),
            None
        );
        let x = crossover_scan(&g, &[0.0, 0.5, 2.0, 4.0], &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((x - (1.0 + 1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(snr_at_level(&g, &[1.0, 0.1, 0.01, 0.001], 0.01), Some(2.0));
        let x = snr_at_level(&g, &[1.0, 0.1, 0.01, 0.001], 10f64.powf(-1.5)).unwrap();
        assert!((x - 1.5).abs() < 1e-12);
        assert_eq!(snr_at_level(&g, &[1.0, 0.5, 0.4, 0.3], 0.01), None);
    }

    #[test]
    fn theory_modes() {
        let mut s = spec(SchemeConfig::apsk(32, 8), 128, vec![-16.0, -12.0]);
        let avg = theory_sweep(&s, 2).unwrap();
        s.theory_mode = TheoryMode::MeanGains;
        let mean = theory_sweep(&s, 2).unwrap();
        for (a, m) in avg.points.iter().zip(&mean.points) {
            let (a, m) = (a.sep_theory.unwrap(), m.sep_theory.unwrap());
            assert!(a > 0.0 && m > 0.0 && (a / m).ln().abs() < 2.0, "{a} vs {m}");
        }
        let psk = theory_sweep(&spec(SchemeConfig::psk(8), 16, vec![0.0]), 1).unwrap();
        assert!(psk.points[0].sep_theory.is_none());
        assert!(psk.points[0].capacity_ub.is_some());
    }
}
