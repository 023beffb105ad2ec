//! RIS ON-OFF/phase patterns and the received constellations of the PSK,
//! A-PSK and QA-PSK schemes.
//!
//! Blocks are contiguous in element index. For QA-PSK the first `N/2`
//! elements form the I-branch. Symbol labels are numbered v-major:
//!
//! ```text
//! PSK:    index = m
//! A-PSK:  index = v·(M/V) + (l − 1)
//! QA-PSK: index = v·(M/V) + (l1 − 1)·sqrt(M/V) + (l2 − 1)
//! ```

use std::f64::consts::TAU;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{grid_step, quantize_arg, QuantizedPhase, MAX_PHASE_BITS};
use crate::error::{config_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Psk,
    Apsk,
    Qapsk,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Psk => "psk",
            SchemeKind::Apsk => "apsk",
            SchemeKind::Qapsk => "qapsk",
        }
    }
}

/// Modulation scheme with its order `M` and phase-level count `V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Constellation order `M`.
    #[serde(rename = "m")]
    pub order: usize,
    /// Phase levels `V`; A-PSK and QA-PSK only.
    #[serde(rename = "v", default, skip_serializing_if = "Option::is_none")]
    pub phase_levels: Option<usize>,
}

fn is_pow2(x: usize) -> bool {
    x != 0 && x & (x - 1) == 0
}

fn exact_sqrt(x: usize) -> Option<usize> {
    let r = (x as f64).sqrt().round() as usize;
    (r * r == x).then_some(r)
}

impl SchemeConfig {
    pub fn psk(order: usize) -> Self {
        Self {
            kind: SchemeKind::Psk,
            order,
            phase_levels: None,
        }
    }

    pub fn apsk(order: usize, phase_levels: usize) -> Self {
        Self {
            kind: SchemeKind::Apsk,
            order,
            phase_levels: Some(phase_levels),
        }
    }

    pub fn qapsk(order: usize, phase_levels: usize) -> Self {
        Self {
            kind: SchemeKind::Qapsk,
            order,
            phase_levels: Some(phase_levels),
        }
    }

    /// `V` for A-PSK/QA-PSK, `M` for PSK.
    pub fn phases(&self) -> usize {
        self.phase_levels.unwrap_or(self.order)
    }

    /// Amplitude levels: `M/V` for A-PSK, `sqrt(M/V)` per branch for QA-PSK.
    pub fn layers(&self) -> usize {
        match self.kind {
            SchemeKind::Psk => 1,
            SchemeKind::Apsk => self.order / self.phases(),
            SchemeKind::Qapsk => exact_sqrt(self.order / self.phases()).unwrap_or(0),
        }
    }

    /// Elements per block for an `n`-element surface.
    pub fn block_size(&self, n: usize) -> usize {
        match self.kind {
            SchemeKind::Psk => n,
            SchemeKind::Apsk => n / self.layers(),
            SchemeKind::Qapsk => n / 2 / self.layers(),
        }
    }

    /// Checks `M`, `V` and the block-divisibility constraints for `n` elements
    /// and `bits` of phase resolution.
    pub fn validate(&self, n: usize, bits: u32) -> Result<()> {
        if bits == 0 || bits > MAX_PHASE_BITS {
            return config_err(format!("B must be in 1..={MAX_PHASE_BITS}: B={bits}"));
        }
        if self.order < 2 || !is_pow2(self.order) {
            return config_err(format!("M must be a power of 2 and >= 2: M={}", self.order));
        }
        if self.kind == SchemeKind::Psk {
            if self.phase_levels.is_some() {
                return config_err("V is not used by PSK");
            }
            if n == 0 {
                return config_err("N must be positive");
            }
            return Ok(());
        }
        let v = match self.phase_levels {
            Some(v) => v,
            None => return config_err(format!("V is required for {}", self.kind.name())),
        };
        if !is_pow2(v) || !(1usize << bits).is_multiple_of(v) {
            return config_err(format!("V must divide 2^B: V={v}, B={bits}"));
        }
        if v > self.order {
            return config_err(format!("V must not exceed M: V={v}, M={}", self.order));
        }
        let amp = self.order / v;
        match self.kind {
            SchemeKind::Apsk => {
                if n == 0 || !n.is_multiple_of(amp) {
                    return config_err(format!("M/V must divide N: M/V={amp}, N={n}"));
                }
            }
            SchemeKind::Qapsk => {
                if bits < 2 {
                    return config_err(format!("QA-PSK requires B >= 2: B={bits}"));
                }
                if v < 4 {
                    return config_err(format!("QA-PSK requires V >= 4: V={v}"));
                }
                let side = match exact_sqrt(amp) {
                    Some(s) => s,
                    None => return config_err(format!("M/V must be a perfect square: M/V={amp}")),
                };
                if n == 0 || !n.is_multiple_of(2) || !(n / 2).is_multiple_of(side) {
                    return config_err(format!(
                        "(N/2)*sqrt(V/M) must be a positive integer: N={n}, sqrt(M/V)={side}"
                    ));
                }
            }
            SchemeKind::Psk => unreachable!(),
        }
        Ok(())
    }

    pub fn label(&self, index: usize) -> Result<SymbolLabel> {
        if index >= self.order {
            return config_err(format!(
                "label index {index} out of range for M={}",
                self.order
            ));
        }
        Ok(match self.kind {
            SchemeKind::Psk => SymbolLabel::Psk { m: index },
            SchemeKind::Apsk => {
                let amp = self.order / self.phases();
                SymbolLabel::Apsk {
                    layer: index % amp + 1,
                    phase: index / amp,
                }
            }
            SchemeKind::Qapsk => {
                let side = self.layers();
                let amp = side * side;
                let r = index % amp;
                SymbolLabel::Qapsk {
                    layer_i: r / side + 1,
                    layer_q: r % side + 1,
                    phase: index / amp,
                }
            }
        })
    }

    pub fn index(&self, label: &SymbolLabel) -> Result<usize> {
        let v = self.phases();
        let idx = match (*label, self.kind) {
            (SymbolLabel::Psk { m }, SchemeKind::Psk) if m < self.order => m,
            (SymbolLabel::Apsk { layer, phase }, SchemeKind::Apsk)
                if (1..=self.layers()).contains(&layer) && phase < v =>
            {
                phase * self.layers() + layer - 1
            }
            (
                SymbolLabel::Qapsk {
                    layer_i,
                    layer_q,
                    phase,
                },
                SchemeKind::Qapsk,
            ) if (1..=self.layers()).contains(&layer_i)
                && (1..=self.layers()).contains(&layer_q)
                && phase < v =>
            {
                let side = self.layers();
                phase * side * side + (layer_i - 1) * side + layer_q - 1
            }
            _ => return config_err(format!("label {label:?} invalid for {self:?}")),
        };
        Ok(idx)
    }
}

/// Generating tuple of one constellation point. Layers are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolLabel {
    Psk {
        m: usize,
    },
    Apsk {
        layer: usize,
        phase: usize,
    },
    Qapsk {
        layer_i: usize,
        layer_q: usize,
        phase: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    None,
    I,
    Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub range: Range<usize>,
    pub branch: Branch,
}

/// Contiguous partition of the surface into the scheme's blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    pub blocks: Vec<Block>,
}

impl BlockPartition {
    /// Blocks of one branch in order (`Branch::None` for PSK/A-PSK).
    pub fn branch(&self, branch: Branch) -> impl Iterator<Item = &Block> + '_ {
        self.blocks.iter().filter(move |b| b.branch == branch)
    }

    pub fn elements(&self) -> usize {
        self.blocks.iter().map(|b| b.range.len()).sum()
    }
}

fn check_elements(n: usize, scheme: &SchemeConfig) -> Result<()> {
    if scheme.order < 2 || !is_pow2(scheme.order) {
        return config_err(format!(
            "M must be a power of 2 and >= 2: M={}",
            scheme.order
        ));
    }
    let v = scheme.phases();
    if scheme.kind != SchemeKind::Psk && (!is_pow2(v) || v > scheme.order) {
        return config_err(format!("V must be a power of 2 not exceeding M: V={v}"));
    }
    // B only enters through V | 2^B, so any B large enough for V works here.
    let bits = match scheme.kind {
        SchemeKind::Psk => 2,
        _ => v.trailing_zeros().clamp(2, MAX_PHASE_BITS),
    };
    scheme.validate(n, bits)
}

pub fn partition_blocks(n: usize, scheme: &SchemeConfig) -> Result<BlockPartition> {
    check_elements(n, scheme)?;
    let blocks = match scheme.kind {
        SchemeKind::Psk => vec![Block {
            range: 0..n,
            branch: Branch::None,
        }],
        SchemeKind::Apsk => {
            let size = scheme.block_size(n);
            (0..scheme.layers())
                .map(|l| Block {
                    range: l * size..(l + 1) * size,
                    branch: Branch::None,
                })
                .collect()
        }
        SchemeKind::Qapsk => {
            let size = scheme.block_size(n);
            let half = n / 2;
            let side = scheme.layers();
            let i = (0..side).map(|l| Block {
                range: l * size..(l + 1) * size,
                branch: Branch::I,
            });
            let q = (0..side).map(|l| Block {
                range: half + l * size..half + (l + 1) * size,
                branch: Branch::Q,
            });
            i.chain(q).collect()
        }
    };
    Ok(BlockPartition { blocks })
}

/// ON-OFF state and quantized phase of every element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RisPattern {
    pub on: Vec<bool>,
    /// Meaningful only where `on` is set; index 0 elsewhere.
    pub phase: Vec<QuantizedPhase>,
}

impl RisPattern {
    fn off(n: usize, bits: u32) -> Self {
        Self {
            on: vec![false; n],
            phase: vec![QuantizedPhase::from_index(0, bits); n],
        }
    }

    pub fn amplitude(&self, n: usize) -> f64 {
        if self.on[n] {
            1.0
        } else {
            0.0
        }
    }

    /// `g·Θ`: sum of `g_n e^{jθ_n}` over ON elements.
    pub fn received(&self, g: &[Complex64]) -> Complex64 {
        g.iter()
            .zip(self.on.iter().zip(&self.phase))
            .filter(|(_, (on, _))| **on)
            .map(|(gn, (_, p))| gn * p.phasor())
            .sum()
    }
}

/// `quantize(e^{jφ}·conj(g_n))` where `φ` is a multiple of `2π/levels`.
fn compensating_phase(gn: Complex64, step: usize, levels: usize, bits: u32) -> QuantizedPhase {
    quantize_arg(TAU * step as f64 / levels as f64 - gn.arg(), bits)
}

fn check_len(g: &[Complex64], part: &BlockPartition) -> Result<()> {
    if g.len() != part.elements() {
        return config_err(format!(
            "channel has {} elements but the partition covers {}",
            g.len(),
            part.elements()
        ));
    }
    Ok(())
}

/// State-of-the-art PSK: every element ON, phase `quantize(e^{j2πm/M}·conj(g_n))`.
pub fn psk_pattern(g: &[Complex64], m: usize, order: usize, bits: u32) -> RisPattern {
    RisPattern {
        on: vec![true; g.len()],
        phase: g
            .iter()
            .map(|&gn| compensating_phase(gn, m, order, bits))
            .collect(),
    }
}

/// A-PSK: blocks `1..=layer` ON, compensated and rotated by `2πv/V`.
pub fn apsk_pattern(
    g: &[Complex64],
    part: &BlockPartition,
    layer: usize,
    phase: usize,
    scheme: &SchemeConfig,
    bits: u32,
) -> Result<RisPattern> {
    check_len(g, part)?;
    let v = scheme.phases();
    if scheme.kind != SchemeKind::Apsk || !(1..=scheme.layers()).contains(&layer) || phase >= v {
        return config_err(format!("invalid A-PSK symbol (l={layer}, v={phase})"));
    }
    let mut pat = RisPattern::off(g.len(), bits);
    for block in part.branch(Branch::None).take(layer) {
        for n in block.range.clone() {
            pat.on[n] = true;
            pat.phase[n] = compensating_phase(g[n], phase, v, bits);
        }
    }
    Ok(pat)
}

/// QA-PSK: I-blocks `1..=l1` and Q-blocks `1..=l2` ON; the Q-branch gets an
/// extra `2π/V` rotation applied on the grid after quantization.
pub fn qapsk_pattern(
    g: &[Complex64],
    part: &BlockPartition,
    layer_i: usize,
    layer_q: usize,
    phase: usize,
    scheme: &SchemeConfig,
    bits: u32,
) -> Result<RisPattern> {
    check_len(g, part)?;
    let v = scheme.phases();
    let side = scheme.layers();
    if scheme.kind != SchemeKind::Qapsk
        || !(1..=side).contains(&layer_i)
        || !(1..=side).contains(&layer_q)
        || phase >= v
    {
        return config_err(format!(
            "invalid QA-PSK symbol (l1={layer_i}, l2={layer_q}, v={phase})"
        ));
    }
    let shift = ((1u64 << bits) / v as u64) as u32;
    let mut pat = RisPattern::off(g.len(), bits);
    for block in part.branch(Branch::I).take(layer_i) {
        for n in block.range.clone() {
            pat.on[n] = true;
            pat.phase[n] = compensating_phase(g[n], phase, v, bits);
        }
    }
    for block in part.branch(Branch::Q).take(layer_q) {
        for n in block.range.clone() {
            let base = compensating_phase(g[n], phase, v, bits);
            pat.on[n] = true;
            pat.phase[n] = QuantizedPhase::from_index(base.index() + shift, bits);
        }
    }
    Ok(pat)
}

/// Pattern for any label of any scheme.
pub fn pattern_for(
    g: &[Complex64],
    part: &BlockPartition,
    scheme: &SchemeConfig,
    label: &SymbolLabel,
    bits: u32,
) -> Result<RisPattern> {
    match *label {
        SymbolLabel::Psk { m } => {
            check_len(g, part)?;
            Ok(psk_pattern(g, m, scheme.order, bits))
        }
        SymbolLabel::Apsk { layer, phase } => apsk_pattern(g, part, layer, phase, scheme, bits),
        SymbolLabel::Qapsk {
            layer_i,
            layer_q,
            phase,
        } => qapsk_pattern(g, part, layer_i, layer_q, phase, scheme, bits),
    }
}

/// Per-block channel gains `X` at `v = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockGains {
    /// Constant envelope `X = g·quantize(g^H)` of PSK.
    Psk(Complex64),
    Apsk(Vec<Complex64>),
    /// Both branches are plain phase-compensated sums; the Q branch's extra
    /// `e^{j2π/V}` is applied when the points are built.
    Qapsk {
        i: Vec<Complex64>,
        q: Vec<Complex64>,
    },
}

impl BlockGains {
    /// All block gains in block order (I before Q).
    pub fn values(&self) -> Vec<Complex64> {
        match self {
            BlockGains::Psk(x) => vec![*x],
            BlockGains::Apsk(x) => x.clone(),
            BlockGains::Qapsk { i, q } => i.iter().chain(q).copied().collect(),
        }
    }
}

/// Ordered received constellation of one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSet {
    pub scheme: SchemeConfig,
    /// `points[k]` is the noiseless received point of label index `k`.
    pub points: Vec<Complex64>,
    pub labels: Vec<SymbolLabel>,
    pub block_gains: BlockGains,
}

impl ConstellationSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Builds the constellation from block gains with the closed forms
    /// `e^{j2πv/V} Σ X_l` (A-PSK), `e^{j2πv/V}(Σ X^(I) + e^{j2π/V} Σ X^(Q))`
    /// (QA-PSK) and `e^{j2πm/M} X` (PSK with `M <= 2^B`, or mean gains).
    pub fn from_block_gains(scheme: &SchemeConfig, gains: BlockGains) -> Result<Self> {
        let v = scheme.phases();
        let rot = |k: usize| Complex64::from_polar(1.0, TAU * k as f64 / v as f64);
        let points: Vec<Complex64> = match (&gains, scheme.kind) {
            (BlockGains::Psk(x), SchemeKind::Psk) => {
                (0..scheme.order).map(|m| rot(m) * x).collect()
            }
            (BlockGains::Apsk(x), SchemeKind::Apsk) if x.len() == scheme.layers() => {
                let sums = prefix_sums(x);
                (0..scheme.order)
                    .map(|idx| match scheme.label(idx).unwrap() {
                        SymbolLabel::Apsk { layer, phase } => rot(phase) * sums[layer - 1],
                        _ => unreachable!(),
                    })
                    .collect()
            }
            (BlockGains::Qapsk { i, q }, SchemeKind::Qapsk)
                if i.len() == scheme.layers() && q.len() == scheme.layers() =>
            {
                let si = prefix_sums(i);
                let sq = prefix_sums(q);
                (0..scheme.order)
                    .map(|idx| match scheme.label(idx).unwrap() {
                        SymbolLabel::Qapsk {
                            layer_i,
                            layer_q,
                            phase,
                        } => rot(phase) * (si[layer_i - 1] + rot(1) * sq[layer_q - 1]),
                        _ => unreachable!(),
                    })
                    .collect()
            }
            _ => {
                return Err(Error::Config(format!(
                    "block gains do not match scheme {scheme:?}"
                )))
            }
        };
        let labels = (0..scheme.order)
            .map(|k| scheme.label(k))
            .collect::<Result<_>>()?;
        Ok(Self {
            scheme: *scheme,
            points,
            labels,
            block_gains: gains,
        })
    }
}

fn prefix_sums(x: &[Complex64]) -> Vec<Complex64> {
    x.iter()
        .scan(Complex64::new(0.0, 0.0), |acc, &xi| {
            *acc += xi;
            Some(*acc)
        })
        .collect()
}

/// Compensated block sums `Σ_{n∈block} g_n e^{jθ_n}` with
/// `θ_n = quantize(e^{j2πv/V} conj(g_n))`, one entry per block of `branch`.
fn block_sums(
    g: &[Complex64],
    args: &[f64],
    part: &BlockPartition,
    branch: Branch,
    rotation: f64,
    phasors: &[Complex64],
    bits: u32,
) -> Vec<Complex64> {
    part.branch(branch)
        .map(|b| {
            b.range
                .clone()
                .map(|n| g[n] * phasors[quantize_arg(rotation - args[n], bits).index() as usize])
                .sum()
        })
        .collect()
}

/// Received constellation `{g·Θ(label)}` for every label of `scheme`.
///
/// Phases are quantized after rotation, per element and per phase level.
pub fn received_signal_set(
    g: &[Complex64],
    scheme: &SchemeConfig,
    part: &BlockPartition,
    bits: u32,
) -> Result<ConstellationSet> {
    scheme.validate(g.len(), bits)?;
    check_len(g, part)?;
    let args: Vec<f64> = g.iter().map(|x| x.arg()).collect();
    let levels = 1usize << bits;
    let phasors: Vec<Complex64> = (0..levels)
        .map(|k| Complex64::from_polar(1.0, k as f64 * grid_step(bits)))
        .collect();
    let v = scheme.phases();
    let rot_angle = |k: usize| TAU * k as f64 / v as f64;

    let (points, block_gains) = match scheme.kind {
        SchemeKind::Psk => {
            let pts: Vec<Complex64> = (0..scheme.order)
                .map(|m| block_sums(g, &args, part, Branch::None, rot_angle(m), &phasors, bits)[0])
                .collect();
            let x = pts[0];
            (pts, BlockGains::Psk(x))
        }
        SchemeKind::Apsk => {
            let amp = scheme.layers();
            let mut pts = vec![Complex64::new(0.0, 0.0); scheme.order];
            let mut gains = Vec::new();
            for phase in 0..v {
                let sums = block_sums(
                    g,
                    &args,
                    part,
                    Branch::None,
                    rot_angle(phase),
                    &phasors,
                    bits,
                );
                for (l, s) in prefix_sums(&sums).into_iter().enumerate() {
                    pts[phase * amp + l] = s;
                }
                if phase == 0 {
                    gains = sums;
                }
            }
            (pts, BlockGains::Apsk(gains))
        }
        SchemeKind::Qapsk => {
            let side = scheme.layers();
            let q_rot = Complex64::from_polar(1.0, rot_angle(1));
            let mut pts = vec![Complex64::new(0.0, 0.0); scheme.order];
            let mut gains = None;
            for phase in 0..v {
                let si = block_sums(g, &args, part, Branch::I, rot_angle(phase), &phasors, bits);
                let sq = block_sums(g, &args, part, Branch::Q, rot_angle(phase), &phasors, bits);
                let pi = prefix_sums(&si);
                let pq = prefix_sums(&sq);
                for (a, ia) in pi.iter().enumerate() {
                    for (b, qb) in pq.iter().enumerate() {
                        pts[phase * side * side + a * side + b] = ia + q_rot * qb;
                    }
                }
                if phase == 0 {
                    gains = Some(BlockGains::Qapsk { i: si, q: sq });
                }
            }
            (pts, gains.expect("V >= 1"))
        }
    };
    let labels = (0..scheme.order)
        .map(|k| scheme.label(k))
        .collect::<Result<_>>()?;
    Ok(ConstellationSet {
        scheme: *scheme,
        points,
        labels,
        block_gains,
    })
}
