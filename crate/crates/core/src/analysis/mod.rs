//! Closed-form and quadrature theory: gain moments, the Gamma approximation,
//! DCMC capacity and SEP approximations for A-PSK and QA-PSK.

mod capacity;
mod moments;
mod sep;

pub use capacity::{dcmc_capacity_gh, dcmc_capacity_ub, mean_block_gains, mean_constellation};
pub use moments::{gain_moments, ks_statistic, per_element_mean, GainMoments, GammaFit};
pub use sep::{
    apsk_geometry, craig_wedge, sep_apsk_theory, sep_qapsk_theory, DecisionGeometry, Wedge,
    CRAIG_ABS_TOL, CRAIG_MAX_DEPTH,
};

use serde::{Deserialize, Serialize};

/// How theory curves obtain the block gains `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryMode {
    /// Evaluate on `Re(X)` of each drawn channel and average the results.
    #[default]
    ChannelAverage,
    /// Evaluate once on the moment-matched mean gains `E[X]`.
    MeanGains,
}
