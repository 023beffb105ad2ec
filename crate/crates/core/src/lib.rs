//! Link-level simulation and analysis of single-RF-chain RIS transmitters
//! that modulate through ON/OFF block patterns and quantized phase shifts:
//! PSK, A-PSK (amplitude-phase) and QA-PSK (quadrature amplitude-phase).

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod artifact;
pub mod channel;
pub mod config;
pub mod detection;
pub mod error;
pub mod modulation;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use channel::{
    draw_channel, equivalent_link, quantize_phase, EquivalentLink, LinkConfig, QuantizedPhase,
};
pub use detection::{ml_detect, Detector, ReceivedSample};
pub use error::{Error, Result};
pub use modulation::{
    partition_blocks, received_signal_set, BlockGains, BlockPartition, ConstellationSet,
    SchemeConfig, SchemeKind, SymbolLabel,
};
pub use rng::RngStream;
