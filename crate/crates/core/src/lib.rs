//! Polar codes with belief-propagation decoding.
//!
//! Construction and encoding live in [`code`], the BP message lattice and
//! min-sum kernels in [`graph`], constituent-code classification in
//! [`constituent`], the decoders in [`decoder`] and the Monte Carlo runner in
//! [`sim`].

pub mod code;
pub mod constituent;
pub mod decoder;
pub mod error;
pub mod graph;
pub mod sim;

pub use code::{ParityCheck, PolarCode, DEFAULT_ERASURE};
pub use constituent::{classify, rep_update, spc_update, ConstituentNode, ConstituentTree, Kind};
pub use decoder::{
    count_units_per_iteration, decode_conventional, decode_roundtrip, decode_xjbp, hard_decision,
    DecodeOptions, DecodeResult, Decoder, Schedule, Variant,
};
pub use error::{Error, Result};
pub use graph::{g_minsum, g_scaled, init_messages, Kernel, Llr, MessageState, PeIndex, SAT};
pub use sim::{
    run_campaign, transmit, CampaignConfig, ChannelParams, NamedVariant, StatsReport, StatsRow,
    StopRule,
};
