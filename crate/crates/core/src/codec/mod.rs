//! Operational Monte Carlo implementation of the two-phase scheme: layered
//! codebooks with binning, typicality encoding, the secret-key table, the
//! one-time pad over the w-bin index, channel transmission and two-phase
//! decoding.

mod books;
mod otp;
mod scheme;
mod typicality;

pub use books::{
    build_codebooks, Binning, BookDims, ChannelMode, CodebookSet, SimParams, DEFAULT_BOOK_CAP,
};
pub use otp::{combine_key, join_w_bin, otp_add, otp_sub, split_w_bin};
pub use scheme::{
    decode_phase1, decode_phase2, encode, encode_with_l22, run_experiment, run_trial,
    EncodeOutcome, ExperimentSummary, HeldState, Phase1Input, Phase1Payload, Phase2Input,
    Phase2Outcome, Phase2Payload, TrialRecord, TrialRow,
};
pub use typicality::{marginally_typical, BoundContext, TypicalityTest};
