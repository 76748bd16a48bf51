//! Content-adaptive temporal wavelet video coding with lossless spatial
//! coding and a temporally scalable container.

pub mod adaptive;
pub mod codec;
pub mod container;
pub mod entropy;
mod error;
pub mod frame;
pub mod lifting;
pub mod metrics;
pub mod motion;
pub mod spatial;

pub use adaptive::{
    build_adaptive_decomposition, AdaptiveConfig, DepthVector, FrameRole, HpDistortion, Lambda,
    PruneDecision, Strategy,
};
pub use codec::{decode_sequence, encode_sequence, DecodedSequence, EncodeConfig, EncodedSequence};
pub use container::{
    extract_temporal_layers, read_container, write_container, LayeredBitstream, StreamHeader,
};
pub use error::{Error, Result};
pub use frame::{
    load_raw_sequence, save_raw_sequence, CoefficientFrame, Frame, Sequence, SubbandKind,
};
pub use lifting::McMode;
pub use metrics::{psnr_lp_t, rate_report, RateReport};
pub use motion::{McParams, MotionField, MotionVector};
