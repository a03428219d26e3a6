//! Temporal self-attention: frames are tokens, one sequence per spatial
//! position.

mod diag;
mod kernels;
mod layer;
mod sequence;
mod weights;

pub use diag::{attention_diagonality, DiagonalityStats};
pub use kernels::{
    global_and_local, global_attention, local_attention, local_attention_with, sliding_window_attention,
    sliding_windows, AttentionMap, AttentionOutput, LocalMaskMode, SlidingOutput,
};
pub(crate) use kernels::{accumulate_window, average_windows, global_output, local_output};
pub use layer::{blend_active, spectralblend_ta, DEFAULT_ALPHA, DEFAULT_TAU};
pub use sequence::SequenceFeature;
pub use weights::{project_qkv, AttentionWeights};
