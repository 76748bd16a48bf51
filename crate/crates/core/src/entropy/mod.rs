//! Adaptive binary arithmetic coding and the coded representations built on
//! it: signed value streams and the depth vector.

mod depth;
mod range_coder;
mod signed;

pub use depth::{decode_depth_vector, encode_depth_vector};
pub use range_coder::{
    ac_decode, ac_encode, BinaryContext, CodedStream, RangeDecoder, RangeEncoder, PROB_BITS,
};
pub use signed::{decode_signed_values, encode_signed_values, SignedContexts, SignedModel};
