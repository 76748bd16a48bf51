//! Coded form of the depth vector.
//!
//! Each entry is binarized as truncated unary with cutoff `i_max`. The bin
//! contexts are selected by the value of the most recent nonzero entry, so a
//! run of zeros after a deep LP frame is modeled separately from a run of
//! zeros after a shallow one.

use super::range_coder::{BinaryContext, CodedStream, RangeDecoder, RangeEncoder};
use crate::adaptive::DepthVector;
use crate::error::{Error, Result};

struct DepthContexts {
    i_max: usize,
    bins: Vec<BinaryContext>,
}

impl DepthContexts {
    fn new(i_max: usize) -> Self {
        Self {
            i_max,
            bins: vec![BinaryContext::default(); (i_max + 1) * i_max.max(1)],
        }
    }

    fn ctx(&mut self, prev_nonzero: usize, bin: usize) -> &mut BinaryContext {
        &mut self.bins[prev_nonzero * self.i_max.max(1) + bin]
    }
}

pub fn encode_depth_vector(v: &DepthVector) -> CodedStream {
    let i_max = usize::from(v.i_max());
    let mut contexts = DepthContexts::new(i_max);
    let mut enc = RangeEncoder::new();
    let mut prev = 0usize;
    for &entry in v.values() {
        let value = usize::from(entry);
        for bin in 0..i_max {
            let bit = bin < value;
            enc.encode(bit, contexts.ctx(prev, bin));
            if !bit {
                break;
            }
        }
        if value > 0 {
            prev = value;
        }
    }
    enc.finish()
}

/// Decodes `len` entries and validates the result as a depth vector.
pub fn decode_depth_vector(stream: &CodedStream, len: usize, i_max: u8) -> Result<DepthVector> {
    let levels = usize::from(i_max);
    let mut contexts = DepthContexts::new(levels);
    let mut dec = RangeDecoder::new(stream);
    let mut prev = 0usize;
    let mut values = Vec::with_capacity(len);
    for _ in 0..len {
        let mut value = 0usize;
        while value < levels && dec.decode(contexts.ctx(prev, value)) {
            value += 1;
        }
        if value > 0 {
            prev = value;
        }
        values.push(value as u8);
    }
    DepthVector::from_values(values, i_max)
        .map_err(|e| Error::MalformedStream(format!("decoded depth vector is invalid: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2_vector() -> DepthVector {
        DepthVector::from_values(vec![3, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 2, 0, 0, 0], 3).unwrap()
    }

    #[test]
    fn schematic_vector_round_trips() {
        let v = fig2_vector();
        let stream = encode_depth_vector(&v);
        assert_eq!(decode_depth_vector(&stream, 16, 3).unwrap(), v);
    }

    #[test]
    fn schematic_vector_beats_fixed_length() {
        // ceil(log2(i_max + 1)) = 2 bits per entry.
        let stream = encode_depth_vector(&fig2_vector());
        assert!(stream.bit_len() < 32, "{} bits", stream.bit_len());
    }

    #[test]
    fn long_zero_vector_is_small() {
        let v = DepthVector::zeros(500, 3);
        let stream = encode_depth_vector(&v);
        assert!(stream.bit_len() < 100, "{} bits", stream.bit_len());
        assert_eq!(decode_depth_vector(&stream, 500, 3).unwrap(), v);
    }

    #[test]
    fn uniform_full_depth_round_trips() {
        for i_max in 1..=8u8 {
            let gop = 1usize << i_max;
            let mut values = vec![0u8; gop * 3];
            for g in 0..3 {
                values[g * gop] = i_max;
            }
            let v = DepthVector::from_values(values, i_max).unwrap();
            let stream = encode_depth_vector(&v);
            assert_eq!(decode_depth_vector(&stream, gop * 3, i_max).unwrap(), v);
        }
    }

    #[test]
    fn invalid_decoded_vector_is_malformed_stream() {
        // Encode a vector that is valid at i_max = 3 and decode it under a
        // length that cuts the deep LP's subtree.
        let stream = encode_depth_vector(&fig2_vector());
        assert!(matches!(
            decode_depth_vector(&stream, 6, 3),
            Err(Error::MalformedStream(_))
        ));
    }
}
