//! Signed integer binarization: zero flag, sign, then an Exp-Golomb style
//! magnitude (unary bit count followed by the remaining bits MSB first).
//! Every bin is arithmetic coded with its own adaptive context.

use super::range_coder::{BinaryContext, CodedStream, RangeDecoder, RangeEncoder};
use crate::error::{Error, Result};

const MAX_PREFIX: usize = 32;
const PREFIX_CONTEXTS: usize = 18;
const SUFFIX_CONTEXTS: usize = 18;

/// Context set for one group of signed values.
#[derive(Clone, Debug)]
pub struct SignedModel {
    zero: BinaryContext,
    sign: BinaryContext,
    prefix: [BinaryContext; PREFIX_CONTEXTS],
    suffix: [BinaryContext; SUFFIX_CONTEXTS],
}

impl Default for SignedModel {
    fn default() -> Self {
        Self {
            zero: BinaryContext::default(),
            sign: BinaryContext::default(),
            prefix: [BinaryContext::default(); PREFIX_CONTEXTS],
            suffix: [BinaryContext::default(); SUFFIX_CONTEXTS],
        }
    }
}

impl SignedModel {
    pub fn encode(&mut self, enc: &mut RangeEncoder, value: i32) {
        enc.encode(value != 0, &mut self.zero);
        if value == 0 {
            return;
        }
        enc.encode(value < 0, &mut self.sign);
        // |value| >= 1, so x lies in [2^k, 2^(k+1)) with k the bit count below the MSB.
        let x = u64::from(value.unsigned_abs());
        let k = 63 - x.leading_zeros() as usize;
        for i in 0..k {
            enc.encode(true, &mut self.prefix[i.min(PREFIX_CONTEXTS - 1)]);
        }
        enc.encode(false, &mut self.prefix[k.min(PREFIX_CONTEXTS - 1)]);
        for b in (0..k).rev() {
            enc.encode(
                (x >> b) & 1 == 1,
                &mut self.suffix[b.min(SUFFIX_CONTEXTS - 1)],
            );
        }
    }

    pub fn decode(&mut self, dec: &mut RangeDecoder<'_>) -> Result<i32> {
        if !dec.decode(&mut self.zero) {
            return Ok(0);
        }
        let negative = dec.decode(&mut self.sign);
        let mut k = 0usize;
        while dec.decode(&mut self.prefix[k.min(PREFIX_CONTEXTS - 1)]) {
            k += 1;
            if k >= MAX_PREFIX {
                return Err(Error::MalformedStream(format!(
                    "magnitude prefix longer than {MAX_PREFIX} bins"
                )));
            }
        }
        let mut x: u64 = 1;
        for b in (0..k).rev() {
            let bit = dec.decode(&mut self.suffix[b.min(SUFFIX_CONTEXTS - 1)]);
            x = (x << 1) | u64::from(bit);
        }
        let magnitude = i64::try_from(x).expect("prefix bounded to 32 bins");
        let value = if negative { -magnitude } else { magnitude };
        i32::try_from(value)
            .map_err(|_| Error::MalformedStream(format!("decoded value {value} overflows i32")))
    }
}

/// A bank of [`SignedModel`]s indexed by group id, grown on demand.
#[derive(Clone, Debug, Default)]
pub struct SignedContexts {
    groups: Vec<SignedModel>,
}

impl SignedContexts {
    pub fn group(&mut self, id: usize) -> &mut SignedModel {
        if id >= self.groups.len() {
            self.groups.resize_with(id + 1, SignedModel::default);
        }
        &mut self.groups[id]
    }
}

/// Codes `values` into one stream; `group(i)` picks the context group of the
/// i-th value and must be reproducible by the decoder.
pub fn encode_signed_values(values: &[i32], group: impl Fn(usize) -> usize) -> CodedStream {
    let mut contexts = SignedContexts::default();
    let mut enc = RangeEncoder::new();
    for (i, &v) in values.iter().enumerate() {
        contexts.group(group(i)).encode(&mut enc, v);
    }
    enc.finish()
}

pub fn decode_signed_values(
    stream: &CodedStream,
    count: usize,
    group: impl Fn(usize) -> usize,
) -> Result<Vec<i32>> {
    let mut contexts = SignedContexts::default();
    let mut dec = RangeDecoder::new(stream);
    (0..count)
        .map(|i| contexts.group(group(i)).decode(&mut dec))
        .collect()
}
