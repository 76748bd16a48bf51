//! Binary adaptive range coder.
//!
//! Carry-propagating encoder in the style of LZMA's `rc`: a 33-bit `low`,
//! 32-bit `range`, and a cached byte plus a run of pending `0xFF` bytes that
//! a late carry may still increment. Probabilities are 16-bit fixed point and
//! adapt by a shift after every coded bit, so the whole coder is integer-only
//! and bit-identical on every platform.
//!
//! Two things differ from LZMA: the always-zero leading byte is not written,
//! and the flush picks the value in the final interval with the most trailing
//! zero bits, then drops trailing zero bytes. The decoder treats reads past
//! the end of the payload as zeros, which makes the shortened stream decode
//! identically.

use crate::error::{Error, Result};

pub const PROB_BITS: u32 = 16;
const PROB_ONE: u32 = 1 << PROB_BITS;
const ADAPT_SHIFT: u32 = 4;
const TOP: u32 = 1 << 24;

/// Adaptive probability that the next bit is `0`, scaled by `2^16`.
///
/// The state always stays inside `(0, 2^16)`: the shift update moves it by a
/// strictly smaller amount than its distance to either end.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinaryContext {
    p0: u16,
}

impl Default for BinaryContext {
    fn default() -> Self {
        Self {
            p0: (PROB_ONE / 2) as u16,
        }
    }
}

impl BinaryContext {
    pub fn probability_of_zero(&self) -> u32 {
        u32::from(self.p0)
    }

    #[inline]
    fn update(&mut self, bit: bool) {
        let p = u32::from(self.p0);
        let p = if bit {
            p - (p >> ADAPT_SHIFT)
        } else {
            p + ((PROB_ONE - p) >> ADAPT_SHIFT)
        };
        self.p0 = p as u16;
    }
}

/// Arithmetic-coded payload together with its exact length in bits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CodedStream {
    bytes: Vec<u8>,
    bit_len: u32,
}

impl CodedStream {
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bit_len(&self) -> u32 {
        self.bit_len
    }

    /// Size of the framed form: 4-byte bit-length prefix plus payload.
    pub fn framed_len(&self) -> usize {
        4 + self.bytes.len()
    }

    /// Appends the framed form (`u32` LE bit length, then payload bytes).
    pub fn write_framed(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.bit_len.to_le_bytes());
        out.extend_from_slice(&self.bytes);
    }

    pub fn to_framed(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.framed_len());
        self.write_framed(&mut out);
        out
    }

    /// Parses one framed stream from the front of `buf`, returning it and the
    /// number of bytes consumed.
    pub fn read_framed(buf: &[u8]) -> Result<(Self, usize)> {
        let prefix: [u8; 4] = buf
            .get(..4)
            .and_then(|b| b.try_into().ok())
            .ok_or_else(|| Error::Truncated {
                offset: buf.len(),
                msg: "missing 4-byte bit-length prefix".into(),
            })?;
        let bit_len = u32::from_le_bytes(prefix);
        let byte_len = bit_len.div_ceil(8) as usize;
        let payload = buf.get(4..4 + byte_len).ok_or_else(|| Error::Truncated {
            offset: buf.len(),
            msg: format!(
                "payload declares {bit_len} bits ({byte_len} bytes) but only {} remain",
                buf.len() - 4
            ),
        })?;
        if byte_len > 0 && payload[byte_len - 1] == 0 {
            return Err(Error::MalformedStream(
                "payload ends in a zero byte; the encoder never emits one".into(),
            ));
        }
        Ok((
            Self {
                bytes: payload.to_vec(),
                bit_len,
            },
            4 + byte_len,
        ))
    }
}

#[derive(Debug)]
pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    cache_size: u64,
    leading: bool,
    out: Vec<u8>,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        Self {
            low: 0,
            range: u32::MAX,
            cache: 0,
            cache_size: 1,
            leading: true,
            out: Vec::new(),
        }
    }

    #[inline]
    pub fn encode(&mut self, bit: bool, ctx: &mut BinaryContext) {
        let bound = (self.range >> PROB_BITS) * ctx.probability_of_zero();
        if bit {
            self.low += u64::from(bound);
            self.range -= bound;
        } else {
            self.range = bound;
        }
        ctx.update(bit);
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    fn shift_low(&mut self) {
        if (self.low as u32) < 0xFF00_0000 || (self.low >> 32) != 0 {
            let carry = (self.low >> 32) as u8;
            let mut pending = self.cache;
            loop {
                self.emit(pending.wrapping_add(carry));
                pending = 0xFF;
                self.cache_size -= 1;
                if self.cache_size == 0 {
                    break;
                }
            }
            self.cache = ((self.low >> 24) & 0xFF) as u8;
        }
        self.cache_size += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    #[inline]
    fn emit(&mut self, byte: u8) {
        if self.leading {
            // The first cached byte sits above the initial interval and can
            // never receive a carry.
            debug_assert_eq!(byte, 0);
            self.leading = false;
        } else {
            self.out.push(byte);
        }
    }

    pub fn finish(mut self) -> CodedStream {
        let end = self.low + u64::from(self.range);
        for k in (0..=32u32).rev() {
            let mask = (1u64 << k) - 1;
            let candidate = (self.low + mask) & !mask;
            if candidate < end {
                self.low = candidate;
                break;
            }
        }
        for _ in 0..5 {
            self.shift_low();
        }
        let mut bytes = self.out;
        while bytes.last() == Some(&0) {
            bytes.pop();
        }
        let bit_len = match bytes.last() {
            Some(&last) => bytes.len() as u32 * 8 - last.trailing_zeros(),
            None => 0,
        };
        CodedStream { bytes, bit_len }
    }
}

#[derive(Debug)]
pub struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    range: u32,
    code: u32,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(stream: &'a CodedStream) -> Self {
        let mut dec = Self {
            data: &stream.bytes,
            pos: 0,
            range: u32::MAX,
            code: 0,
        };
        for _ in 0..4 {
            dec.code = (dec.code << 8) | u32::from(dec.next_byte());
        }
        dec
    }

    #[inline]
    fn next_byte(&mut self) -> u8 {
        let b = self.data.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b
    }

    #[inline]
    pub fn decode(&mut self, ctx: &mut BinaryContext) -> bool {
        let bound = (self.range >> PROB_BITS) * ctx.probability_of_zero();
        let bit = if self.code < bound {
            self.range = bound;
            false
        } else {
            self.code -= bound;
            self.range -= bound;
            true
        };
        ctx.update(bit);
        while self.range < TOP {
            self.range <<= 8;
            self.code = (self.code << 8) | u32::from(self.next_byte());
        }
        bit
    }
}

/// Codes `(bit, context id)` pairs with `context_count` fresh contexts.
pub fn ac_encode(bits: &[(bool, usize)], context_count: usize) -> CodedStream {
    let mut contexts = vec![BinaryContext::default(); context_count];
    let mut enc = RangeEncoder::new();
    for &(bit, ctx) in bits {
        enc.encode(bit, &mut contexts[ctx]);
    }
    enc.finish()
}

/// Decodes one bit per entry of `schedule`, which lists the context id used
/// for each bit in coding order.
pub fn ac_decode(
    stream: &CodedStream,
    schedule: &[usize],
    context_count: usize,
) -> Result<Vec<bool>> {
    if let Some(&bad) = schedule.iter().find(|&&c| c >= context_count) {
        return Err(crate::error::arg(
            "entropy",
            format!("context id {bad} outside {context_count} contexts"),
        ));
    }
    let mut contexts = vec![BinaryContext::default(); context_count];
    let mut dec = RangeDecoder::new(stream);
    Ok(schedule
        .iter()
        .map(|&ctx| dec.decode(&mut contexts[ctx]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn context_state_stays_open_interval() {
        let mut ctx = BinaryContext::default();
        for _ in 0..10_000 {
            ctx.update(false);
        }
        assert!(ctx.probability_of_zero() < PROB_ONE && ctx.probability_of_zero() > 0);
        for _ in 0..10_000 {
            ctx.update(true);
        }
        assert!(ctx.probability_of_zero() > 0);
    }

    #[test]
    fn long_zero_run_compresses() {
        let bits = vec![(false, 0); 10_000];
        let stream = ac_encode(&bits, 1);
        assert!(stream.framed_len() < 100, "{} bytes", stream.framed_len());
        let schedule = vec![0; bits.len()];
        let out = ac_decode(&stream, &schedule, 1).unwrap();
        assert!(out.iter().all(|&b| !b));
    }

    #[test]
    fn long_one_run_compresses() {
        let bits = vec![(true, 0); 10_000];
        let stream = ac_encode(&bits, 1);
        assert!(stream.framed_len() < 100, "{} bytes", stream.framed_len());
        let out = ac_decode(&stream, &vec![0; bits.len()], 1).unwrap();
        assert!(out.iter().all(|&b| b));
    }

    #[test]
    fn alternating_bits_cost_about_one_bit_each() {
        let bits: Vec<_> = (0..8_000).map(|i| (i % 2 == 1, 0)).collect();
        let stream = ac_encode(&bits, 1);
        let bits_out = f64::from(stream.bit_len());
        assert!(
            (7_000.0..8_800.0).contains(&bits_out),
            "{bits_out} bits for 8000 alternating bits"
        );
        let decoded = ac_decode(&stream, &vec![0; bits.len()], 1).unwrap();
        assert_eq!(decoded, bits.iter().map(|b| b.0).collect::<Vec<_>>());
    }

    #[test]
    fn empty_input_is_empty_stream() {
        let stream = ac_encode(&[], 1);
        assert_eq!(stream.bit_len(), 0);
        assert_eq!(stream.to_framed(), vec![0, 0, 0, 0]);
        assert!(ac_decode(&stream, &[], 1).unwrap().is_empty());
    }

    #[test]
    fn truncated_framing_reports_offset() {
        let bits: Vec<_> = (0..500).map(|i| ((i * 7) % 3 == 0, i % 4)).collect();
        let framed = ac_encode(&bits, 4).to_framed();
        let cut = &framed[..framed.len() - 1];
        match CodedStream::read_framed(cut) {
            Err(Error::Truncated { offset, .. }) => assert_eq!(offset, cut.len()),
            other => panic!("expected truncation, got {other:?}"),
        }
        assert!(matches!(
            CodedStream::read_framed(&framed[..3]),
            Err(Error::Truncated { offset: 3, .. })
        ));
    }

    #[test]
    fn carry_propagation_through_ff_runs() {
        // Highly skewed bits push `low` near the top of its window, which
        // exercises the pending-0xFF path.
        let mut bits = Vec::new();
        for i in 0..20_000 {
            bits.push((i % 97 != 0, 0));
            bits.push((i % 5 == 0, 1));
        }
        let stream = ac_encode(&bits, 2);
        let schedule: Vec<_> = bits.iter().map(|b| b.1).collect();
        let out = ac_decode(&stream, &schedule, 2).unwrap();
        assert_eq!(out, bits.iter().map(|b| b.0).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn round_trip_random_streams(
            bits in proptest::collection::vec((any::<bool>(), 0usize..6), 0..3000)
        ) {
            let stream = ac_encode(&bits, 6);
            let (parsed, used) = CodedStream::read_framed(&stream.to_framed()).unwrap();
            prop_assert_eq!(used, stream.framed_len());
            let schedule: Vec<_> = bits.iter().map(|b| b.1).collect();
            let out = ac_decode(&parsed, &schedule, 6).unwrap();
            prop_assert_eq!(out, bits.iter().map(|b| b.0).collect::<Vec<_>>());
        }

        #[test]
        fn round_trip_skewed_streams(
            seed in any::<u64>(), len in 0usize..5000, skew in 1u64..64
        ) {
            let mut s = seed;
            let bits: Vec<_> = (0..len)
                .map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                    ((s >> 33) % 64 < skew, ((s >> 20) % 3) as usize)
                })
                .collect();
            let stream = ac_encode(&bits, 3);
            let schedule: Vec<_> = bits.iter().map(|b| b.1).collect();
            prop_assert_eq!(
                ac_decode(&stream, &schedule, 3).unwrap(),
                bits.iter().map(|b| b.0).collect::<Vec<_>>()
            );
        }
    }
}
