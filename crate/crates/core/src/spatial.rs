//! Lossless intra coding of subband frames: a reversible 5/3 integer wavelet
//! over four dyadic levels, followed by context-adaptive arithmetic coding of
//! every spatial subband.
//!
//! Frame payload layout: the deepest LL band, then for each level from the
//! deepest to the finest the HL, LH and HH bands. Each band is one framed
//! entropy stream (`u32` LE bit length, then payload). A band whose
//! coefficients are all zero codes to an empty payload.

use crate::entropy::{CodedStream, RangeDecoder, RangeEncoder, SignedContexts};
use crate::error::{arg, Error, Result};
use crate::frame::{CoefficientFrame, SubbandKind};

/// Number of spatial decomposition levels used for every frame.
pub const SPATIAL_LEVELS: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<i32>,
}

impl Plane {
    fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    fn at(&self, x: usize, y: usize) -> i32 {
        self.data[y * self.width + x]
    }
}

/// Detail bands of one level. `hl` is highpass horizontally and lowpass
/// vertically, `lh` the opposite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetailBands {
    pub hl: Plane,
    pub lh: Plane,
    pub hh: Plane,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpatialDecomposition {
    pub width: usize,
    pub height: usize,
    /// Lowpass residue after the deepest level.
    pub ll: Plane,
    /// Detail bands, finest level first.
    pub levels: Vec<DetailBands>,
}

impl SpatialDecomposition {
    pub fn coefficient_count(&self) -> usize {
        self.ll.len()
            + self
                .levels
                .iter()
                .map(|d| d.hl.len() + d.lh.len() + d.hh.len())
                .sum::<usize>()
    }
}

/// Levels actually applied to a `width x height` frame: a level is skipped
/// once both dimensions have shrunk to one sample.
pub fn effective_levels(width: usize, height: usize, requested: usize) -> usize {
    let (mut w, mut h) = (width, height);
    let mut levels = 0;
    while levels < requested && (w >= 2 || h >= 2) {
        w = w.div_ceil(2);
        h = h.div_ceil(2);
        levels += 1;
    }
    levels
}

fn split_len(n: usize) -> (usize, usize) {
    if n >= 2 {
        (n.div_ceil(2), n / 2)
    } else {
        (n, 0)
    }
}

/// Reversible 5/3 analysis of one line with whole-sample symmetric
/// extension. Writes `ceil(n/2)` lowpass then `floor(n/2)` highpass values.
fn forward_1d(x: &[i32], out: &mut [i32]) {
    let n = x.len();
    if n < 2 {
        out.copy_from_slice(x);
        return;
    }
    let (nl, nh) = (n.div_ceil(2), n / 2);
    let (low, high) = out.split_at_mut(nl);
    for i in 0..nh {
        let right = if 2 * i + 2 < n {
            x[2 * i + 2]
        } else {
            x[2 * i]
        };
        high[i] = x[2 * i + 1] - ((x[2 * i] + right) >> 1);
    }
    for i in 0..nl {
        let dl = high[i.saturating_sub(1)];
        let dr = high[i.min(nh - 1)];
        low[i] = x[2 * i] + ((dl + dr + 2) >> 2);
    }
}

fn inverse_1d(coeffs: &[i32], x: &mut [i32]) {
    let n = coeffs.len();
    if n < 2 {
        x.copy_from_slice(coeffs);
        return;
    }
    let (nl, nh) = (n.div_ceil(2), n / 2);
    let (low, high) = coeffs.split_at(nl);
    for i in 0..nl {
        let dl = high[i.saturating_sub(1)];
        let dr = high[i.min(nh - 1)];
        x[2 * i] = low[i] - ((dl + dr + 2) >> 2);
    }
    for i in 0..nh {
        let right = if 2 * i + 2 < n {
            x[2 * i + 2]
        } else {
            x[2 * i]
        };
        x[2 * i + 1] = high[i] + ((x[2 * i] + right) >> 1);
    }
}

fn transform_rows(p: &mut Plane, inverse: bool) {
    let mut line = vec![0; p.width];
    for row in p.data.chunks_exact_mut(p.width) {
        if inverse {
            inverse_1d(row, &mut line);
        } else {
            forward_1d(row, &mut line);
        }
        row.copy_from_slice(&line);
    }
}

fn transform_cols(p: &mut Plane, inverse: bool) {
    let (w, h) = (p.width, p.height);
    let mut col = vec![0; h];
    let mut line = vec![0; h];
    for x in 0..w {
        for (y, c) in col.iter_mut().enumerate() {
            *c = p.data[y * w + x];
        }
        if inverse {
            inverse_1d(&col, &mut line);
        } else {
            forward_1d(&col, &mut line);
        }
        for (y, &v) in line.iter().enumerate() {
            p.data[y * w + x] = v;
        }
    }
}

fn crop(p: &Plane, x0: usize, y0: usize, w: usize, h: usize) -> Plane {
    let mut out = Plane::new(w, h);
    for y in 0..h {
        out.data[y * w..(y + 1) * w].copy_from_slice(&p.data[(y0 + y) * p.width + x0..][..w]);
    }
    out
}

fn paste(dst: &mut Plane, src: &Plane, x0: usize, y0: usize) {
    for y in 0..src.height {
        dst.data[(y0 + y) * dst.width + x0..][..src.width]
            .copy_from_slice(&src.data[y * src.width..(y + 1) * src.width]);
    }
}

/// Forward reversible 5/3 transform over `levels` dyadic levels (reduced for
/// frames too small to support them).
pub fn dwt53_forward(frame: &CoefficientFrame, levels: usize) -> Result<SpatialDecomposition> {
    if frame.width == 0 || frame.height == 0 {
        return Err(arg("spatial-codec", "cannot transform a zero-sized frame"));
    }
    let applied = effective_levels(frame.width, frame.height, levels);
    if applied < levels || frame.width < 1 << levels || frame.height < 1 << levels {
        log::debug!(
            "{}x{} frame is smaller than 2^{levels}; using {applied} spatial levels",
            frame.width,
            frame.height
        );
    }
    let mut ll = Plane {
        width: frame.width,
        height: frame.height,
        data: frame.samples.clone(),
    };
    let mut details = Vec::with_capacity(applied);
    for _ in 0..applied {
        let (lw, hw) = split_len(ll.width);
        let (lh, hh) = split_len(ll.height);
        if ll.width >= 2 {
            transform_rows(&mut ll, false);
        }
        if ll.height >= 2 {
            transform_cols(&mut ll, false);
        }
        details.push(DetailBands {
            hl: crop(&ll, lw, 0, hw, lh),
            lh: crop(&ll, 0, lh, lw, hh),
            hh: crop(&ll, lw, lh, hw, hh),
        });
        ll = crop(&ll, 0, 0, lw, lh);
    }
    Ok(SpatialDecomposition {
        width: frame.width,
        height: frame.height,
        ll,
        levels: details,
    })
}

pub fn dwt53_inverse(dec: &SpatialDecomposition, kind: SubbandKind) -> Result<CoefficientFrame> {
    let mut ll = dec.ll.clone();
    for bands in dec.levels.iter().rev() {
        let w = ll.width + bands.hl.width;
        let h = ll.height + bands.lh.height;
        let mut p = Plane::new(w, h);
        paste(&mut p, &ll, 0, 0);
        paste(&mut p, &bands.hl, ll.width, 0);
        paste(&mut p, &bands.lh, 0, ll.height);
        paste(&mut p, &bands.hh, ll.width, ll.height);
        if h >= 2 {
            transform_cols(&mut p, true);
        }
        if w >= 2 {
            transform_rows(&mut p, true);
        }
        ll = p;
    }
    if (ll.width, ll.height) != (dec.width, dec.height) {
        return Err(Error::MalformedStream(format!(
            "subbands reassemble to {}x{}, expected {}x{}",
            ll.width, ll.height, dec.width, dec.height
        )));
    }
    CoefficientFrame::new(ll.width, ll.height, ll.data, kind)
}

/// Empty decomposition with the band geometry of a `width x height` frame.
fn layout(width: usize, height: usize, levels: usize) -> SpatialDecomposition {
    let applied = effective_levels(width, height, levels);
    let (mut w, mut h) = (width, height);
    let mut details = Vec::with_capacity(applied);
    for _ in 0..applied {
        let (lw, hw) = split_len(w);
        let (lh, hh) = split_len(h);
        details.push(DetailBands {
            hl: Plane::new(hw, lh),
            lh: Plane::new(lw, hh),
            hh: Plane::new(hw, hh),
        });
        w = lw;
        h = lh;
    }
    SpatialDecomposition {
        width,
        height,
        ll: Plane::new(w, h),
        levels: details,
    }
}

/// Context group from the magnitudes of the already coded left and upper
/// neighbors.
fn neighbor_group(band: &Plane, x: usize, y: usize) -> usize {
    let left = if x > 0 {
        band.at(x - 1, y).unsigned_abs()
    } else {
        0
    };
    let up = if y > 0 {
        band.at(x, y - 1).unsigned_abs()
    } else {
        0
    };
    match left + up {
        0 => 0,
        1..=2 => 1,
        3..=6 => 2,
        7..=14 => 3,
        15..=40 => 4,
        _ => 5,
    }
}

/// The LL band is coded as a residual against its left neighbor (upper
/// neighbor in the first column).
fn ll_prediction(band: &Plane, x: usize, y: usize) -> i32 {
    if x > 0 {
        band.at(x - 1, y)
    } else if y > 0 {
        band.at(x, y - 1)
    } else {
        0
    }
}

fn encode_band(band: &Plane, is_ll: bool, out: &mut Vec<u8>) {
    let mut contexts = SignedContexts::default();
    let mut enc = RangeEncoder::new();
    for y in 0..band.height {
        for x in 0..band.width {
            let v = band.at(x, y);
            if is_ll {
                contexts
                    .group(0)
                    .encode(&mut enc, v - ll_prediction(band, x, y));
            } else {
                contexts
                    .group(neighbor_group(band, x, y))
                    .encode(&mut enc, v);
            }
        }
    }
    enc.finish().write_framed(out);
}

fn decode_band(band: &mut Plane, is_ll: bool, buf: &[u8]) -> Result<usize> {
    let (stream, used) = CodedStream::read_framed(buf)?;
    let mut contexts = SignedContexts::default();
    let mut dec = RangeDecoder::new(&stream);
    for y in 0..band.height {
        for x in 0..band.width {
            let v = if is_ll {
                let r = contexts.group(0).decode(&mut dec)?;
                r.checked_add(ll_prediction(band, x, y))
                    .ok_or_else(|| Error::MalformedStream("LL residual overflows".into()))?
            } else {
                let g = neighbor_group(band, x, y);
                contexts.group(g).decode(&mut dec)?
            };
            band.data[y * band.width + x] = v;
        }
    }
    Ok(used)
}

/// Bands in payload order: LL, then (HL, LH, HH) from deepest to finest.
fn bands_mut(dec: &mut SpatialDecomposition) -> Vec<(&mut Plane, bool)> {
    let mut out: Vec<(&mut Plane, bool)> = vec![(&mut dec.ll, true)];
    for d in dec.levels.iter_mut().rev() {
        out.push((&mut d.hl, false));
        out.push((&mut d.lh, false));
        out.push((&mut d.hh, false));
    }
    out
}

/// Losslessly codes one subband frame. The payload length in bytes is the
/// frame's rate.
pub fn encode_frame_lossless(frame: &CoefficientFrame) -> Result<Vec<u8>> {
    let mut dec = dwt53_forward(frame, SPATIAL_LEVELS)?;
    let mut out = Vec::new();
    for (band, is_ll) in bands_mut(&mut dec) {
        encode_band(band, is_ll, &mut out);
    }
    Ok(out)
}

pub fn decode_frame_lossless(
    bytes: &[u8],
    width: usize,
    height: usize,
    kind: SubbandKind,
) -> Result<CoefficientFrame> {
    if width == 0 || height == 0 {
        return Err(arg("spatial-codec", "cannot decode a zero-sized frame"));
    }
    let mut dec = layout(width, height, SPATIAL_LEVELS);
    let mut pos = 0;
    for (band, is_ll) in bands_mut(&mut dec) {
        pos += decode_band(band, is_ll, &bytes[pos..]).map_err(|e| match e {
            Error::Truncated { offset, msg } => Error::Truncated {
                offset: offset + pos,
                msg,
            },
            other => other,
        })?;
    }
    if pos != bytes.len() {
        return Err(Error::MalformedStream(format!(
            "{} trailing bytes after frame payload",
            bytes.len() - pos
        )));
    }
    dwt53_inverse(&dec, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frame(w: usize, h: usize, mut f: impl FnMut(usize, usize) -> i32) -> CoefficientFrame {
        let s = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        CoefficientFrame::new(w, h, s, SubbandKind::Lowpass).unwrap()
    }

    #[test]
    fn one_dimensional_hand_values() {
        // x = [1, 3, 5, 7]: d0 = 3 - (1+5)/2 = 0, d1 = 7 - 5 = 2 (mirrored),
        // s0 = 1 + (0+0+2)/4 = 1, s1 = 5 + (0+2+2)/4 = 6.
        let mut out = [0; 4];
        forward_1d(&[1, 3, 5, 7], &mut out);
        assert_eq!(out, [1, 6, 0, 2]);
        let mut back = [0; 4];
        inverse_1d(&out, &mut back);
        assert_eq!(back, [1, 3, 5, 7]);
    }

    #[test]
    fn constant_frame_has_zero_details() {
        let f = frame(37, 23, |_, _| 91);
        let dec = dwt53_forward(&f, 4).unwrap();
        assert!(dec.ll.data.iter().all(|&v| v == 91));
        for d in &dec.levels {
            assert!(d
                .hl
                .data
                .iter()
                .chain(&d.lh.data)
                .chain(&d.hh.data)
                .all(|&v| v == 0));
        }
        assert_eq!(dec.levels.len(), 4);
    }

    #[test]
    fn band_geometry_conserves_coefficients() {
        for (w, h) in [
            (1, 1),
            (1, 17),
            (17, 1),
            (5, 3),
            (16, 16),
            (33, 9),
            (64, 48),
        ] {
            let dec = dwt53_forward(&frame(w, h, |x, y| (x * 3 + y) as i32), 4).unwrap();
            assert_eq!(dec.coefficient_count(), w * h, "{w}x{h}");
            assert_eq!(dec.levels.len(), effective_levels(w, h, 4));
        }
        assert_eq!(effective_levels(1, 1, 4), 0);
        assert_eq!(effective_levels(1, 16, 4), 4);
        assert_eq!(effective_levels(8, 8, 4), 3);
    }

    #[test]
    fn zero_sized_frame_rejected() {
        let f = CoefficientFrame::zeros(0, 4, SubbandKind::Lowpass);
        assert!(dwt53_forward(&f, 4).is_err());
        assert!(encode_frame_lossless(&f).is_err());
    }

    #[test]
    fn zero_hp_frame_is_nearly_free() {
        let f = CoefficientFrame::zeros(256, 256, SubbandKind::Highpass);
        let bytes = encode_frame_lossless(&f).unwrap();
        let bpp = bytes.len() as f64 * 8.0 / (256.0 * 256.0);
        assert!(bpp < 0.01, "{bpp} bits/pixel");
        assert_eq!(
            decode_frame_lossless(&bytes, 256, 256, SubbandKind::Highpass).unwrap(),
            f
        );
    }

    #[test]
    fn gradient_beats_eight_bits_and_noise_costs_more() {
        let gradient = frame(128, 128, |x, y| ((x + 2 * y) / 3) as i32);
        let g_bytes = encode_frame_lossless(&gradient).unwrap();
        assert!(g_bytes.len() * 8 < 8 * 128 * 128);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let noise = frame(128, 128, |_, _| rng.gen_range(0..256));
        let n_bytes = encode_frame_lossless(&noise).unwrap();
        assert!(n_bytes.len() > g_bytes.len());
        let zero = CoefficientFrame::zeros(128, 128, SubbandKind::Highpass);
        assert!(encode_frame_lossless(&zero).unwrap().len() < n_bytes.len());
    }

    #[test]
    fn corrupt_payloads_are_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let f = frame(20, 20, |_, _| rng.gen_range(-50..50));
        let bytes = encode_frame_lossless(&f).unwrap();
        assert!(
            decode_frame_lossless(&bytes[..bytes.len() - 1], 20, 20, SubbandKind::Highpass)
                .is_err()
        );
        let mut extra = bytes.clone();
        extra.push(1);
        assert!(decode_frame_lossless(&extra, 20, 20, SubbandKind::Highpass).is_err());
    }

    proptest! {
        #[test]
        fn dwt_round_trip(w in 1usize..40, h in 1usize..40, levels in 0usize..6, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = frame(w, h, |_, _| rng.gen_range(-600..600));
            let dec = dwt53_forward(&f, levels).unwrap();
            prop_assert_eq!(dwt53_inverse(&dec, SubbandKind::Lowpass).unwrap(), f);
        }

        #[test]
        fn frame_codec_round_trip(w in 1usize..48, h in 1usize..48, hp in any::<bool>(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (kind, lo, hi) = if hp { (SubbandKind::Highpass, -255, 256) } else { (SubbandKind::Lowpass, 0, 256) };
            let s = (0..w * h).map(|_| rng.gen_range(lo..hi)).collect();
            let f = CoefficientFrame::new(w, h, s, kind).unwrap();
            let bytes = encode_frame_lossless(&f).unwrap();
            prop_assert_eq!(decode_frame_lossless(&bytes, w, h, kind).unwrap(), f);
        }
    }
}
