//! Whole-sequence encoding and decoding.
//!
//! The sequence is cut into GOPs of `2^i_max` frames. Frames left over at the
//! end are coded as intra frames in the trailing section.

use rayon::prelude::*;

use crate::adaptive::{
    build_adaptive_decomposition, AdaptiveConfig, FrameRole, GopDecomposition, HpDistortion,
    Lambda, Strategy,
};
use crate::container::{
    read_container, write_container, GopPayloads, LayeredBitstream, StreamHeader, MAX_LEVELS,
};
use crate::error::{arg, Error, Result};
use crate::frame::{CoefficientFrame, Frame, Sequence, SubbandKind};
use crate::lifting::{lift_pair_inverse, McMode, WarpPair};
use crate::motion::{decode_motion_field, search_range_for_level, McParams, MotionField};
use crate::spatial::{decode_frame_lossless, encode_frame_lossless};

#[derive(Clone, Debug, PartialEq)]
pub struct EncodeConfig {
    /// Number of temporal levels; the GOP holds `2^i_max` frames.
    pub i_max: u8,
    pub lambda: Lambda,
    pub mc_mode: McMode,
    pub mc_params: McParams,
    pub hp_distortion: HpDistortion,
    pub strategy: Strategy,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        Self {
            i_max: 3,
            lambda: Lambda::DEFAULT,
            mc_mode: McMode::None,
            mc_params: McParams::default(),
            hp_distortion: HpDistortion::Energy,
            strategy: Strategy::RateDistortion,
        }
    }
}

impl EncodeConfig {
    /// Per-GOP configuration. Forced decision tables are indexed over the
    /// whole sequence and are sliced to the pairs of GOP `g` here.
    fn adaptive(&self, g: usize) -> AdaptiveConfig {
        let strategy = match &self.strategy {
            Strategy::Forced(table) => Strategy::Forced(
                table
                    .iter()
                    .enumerate()
                    .map(|(li, row)| {
                        let per_gop = 1usize << (usize::from(self.i_max) - li - 1);
                        row.iter()
                            .skip(g * per_gop)
                            .take(per_gop)
                            .copied()
                            .collect()
                    })
                    .collect(),
            ),
            other => other.clone(),
        };
        AdaptiveConfig {
            lambda: self.lambda,
            mc_mode: self.mc_mode,
            mc_params: self.mc_params,
            hp_distortion: self.hp_distortion,
            strategy,
        }
    }
}

/// Result of encoding: the serialized container plus the per-GOP analysis.
#[derive(Clone, Debug)]
pub struct EncodedSequence {
    pub bytes: Vec<u8>,
    pub stream: LayeredBitstream,
    pub gops: Vec<GopDecomposition>,
}

fn lambda_milli(lambda: Lambda) -> Result<u32> {
    let milli = (lambda.value() * 1000.0).round();
    if milli > f64::from(u32::MAX) {
        return Err(arg(
            "container",
            format!("lambda {} is too large to store", lambda.value()),
        ));
    }
    Ok(milli as u32)
}

fn payloads(gop: &GopDecomposition) -> GopPayloads {
    GopPayloads {
        depth: gop.depth.clone(),
        motion: gop
            .motion
            .iter()
            .map(|l| l.iter().map(|m| m.payload.clone()).collect())
            .collect(),
        base: gop.base.iter().map(|f| f.payload.clone()).collect(),
        enhancement: gop
            .enhancement
            .iter()
            .map(|l| l.iter().map(|f| f.payload.clone()).collect())
            .collect(),
    }
}

pub fn encode_sequence(seq: &Sequence, config: &EncodeConfig) -> Result<EncodedSequence> {
    if config.i_max == 0 || config.i_max > MAX_LEVELS {
        return Err(arg(
            "adaptive-control",
            format!("i_max must be in 1..={MAX_LEVELS}, got {}", config.i_max),
        ));
    }
    config.mc_params.validate()?;
    let gop_size = 1usize << config.i_max;
    let frames = seq.frames();
    let full = frames.len() / gop_size;
    let gops = frames[..full * gop_size]
        .par_chunks(gop_size)
        .enumerate()
        .map(|(g, chunk)| {
            let d = build_adaptive_decomposition(chunk, &config.adaptive(g))?;
            log::debug!("GOP {g}: depth vector {:?}", d.depth.values());
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    let trailing = frames[full * gop_size..]
        .par_iter()
        .map(|f| encode_frame_lossless(&f.to_coefficients()))
        .collect::<Result<Vec<_>>>()?;
    let header = StreamHeader {
        width: u32::try_from(seq.width()).map_err(|_| arg("container", "width exceeds u32"))?,
        height: u32::try_from(seq.height()).map_err(|_| arg("container", "height exceeds u32"))?,
        frame_count: u32::try_from(frames.len())
            .map_err(|_| arg("container", "too many frames"))?,
        i_max: config.i_max,
        lambda_milli: lambda_milli(config.lambda)?,
        mc_mode: config.mc_mode,
        mc_params: config.mc_params,
        trailing_frame_count: trailing.len() as u32,
        kept_levels: config.i_max,
    };
    let stream = LayeredBitstream {
        header,
        gops: gops.iter().map(payloads).collect(),
        trailing,
    };
    let bytes = write_container(&stream)?;
    Ok(EncodedSequence {
        bytes,
        stream,
        gops,
    })
}

/// A decoded frame standing for the originals `[position, position + support)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedFrame {
    pub position: usize,
    pub support: usize,
    pub frame: CoefficientFrame,
}

#[derive(Clone, Debug)]
pub struct DecodedSequence {
    pub header: StreamHeader,
    /// In display order; supports tile `[0, frame_count)`.
    pub frames: Vec<DecodedFrame>,
}

impl DecodedSequence {
    /// True when every original frame was reconstructed.
    pub fn is_complete(&self) -> bool {
        self.frames.iter().all(|f| f.support == 1)
    }

    /// Exact reconstruction. Fails on a layer-reduced stream.
    pub fn into_sequence(self) -> Result<Sequence> {
        if !self.is_complete() {
            return Err(arg(
                "container",
                "stream lacks enhancement layers; only a preview can be produced",
            ));
        }
        Sequence::new(
            self.frames
                .into_iter()
                .map(|f| f.frame.to_frame())
                .collect(),
        )
    }

    /// Displayable frames clamped to 8 bits. With `hold`, each frame is
    /// repeated across its support so the output has the original length.
    pub fn to_preview(&self, hold: bool) -> Result<Sequence> {
        let frames = self
            .frames
            .iter()
            .flat_map(|f| {
                let clamped = Frame::new(
                    f.frame.width,
                    f.frame.height,
                    f.frame.samples.iter().map(|&s| s.clamp(0, 255)).collect(),
                )
                .expect("dimensions preserved");
                std::iter::repeat_n(clamped, if hold { f.support } else { 1 })
            })
            .collect();
        Sequence::new(frames)
    }
}

struct Slot {
    level: u8,
    frame: CoefficientFrame,
}

fn decode_gop(header: &StreamHeader, gop: &GopPayloads) -> Result<Vec<(usize, Slot)>> {
    let (w, h) = (header.width as usize, header.height as usize);
    let roles = gop.depth.parse()?;
    let base_roles: Vec<(usize, u8)> = roles
        .iter()
        .enumerate()
        .filter_map(|(p, r)| match *r {
            FrameRole::Lowpass { level } => Some((p, level)),
            FrameRole::Intra => Some((p, 0)),
            FrameRole::Highpass { .. } => None,
        })
        .collect();
    let base = base_roles
        .par_iter()
        .zip(&gop.base)
        .map(|(&(p, level), bytes)| {
            let frame = decode_frame_lossless(bytes, w, h, SubbandKind::Lowpass)?;
            Ok((p, Slot { level, frame }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut slots: Vec<Option<Slot>> = (0..header.gop_size()).map(|_| None).collect();
    for (p, slot) in base {
        slots[p] = Some(slot);
    }

    for level in header.present_levels() {
        let li = usize::from(level) - 1;
        let pairs: Vec<usize> = slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.as_ref().is_some_and(|s| s.level == level))
            .map(|(p, _)| p)
            .collect();
        let hps = &gop.enhancement[li];
        if pairs.len() != hps.len() {
            return Err(Error::MalformedContainer(format!(
                "level {level}: {} pairs but {} highpass payloads",
                pairs.len(),
                hps.len()
            )));
        }
        let range = match header.mc_mode {
            McMode::Block => search_range_for_level(u32::from(level), &header.mc_params)?,
            McMode::None => 0,
        };
        let rebuilt = pairs
            .par_iter()
            .enumerate()
            .map(|(m, &p)| {
                let hp = decode_frame_lossless(&hps[m], w, h, SubbandKind::Highpass)?;
                let field: Option<MotionField> = match header.mc_mode {
                    McMode::Block => Some(decode_motion_field(
                        &gop.motion[li][m],
                        w,
                        h,
                        header.mc_params.block_size,
                        range,
                    )?),
                    McMode::None => None,
                };
                let warp = field.as_ref().map_or(WarpPair::Identity, WarpPair::Block);
                let lp = &slots[p].as_ref().expect("pair start").frame;
                lift_pair_inverse(lp, &hp, warp)
            })
            .collect::<Result<Vec<_>>>()?;
        let half = 1usize << (level - 1);
        for (&p, (odd, even)) in pairs.iter().zip(rebuilt) {
            slots[p] = Some(Slot {
                level: level - 1,
                frame: odd,
            });
            slots[p + half] = Some(Slot {
                level: level - 1,
                frame: even,
            });
        }
    }
    Ok(slots
        .into_iter()
        .enumerate()
        .filter_map(|(p, s)| s.map(|s| (p, s)))
        .collect())
}

/// Decodes a container, complete or layer-reduced.
pub fn decode_sequence(bytes: &[u8]) -> Result<DecodedSequence> {
    let stream = read_container(bytes)?;
    let header = stream.header;
    let (w, h) = (header.width as usize, header.height as usize);
    let gop_size = header.gop_size();
    let decoded = stream
        .gops
        .iter()
        .map(|gop| decode_gop(&header, gop))
        .collect::<Result<Vec<_>>>()?;
    let mut frames = Vec::with_capacity(header.frame_count as usize);
    for (g, slots) in decoded.into_iter().enumerate() {
        for (p, slot) in slots {
            frames.push(DecodedFrame {
                position: g * gop_size + p,
                support: 1 << slot.level,
                frame: slot.frame,
            });
        }
    }
    let offset = stream.gops.len() * gop_size;
    let trailing = stream
        .trailing
        .par_iter()
        .map(|bytes| decode_frame_lossless(bytes, w, h, SubbandKind::Lowpass))
        .collect::<Result<Vec<_>>>()?;
    for (i, frame) in trailing.into_iter().enumerate() {
        frames.push(DecodedFrame {
            position: offset + i,
            support: 1,
            frame,
        });
    }
    Ok(DecodedSequence { header, frames })
}
