//! Content-adaptive temporal decomposition.
//!
//! Every level is computed for the whole GOP first. Each candidate frame is
//! then coded with the spatial codec to measure its true rate, and the pairs
//! are evaluated level by level: a pair whose two frames are cheaper (in
//! `D + lambda * R`) than the lowpass/highpass children they would turn into
//! stays as it is, and nothing above it is decomposed further.

mod cost;
mod depth;

pub use cost::{
    lagrangian_cost, node_distortion_hp, node_distortion_lp, prune_decision, CostRecord,
    HpDistortion, Lambda, PruneDecision,
};
pub use depth::{parse_depth_vector, update_depth_vector, DepthVector, FrameRole};

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{arg, Result};
use crate::frame::{CoefficientFrame, Frame};
use crate::lifting::{analyze_level, McMode};
use crate::motion::{encode_motion_field, McParams, MotionField};
use crate::spatial::encode_frame_lossless;

/// How pair decisions are made.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Strategy {
    /// Lagrangian pruning.
    #[default]
    RateDistortion,
    /// Decompose every eligible pair (uniform lifting baseline).
    Uniform,
    /// Explicit decisions, `decisions[level - 1][k]` for pair `k` of that
    /// level. Ignored for pairs that are not eligible. When encoding a whole
    /// sequence, `k` counts pairs across all GOPs.
    Forced(Vec<Vec<bool>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveConfig {
    pub lambda: Lambda,
    pub mc_mode: McMode,
    pub mc_params: McParams,
    pub hp_distortion: HpDistortion,
    pub strategy: Strategy,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            lambda: Lambda::DEFAULT,
            mc_mode: McMode::None,
            mc_params: McParams::default(),
            hp_distortion: HpDistortion::Energy,
            strategy: Strategy::RateDistortion,
        }
    }
}

/// Evaluation record of the pair `[position, position + 2^level)` at the
/// transition from `level - 1` to `level`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairNode {
    pub level: u8,
    pub position: usize,
    /// Both halves were themselves decomposed (always true at level 1).
    pub eligible: bool,
    /// Cost of keeping the two level-`(level - 1)` frames.
    pub parent: CostRecord,
    pub child_lp: CostRecord,
    pub child_hp: CostRecord,
    pub decision: Option<PruneDecision>,
}

impl PairNode {
    pub fn support(&self) -> Range<usize> {
        self.position..self.position + (1 << self.level)
    }

    pub fn decomposed(&self) -> bool {
        self.decision == Some(PruneDecision::Decompose)
    }
}

/// Per-level pair evaluations of one GOP, `levels[i - 1]` for level `i`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GopTree {
    pub levels: Vec<Vec<PairNode>>,
}

/// A frame chosen for transmission together with its coded payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodedFrame {
    /// Position within the GOP.
    pub position: usize,
    /// Temporal level: LP/intra depth for base frames, creation level for HP frames.
    pub level: u8,
    pub frame: CoefficientFrame,
    pub payload: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodedMotion {
    /// Position of the pair's lowpass frame.
    pub position: usize,
    pub field: MotionField,
    pub payload: Vec<u8>,
}

/// Everything the container needs from one GOP.
#[derive(Clone, Debug)]
pub struct GopDecomposition {
    pub depth: DepthVector,
    pub tree: GopTree,
    /// Surviving lowpass and intra frames in position order.
    pub base: Vec<CodedFrame>,
    /// Highpass frames created at level `k` are in `enhancement[k - 1]`, in
    /// position order.
    pub enhancement: Vec<Vec<CodedFrame>>,
    /// Motion of the decomposed pairs, `motion[k - 1]` for level `k`.
    /// Empty in uncompensated mode.
    pub motion: Vec<Vec<CodedMotion>>,
}

struct LevelFrames {
    lowpass: Vec<CoefficientFrame>,
    lowpass_payload: Vec<Vec<u8>>,
    lowpass_distortion: Vec<f64>,
    highpass: Vec<CoefficientFrame>,
    highpass_payload: Vec<Vec<u8>>,
    motion: Vec<MotionField>,
    motion_payload: Vec<Vec<u8>>,
}

fn bits_per_pixel(bytes: usize, pixels: usize) -> f64 {
    (bytes * 8) as f64 / pixels.max(1) as f64
}

fn encode_all(frames: &[CoefficientFrame]) -> Result<Vec<Vec<u8>>> {
    frames.par_iter().map(encode_frame_lossless).collect()
}

/// Runs the full decomposition of one GOP (length `2^i_max`) and selects the
/// surviving subtree per pair.
pub fn build_adaptive_decomposition(
    gop: &[Frame],
    config: &AdaptiveConfig,
) -> Result<GopDecomposition> {
    let n = gop.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(arg(
            "adaptive-control",
            format!("GOP length must be a power of two >= 2, got {n}"),
        ));
    }
    let i_max = n.trailing_zeros() as u8;
    let pixels = gop[0].width() * gop[0].height();

    let originals: Vec<CoefficientFrame> = gop.iter().map(Frame::to_coefficients).collect();
    let mut levels = vec![LevelFrames {
        lowpass_payload: encode_all(&originals)?,
        lowpass_distortion: vec![0.0; n],
        lowpass: originals,
        highpass: Vec::new(),
        highpass_payload: Vec::new(),
        motion: Vec::new(),
        motion_payload: Vec::new(),
    }];
    for level in 1..=i_max {
        let prev = &levels[usize::from(level) - 1].lowpass;
        let out = analyze_level(prev, config.mc_mode, u32::from(level), &config.mc_params)?;
        let span = 1usize << level;
        let lowpass_distortion = out
            .lowpass
            .par_iter()
            .enumerate()
            .map(|(k, lp)| node_distortion_lp(lp, &gop[k * span..(k + 1) * span]))
            .collect::<Result<Vec<_>>>()?;
        let motion_payload = match config.mc_mode {
            McMode::None => vec![Vec::new(); out.motion.len()],
            McMode::Block => out.motion.iter().map(encode_motion_field).collect(),
        };
        levels.push(LevelFrames {
            lowpass_payload: encode_all(&out.lowpass)?,
            highpass_payload: encode_all(&out.highpass)?,
            lowpass: out.lowpass,
            lowpass_distortion,
            highpass: out.highpass,
            motion: out.motion,
            motion_payload,
        });
    }

    let mut tree = GopTree::default();
    let mut depth = DepthVector::zeros(n, i_max);
    for level in 1..=i_max {
        let li = usize::from(level);
        let (below, here) = (&levels[li - 1], &levels[li]);
        let mut nodes = Vec::with_capacity(n >> level);
        let mut surviving = Vec::new();
        for k in 0..n >> level {
            let eligible = level == 1
                || (tree.levels[li - 2][2 * k].decomposed()
                    && tree.levels[li - 2][2 * k + 1].decomposed());
            let parent = CostRecord::new(
                (below.lowpass_distortion[2 * k] + below.lowpass_distortion[2 * k + 1]) / 2.0,
                bits_per_pixel(
                    below.lowpass_payload[2 * k].len() + below.lowpass_payload[2 * k + 1].len(),
                    pixels,
                ),
            );
            let child_lp = CostRecord::new(
                here.lowpass_distortion[k],
                bits_per_pixel(
                    here.lowpass_payload[k].len() + here.motion_payload[k].len(),
                    pixels,
                ),
            );
            let child_hp = CostRecord::new(
                node_distortion_hp(&here.highpass[k], config.hp_distortion),
                bits_per_pixel(here.highpass_payload[k].len(), pixels),
            );
            let decision = eligible.then(|| match &config.strategy {
                Strategy::RateDistortion => {
                    prune_decision(parent, child_lp, child_hp, config.lambda)
                }
                Strategy::Uniform => PruneDecision::Decompose,
                Strategy::Forced(table) => {
                    let forced = table
                        .get(li - 1)
                        .and_then(|row| row.get(k))
                        .copied()
                        .unwrap_or(false);
                    if forced {
                        PruneDecision::Decompose
                    } else {
                        PruneDecision::KeepParent
                    }
                }
            });
            if decision == Some(PruneDecision::Decompose) {
                surviving.push(k << level);
            }
            nodes.push(PairNode {
                level,
                position: k << level,
                eligible,
                parent,
                child_lp,
                child_hp,
                decision,
            });
        }
        depth.update(level, &surviving)?;
        tree.levels.push(nodes);
    }

    let roles = depth.parse()?;
    let mut base = Vec::new();
    let mut enhancement = vec![Vec::new(); usize::from(i_max)];
    let mut motion = vec![Vec::new(); usize::from(i_max)];
    for (position, role) in roles.iter().enumerate() {
        match *role {
            FrameRole::Intra => base.push(CodedFrame {
                position,
                level: 0,
                frame: levels[0].lowpass[position].clone(),
                payload: levels[0].lowpass_payload[position].clone(),
            }),
            FrameRole::Lowpass { level } => {
                let k = position >> level;
                let lf = &levels[usize::from(level)];
                base.push(CodedFrame {
                    position,
                    level,
                    frame: lf.lowpass[k].clone(),
                    payload: lf.lowpass_payload[k].clone(),
                });
            }
            FrameRole::Highpass { level, partner } => {
                let k = partner >> level;
                let lf = &levels[usize::from(level)];
                enhancement[usize::from(level) - 1].push(CodedFrame {
                    position,
                    level,
                    frame: lf.highpass[k].clone(),
                    payload: lf.highpass_payload[k].clone(),
                });
                if config.mc_mode == McMode::Block {
                    motion[usize::from(level) - 1].push(CodedMotion {
                        position: partner,
                        field: lf.motion[k].clone(),
                        payload: lf.motion_payload[k].clone(),
                    });
                }
            }
        }
    }
    Ok(GopDecomposition {
        depth,
        tree,
        base,
        enhancement,
        motion,
    })
}
