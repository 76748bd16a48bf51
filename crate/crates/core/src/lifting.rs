//! Integer Haar lifting along the time axis.
//!
//! For a pair `(odd, even)` of consecutive frames (the earlier frame takes the
//! odd role and becomes the lowpass frame):
//!
//! ```text
//! hp = even - floor(W_pred(odd))
//! lp = odd  + floor(W_upd(hp) / 2)
//! ```
//!
//! Both floors round toward negative infinity. The inverse replays the same
//! two steps in reverse order with the same warps, so reconstruction is exact
//! for any deterministic warp, including a garbage motion field.

use rayon::prelude::*;

use crate::error::{arg, Result};
use crate::frame::{CoefficientFrame, SubbandKind, COEFF_BOUND};
use crate::motion::{
    estimate_block_motion, search_range_for_level, warp_predict, warp_update, McParams, MotionField,
};

/// Whether lifting steps are motion compensated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum McMode {
    #[default]
    None,
    Block,
}

/// The predict and update warps of one frame pair. Both directions come from
/// the same motion field; `Identity` is the uncompensated Haar transform.
#[derive(Clone, Copy, Debug)]
pub enum WarpPair<'a> {
    Identity,
    Block(&'a MotionField),
}

impl WarpPair<'_> {
    fn predict(&self, reference: &CoefficientFrame) -> Result<CoefficientFrame> {
        match self {
            WarpPair::Identity => Ok(reference.clone()),
            WarpPair::Block(field) => warp_predict(reference, field),
        }
    }

    fn update(&self, hp: &CoefficientFrame) -> Result<CoefficientFrame> {
        match self {
            WarpPair::Identity => Ok(hp.clone()),
            WarpPair::Block(field) => warp_update(hp, field),
        }
    }
}

fn check_same_dims(a: &CoefficientFrame, b: &CoefficientFrame) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(arg(
            "temporal-lifting",
            format!(
                "frame pair dimensions differ: {}x{} vs {}x{}",
                a.width, a.height, b.width, b.height
            ),
        ));
    }
    Ok(())
}

/// Forward Haar lifting of one pair; returns `(lp, hp)`.
pub fn lift_pair_forward(
    odd: &CoefficientFrame,
    even: &CoefficientFrame,
    warp: WarpPair<'_>,
) -> Result<(CoefficientFrame, CoefficientFrame)> {
    check_same_dims(odd, even)?;
    let prediction = warp.predict(odd)?;
    let hp_samples: Vec<i32> = even
        .samples
        .iter()
        .zip(&prediction.samples)
        .map(|(&e, &p)| e - p)
        .collect();
    let hp = CoefficientFrame::new(even.width, even.height, hp_samples, SubbandKind::Highpass)?;
    let update = warp.update(&hp)?;
    let lp_samples: Vec<i32> = odd
        .samples
        .iter()
        .zip(&update.samples)
        .map(|(&o, &u)| o + (u >> 1))
        .collect();
    debug_assert!(
        lp_samples
            .iter()
            .chain(&hp.samples)
            .all(|v| v.abs() <= COEFF_BOUND),
        "temporal coefficient outside the container bound"
    );
    let lp = CoefficientFrame::new(odd.width, odd.height, lp_samples, SubbandKind::Lowpass)?;
    Ok((lp, hp))
}

/// Exact inverse of [`lift_pair_forward`]; returns `(odd, even)`.
pub fn lift_pair_inverse(
    lp: &CoefficientFrame,
    hp: &CoefficientFrame,
    warp: WarpPair<'_>,
) -> Result<(CoefficientFrame, CoefficientFrame)> {
    check_same_dims(lp, hp)?;
    let update = warp.update(hp)?;
    let odd_samples: Vec<i32> = lp
        .samples
        .iter()
        .zip(&update.samples)
        .map(|(&l, &u)| l - (u >> 1))
        .collect();
    let odd = CoefficientFrame::new(lp.width, lp.height, odd_samples, SubbandKind::Lowpass)?;
    let prediction = warp.predict(&odd)?;
    let even_samples: Vec<i32> = hp
        .samples
        .iter()
        .zip(&prediction.samples)
        .map(|(&h, &p)| h + p)
        .collect();
    let even = CoefficientFrame::new(hp.width, hp.height, even_samples, SubbandKind::Lowpass)?;
    Ok((odd, even))
}

/// Output of one analysis level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelOutput {
    pub lowpass: Vec<CoefficientFrame>,
    pub highpass: Vec<CoefficientFrame>,
    /// One field per pair; all-zero fields in uncompensated mode.
    pub motion: Vec<MotionField>,
}

/// One temporal decomposition level over `frames`, pairing `(2k, 2k + 1)`.
pub fn analyze_level(
    frames: &[CoefficientFrame],
    mc_mode: McMode,
    level: u32,
    params: &McParams,
) -> Result<LevelOutput> {
    if !frames.len().is_multiple_of(2) {
        return Err(arg(
            "temporal-lifting",
            format!(
                "analysis needs an even number of frames, got {}",
                frames.len()
            ),
        ));
    }
    let range = match mc_mode {
        McMode::None => 0,
        McMode::Block => search_range_for_level(level, params)?,
    };
    let pairs: Vec<_> = frames
        .par_chunks_exact(2)
        .map(|pair| {
            let (odd, even) = (&pair[0], &pair[1]);
            let field = match mc_mode {
                McMode::None => MotionField::zero(odd.width, odd.height, params.block_size),
                McMode::Block => estimate_block_motion(odd, even, range, params)?,
            };
            let warp = match mc_mode {
                McMode::None => WarpPair::Identity,
                McMode::Block => WarpPair::Block(&field),
            };
            let (lp, hp) = lift_pair_forward(odd, even, warp)?;
            Ok((lp, hp, field))
        })
        .collect::<Result<_>>()?;
    let mut out = LevelOutput {
        lowpass: Vec::with_capacity(pairs.len()),
        highpass: Vec::with_capacity(pairs.len()),
        motion: Vec::with_capacity(pairs.len()),
    };
    for (lp, hp, field) in pairs {
        out.lowpass.push(lp);
        out.highpass.push(hp);
        out.motion.push(field);
    }
    Ok(out)
}

/// Inverse of [`analyze_level`]: interleaves the reconstructed pairs.
pub fn synthesize_level(
    lowpass: &[CoefficientFrame],
    highpass: &[CoefficientFrame],
    motion: &[MotionField],
    mc_mode: McMode,
) -> Result<Vec<CoefficientFrame>> {
    if lowpass.len() != highpass.len() || lowpass.len() != motion.len() {
        return Err(arg(
            "temporal-lifting",
            format!(
                "synthesis needs matching counts, got {} lp, {} hp, {} motion fields",
                lowpass.len(),
                highpass.len(),
                motion.len()
            ),
        ));
    }
    let pairs: Vec<_> = lowpass
        .par_iter()
        .zip(highpass)
        .zip(motion)
        .map(|((lp, hp), field)| {
            let warp = match mc_mode {
                McMode::None => WarpPair::Identity,
                McMode::Block => WarpPair::Block(field),
            };
            lift_pair_inverse(lp, hp, warp)
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().flat_map(|(o, e)| [o, e]).collect())
}
