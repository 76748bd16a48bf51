//! Quality and rate measurements.

use std::fmt;

use crate::adaptive::node_distortion_lp;
use crate::codec::DecodedSequence;
use crate::container::{read_container, section_sizes};
use crate::error::{arg, consistency, Result};
use crate::frame::Sequence;

/// Pooled PSNR of decoded frames against the originals they stand for.
///
/// Every decoded frame is compared with each original in its support; the
/// squared errors of all comparisons are pooled into one MSE. Returns
/// `f64::INFINITY` for a lossless match.
pub fn psnr_lp_t(decoded: &DecodedSequence, original: &Sequence) -> Result<f64> {
    let mut covered = 0;
    let mut weighted = 0.0;
    let mut count = 0usize;
    for f in &decoded.frames {
        if f.position != covered || f.position + f.support > original.frame_count() {
            return Err(arg(
                "metrics",
                format!(
                    "decoded frame at {} (support {}) does not tile a {}-frame original",
                    f.position,
                    f.support,
                    original.frame_count()
                ),
            ));
        }
        let support = &original.frames()[f.position..f.position + f.support];
        weighted += node_distortion_lp(&f.frame, support)? * f.support as f64;
        count += f.support;
        covered += f.support;
    }
    if covered != original.frame_count() {
        return Err(arg(
            "metrics",
            format!(
                "decoded frames cover {covered} of {} originals",
                original.frame_count()
            ),
        ));
    }
    Ok(psnr_from_mse(weighted / count as f64))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}

/// Formats a PSNR value, printing `lossless` for an exact match.
pub struct DisplayPsnr(pub f64);

impl fmt::Display for DisplayPsnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("lossless")
        } else {
            write!(f, "{:.4}", self.0)
        }
    }
}

/// Bytes attributed to each part of a container. Length prefixes count with
/// what they frame; section prefixes count as header. The parts sum to the
/// file size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateReport {
    pub header: usize,
    pub depth_vectors: usize,
    pub motion: usize,
    /// Base layer, including trailing intra frames.
    pub base_layer: usize,
    /// `enhancement[k - 1]` for EL_k.
    pub enhancement: Vec<usize>,
    pub total: usize,
}

pub fn rate_report(bytes: &[u8]) -> Result<RateReport> {
    let sizes = section_sizes(&read_container(bytes)?);
    if sizes.total() != bytes.len() {
        return Err(consistency(
            "metrics",
            format!(
                "sections account for {} of {} bytes",
                sizes.total(),
                bytes.len()
            ),
        ));
    }
    Ok(RateReport {
        header: sizes.header,
        depth_vectors: sizes.depth_vectors,
        motion: sizes.motion,
        base_layer: sizes.base_layer,
        enhancement: sizes.enhancement,
        total: bytes.len(),
    })
}
