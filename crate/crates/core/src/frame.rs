//! Frames, coefficient frames and headerless raw 8-bit grayscale I/O.
//!
//! A raw file is a plain concatenation of frames, each `width * height`
//! bytes in row-major order. Dimensions travel out of band.

use std::fs;
use std::path::Path;

use crate::error::{arg, Error, Result};

/// Largest magnitude a temporal coefficient may reach for 8-bit input over
/// at most eight lifting levels (each level at most doubles the bound).
pub const COEFF_BOUND: i32 = 255 << 9;

/// A picture of original samples. Level-0 frames hold values in `[0, 255]`;
/// the container is wider so that misuse (saving coefficients as pixels) is
/// detectable instead of silently wrapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    samples: Vec<i32>,
}

impl Frame {
    pub fn new(width: usize, height: usize, samples: Vec<i32>) -> Result<Self> {
        if samples.len() != width * height {
            return Err(arg(
                "frame-io",
                format!(
                    "{} samples do not fill a {width}x{height} frame",
                    samples.len()
                ),
            ));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(width, height, bytes.iter().map(|&b| i32::from(b)).collect())
    }

    pub fn filled(width: usize, height: usize, value: i32) -> Self {
        Self {
            width,
            height,
            samples: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[i32] {
        &self.samples
    }

    pub fn get(&self, x: usize, y: usize) -> i32 {
        self.samples[y * self.width + x]
    }

    /// Reinterprets the picture as a lowpass coefficient frame (level 0).
    pub fn to_coefficients(&self) -> CoefficientFrame {
        CoefficientFrame {
            width: self.width,
            height: self.height,
            samples: self.samples.clone(),
            kind: SubbandKind::Lowpass,
        }
    }
}

/// Which temporal subband a coefficient frame belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubbandKind {
    Lowpass,
    Highpass,
}

/// Signed wavelet coefficients of one temporal subband frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientFrame {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<i32>,
    pub kind: SubbandKind,
}

impl CoefficientFrame {
    pub fn new(width: usize, height: usize, samples: Vec<i32>, kind: SubbandKind) -> Result<Self> {
        if samples.len() != width * height {
            return Err(arg(
                "temporal-lifting",
                format!(
                    "{} samples do not fill a {width}x{height} frame",
                    samples.len()
                ),
            ));
        }
        Ok(Self {
            width,
            height,
            samples,
            kind,
        })
    }

    pub fn zeros(width: usize, height: usize, kind: SubbandKind) -> Self {
        Self {
            width,
            height,
            samples: vec![0; width * height],
            kind,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> i32 {
        self.samples[y * self.width + x]
    }

    /// Converts back to a picture. Values are not range-checked here; the
    /// check happens when a sequence is written out.
    pub fn to_frame(&self) -> Frame {
        Frame {
            width: self.width,
            height: self.height,
            samples: self.samples.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&s| s == 0)
    }
}

/// An ordered list of equally sized frames, `T >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequence {
    width: usize,
    height: usize,
    frames: Vec<Frame>,
}

impl Sequence {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| arg("frame-io", "a sequence needs at least one frame"))?;
        let (width, height) = (first.width, first.height);
        if let Some(i) = frames
            .iter()
            .position(|f| f.width != width || f.height != height)
        {
            return Err(arg(
                "frame-io",
                format!(
                    "frame {i} is {}x{}, expected {width}x{height}",
                    frames[i].width, frames[i].height
                ),
            ));
        }
        Ok(Self {
            width,
            height,
            frames,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    /// Serializes to raw bytes, rejecting anything outside `[0, 255]`.
    pub fn to_raw_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.width * self.height * self.frames.len());
        for (fi, frame) in self.frames.iter().enumerate() {
            for (index, &value) in frame.samples.iter().enumerate() {
                let byte = u8::try_from(value).map_err(|_| Error::SampleRange {
                    frame: fi,
                    index,
                    value,
                })?;
                out.push(byte);
            }
        }
        Ok(out)
    }

    pub fn from_raw_bytes(bytes: &[u8], width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(arg(
                "frame-io",
                format!("frame dimensions must be non-zero, got {width}x{height}"),
            ));
        }
        let frame_len = width * height;
        if bytes.is_empty() || !bytes.len().is_multiple_of(frame_len) {
            return Err(Error::MalformedInput(format!(
                "size {} is not a positive multiple of the {frame_len}-byte frame size ({width}x{height})",
                bytes.len()
            )));
        }
        let frames = bytes
            .chunks_exact(frame_len)
            .map(|chunk| Frame::from_bytes(width, height, chunk))
            .collect::<Result<Vec<_>>>()?;
        Self::new(frames)
    }
}

/// Reads a headerless 8-bit grayscale file of `width x height` frames.
pub fn load_raw_sequence(path: impl AsRef<Path>, width: usize, height: usize) -> Result<Sequence> {
    if width == 0 || height == 0 {
        return Err(arg(
            "frame-io",
            format!("frame dimensions must be non-zero, got {width}x{height}"),
        ));
    }
    let bytes = fs::read(path)?;
    Sequence::from_raw_bytes(&bytes, width, height)
}

/// Writes the byte-exact inverse of [`load_raw_sequence`].
pub fn save_raw_sequence(seq: &Sequence, path: impl AsRef<Path>) -> Result<()> {
    let bytes = seq.to_raw_bytes()?;
    fs::write(path, bytes)?;
    Ok(())
}
