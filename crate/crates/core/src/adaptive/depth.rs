use std::fmt;

use crate::error::{consistency, Error, Result};

/// Per-position decomposition depth.
///
/// `v[p] = i > 0` marks an LP frame at level `i` whose subtree covers the
/// aligned block `[p, p + 2^i)`. Inside that block the HP frame produced at
/// level `j` of the pair starting at `q` sits at `q + 2^(j-1)`; every such
/// position holds 0. Unclaimed zeros are intra frames.
#[derive(Clone, PartialEq, Eq)]
pub struct DepthVector {
    values: Vec<u8>,
    i_max: u8,
}

impl fmt::Debug for DepthVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DepthVector(i_max={}, {:?})", self.i_max, self.values)
    }
}

/// What a position holds after parsing a depth vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrameRole {
    /// Lowpass frame after `level` decompositions.
    Lowpass { level: u8 },
    /// Highpass frame produced at `level` by the pair whose lowpass frame is
    /// at position `partner`.
    Highpass { level: u8, partner: usize },
    /// Original frame that was never decomposed.
    Intra,
}

impl DepthVector {
    pub fn zeros(len: usize, i_max: u8) -> Self {
        Self {
            values: vec![0; len],
            i_max,
        }
    }

    /// Builds and validates a depth vector.
    pub fn from_values(values: Vec<u8>, i_max: u8) -> Result<Self> {
        let v = Self { values, i_max };
        v.parse()?;
        Ok(v)
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn i_max(&self) -> u8 {
        self.i_max
    }

    /// Records the lowpass frames that survive `level`: each surviving
    /// position gains one level and its partner `2^(level-1)` later becomes
    /// an HP position (reset to 0).
    pub fn update(&mut self, level: u8, surviving: &[usize]) -> Result<()> {
        if level == 0 || level > self.i_max {
            return Err(consistency(
                "adaptive-control",
                format!("level {level} outside 1..={}", self.i_max),
            ));
        }
        let stride = 1usize << (level - 1);
        let expected = level - 1;
        for &p in surviving {
            let partner = p + stride;
            // Alignment also rules out a survivor being another's partner.
            if p % (stride * 2) != 0 || partner >= self.values.len() {
                return Err(consistency(
                    "adaptive-control",
                    format!(
                        "position {p} cannot start a level-{level} pair in a vector of length {}",
                        self.values.len()
                    ),
                ));
            }
            if self.values[p] != expected || self.values[partner] != expected {
                return Err(consistency("adaptive-control", format!(
                    "level-{level} pair ({p}, {partner}) collides: depths are {} and {}, expected {expected}",
                    self.values[p], self.values[partner]
                )));
            }
        }
        for &p in surviving {
            self.values[p] = level;
            self.values[p + stride] = 0;
        }
        Ok(())
    }

    /// Role of every position, or an error if the vector is inconsistent.
    pub fn parse(&self) -> Result<Vec<FrameRole>> {
        let n = self.values.len();
        let mut roles = vec![FrameRole::Intra; n];
        let mut p = 0;
        while p < n {
            let level = self.values[p];
            if level == 0 {
                p += 1;
                continue;
            }
            if level > self.i_max {
                return Err(Error::MalformedDepthVector(format!(
                    "entry {level} at position {p} exceeds i_max = {}",
                    self.i_max
                )));
            }
            let span = 1usize << level;
            if p % span != 0 {
                return Err(Error::MalformedDepthVector(format!(
                    "level-{level} LP at position {p} is not aligned to {span}"
                )));
            }
            if p + span > n {
                return Err(Error::MalformedDepthVector(format!(
                    "level-{level} LP at position {p} needs partner at {} beyond length {n}",
                    p + span / 2
                )));
            }
            roles[p] = FrameRole::Lowpass { level };
            for offset in 1..span {
                let q = p + offset;
                if self.values[q] != 0 {
                    return Err(Error::MalformedDepthVector(format!(
                        "position {q} has depth {} but is claimed by the level-{level} LP at {p}",
                        self.values[q]
                    )));
                }
                let hp_level = offset.trailing_zeros() as u8 + 1;
                roles[q] = FrameRole::Highpass {
                    level: hp_level,
                    partner: q - (1usize << (hp_level - 1)),
                };
            }
            p += span;
        }
        Ok(roles)
    }
}

/// Functional form of [`DepthVector::update`].
pub fn update_depth_vector(v: &DepthVector, level: u8, surviving: &[usize]) -> Result<DepthVector> {
    let mut out = v.clone();
    out.update(level, surviving)?;
    Ok(out)
}

pub fn parse_depth_vector(v: &DepthVector) -> Result<Vec<FrameRole>> {
    v.parse()
}
