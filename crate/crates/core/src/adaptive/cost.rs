use crate::error::{arg, Result};
use crate::frame::{CoefficientFrame, Frame};

/// Distortion (per-pixel MSE, 8-bit scale) and rate (bits per pixel) of a node.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CostRecord {
    pub distortion: f64,
    pub rate: f64,
}

impl CostRecord {
    pub fn new(distortion: f64, rate: f64) -> Self {
        debug_assert!(distortion >= 0.0 && rate >= 0.0);
        Self { distortion, rate }
    }
}

impl std::ops::Add for CostRecord {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            distortion: self.distortion + rhs.distortion,
            rate: self.rate + rhs.rate,
        }
    }
}

/// Lagrange multiplier trading distortion against rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lambda(f64);

impl Lambda {
    pub const DEFAULT: Lambda = Lambda(3.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(arg(
                "adaptive-control",
                format!("lambda must be a non-negative number, got {value}"),
            ));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Lambda {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// How the distortion of a highpass node is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HpDistortion {
    /// Mean squared coefficient value.
    #[default]
    Energy,
    /// Highpass frames contribute no distortion.
    Zero,
}

/// Mean over all support frames of the per-pixel squared error between the
/// lowpass frame and that original.
pub fn node_distortion_lp(lp: &CoefficientFrame, support: &[Frame]) -> Result<f64> {
    if support.is_empty() {
        return Err(arg("adaptive-control", "lowpass support must not be empty"));
    }
    let mut sum = 0u128;
    for frame in support {
        if (frame.width(), frame.height()) != lp.dims() {
            return Err(arg(
                "adaptive-control",
                format!(
                    "support frame is {}x{}, lowpass frame is {}x{}",
                    frame.width(),
                    frame.height(),
                    lp.width,
                    lp.height
                ),
            ));
        }
        sum += squared_error(&lp.samples, frame.samples());
    }
    Ok(sum as f64 / (support.len() * lp.pixel_count()).max(1) as f64)
}

pub(crate) fn squared_error(a: &[i32], b: &[i32]) -> u128 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = u128::from(x.abs_diff(y));
            d * d
        })
        .sum()
}

pub fn node_distortion_hp(hp: &CoefficientFrame, policy: HpDistortion) -> f64 {
    match policy {
        HpDistortion::Zero => 0.0,
        HpDistortion::Energy => {
            let energy: u128 = hp
                .samples
                .iter()
                .map(|&s| {
                    let m = u128::from(s.unsigned_abs());
                    m * m
                })
                .sum();
            energy as f64 / hp.pixel_count().max(1) as f64
        }
    }
}

pub fn lagrangian_cost(rec: CostRecord, lambda: Lambda) -> f64 {
    rec.distortion + lambda.value() * rec.rate
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneDecision {
    /// Keep the two frames of the current level; stop decomposing here.
    KeepParent,
    /// Replace the pair by its lowpass and highpass children.
    Decompose,
}

/// Keeps the parent pair when its cost does not exceed the children's
/// combined cost (ties keep the parent).
pub fn prune_decision(
    parent_pair: CostRecord,
    child_lp: CostRecord,
    child_hp: CostRecord,
    lambda: Lambda,
) -> PruneDecision {
    let parent = lagrangian_cost(parent_pair, lambda);
    let children = lagrangian_cost(child_lp + child_hp, lambda);
    if parent <= children {
        PruneDecision::KeepParent
    } else {
        PruneDecision::Decompose
    }
}
