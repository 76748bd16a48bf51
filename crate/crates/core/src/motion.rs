//! Block motion estimation and the warping operators used inside the
//! temporal lifting steps.
//!
//! A [`MotionField`] holds one integer-pel vector per block, with the block
//! grid anchored on the current (even) frame. Reads that fall outside the
//! reference are clamped to the nearest edge sample.

use rayon::prelude::*;

use crate::entropy::{decode_signed_values, encode_signed_values, CodedStream};
use crate::error::{arg, Error, Result};
use crate::frame::{CoefficientFrame, SubbandKind};

/// Block matching parameters. The search range starts at
/// `initial_search_range` on level 1 and doubles per level up to
/// `max_search_range`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McParams {
    pub block_size: usize,
    pub initial_search_range: usize,
    pub max_search_range: usize,
}

impl Default for McParams {
    fn default() -> Self {
        Self {
            block_size: 8,
            initial_search_range: 8,
            max_search_range: 64,
        }
    }
}

impl McParams {
    pub fn new(
        block_size: usize,
        initial_search_range: usize,
        max_search_range: usize,
    ) -> Result<Self> {
        let params = Self {
            block_size,
            initial_search_range,
            max_search_range,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 {
            return Err(arg("motion", "block size must be at least 1"));
        }
        if self.initial_search_range == 0 || self.initial_search_range > self.max_search_range {
            return Err(arg(
                "motion",
                format!(
                    "need 0 < initial search range ({}) <= max search range ({})",
                    self.initial_search_range, self.max_search_range
                ),
            ));
        }
        Ok(())
    }
}

/// Search range used at decomposition `level` (1-based).
pub fn search_range_for_level(level: u32, params: &McParams) -> Result<usize> {
    if level < 1 {
        return Err(arg("motion", "decomposition levels start at 1"));
    }
    let shift = (level - 1).min(usize::BITS - 1);
    let range = params
        .initial_search_range
        .checked_shl(shift)
        .filter(|&r| r >> shift == params.initial_search_range)
        .unwrap_or(usize::MAX);
    Ok(range.min(params.max_search_range))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub const ZERO: Self = Self { dx: 0, dy: 0 };

    pub fn new(dx: i32, dy: i32) -> Self {
        Self { dx, dy }
    }

    fn l1(self) -> u32 {
        self.dx.unsigned_abs() + self.dy.unsigned_abs()
    }
}

/// One vector per block of the current frame, row-major over the block grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotionField {
    width: usize,
    height: usize,
    block_size: usize,
    range: usize,
    vectors: Vec<MotionVector>,
}

/// Number of block columns and rows covering a `width x height` frame.
pub fn block_grid(width: usize, height: usize, block_size: usize) -> (usize, usize) {
    (width.div_ceil(block_size), height.div_ceil(block_size))
}

impl MotionField {
    pub fn zero(width: usize, height: usize, block_size: usize) -> Self {
        let (cols, rows) = block_grid(width, height, block_size);
        Self {
            width,
            height,
            block_size,
            range: 0,
            vectors: vec![MotionVector::ZERO; cols * rows],
        }
    }

    pub fn from_vectors(
        width: usize,
        height: usize,
        block_size: usize,
        range: usize,
        vectors: Vec<MotionVector>,
    ) -> Result<Self> {
        if block_size == 0 {
            return Err(arg("motion", "block size must be at least 1"));
        }
        let (cols, rows) = block_grid(width, height, block_size);
        if vectors.len() != cols * rows {
            return Err(arg(
                "motion",
                format!(
                    "{} vectors do not cover a {cols}x{rows} block grid",
                    vectors.len()
                ),
            ));
        }
        Ok(Self {
            width,
            height,
            block_size,
            range,
            vectors,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn grid(&self) -> (usize, usize) {
        block_grid(self.width, self.height, self.block_size)
    }

    /// Search range the field was estimated with.
    pub fn range(&self) -> usize {
        self.range
    }

    pub fn vectors(&self) -> &[MotionVector] {
        &self.vectors
    }

    pub fn vector(&self, col: usize, row: usize) -> MotionVector {
        self.vectors[row * self.grid().0 + col]
    }

    pub fn is_zero(&self) -> bool {
        self.vectors.iter().all(|&v| v == MotionVector::ZERO)
    }

    fn blocks(&self) -> impl Iterator<Item = (Block, MotionVector)> + '_ {
        let (cols, _) = self.grid();
        self.vectors.iter().enumerate().map(move |(i, &mv)| {
            (
                Block::at(i % cols, i / cols, self.block_size, self.width, self.height),
                mv,
            )
        })
    }

    fn covers(&self, frame: &CoefficientFrame) -> Result<()> {
        if self.dims() != frame.dims() {
            return Err(arg(
                "motion",
                format!(
                    "motion field covers {}x{}, frame is {}x{}",
                    self.width, self.height, frame.width, frame.height
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct Block {
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
}

impl Block {
    fn at(col: usize, row: usize, size: usize, width: usize, height: usize) -> Self {
        let x0 = col * size;
        let y0 = row * size;
        Self {
            x0,
            y0,
            w: size.min(width - x0),
            h: size.min(height - y0),
        }
    }
}

#[inline]
fn clamp_coord(v: i64, len: usize) -> usize {
    v.clamp(0, len as i64 - 1) as usize
}

fn block_sad(
    reference: &CoefficientFrame,
    current: &CoefficientFrame,
    b: Block,
    mv: MotionVector,
    limit: u64,
) -> u64 {
    let (w, h) = reference.dims();
    let sx = b.x0 as i64 + i64::from(mv.dx);
    let sy = b.y0 as i64 + i64::from(mv.dy);
    let inside = sx >= 0 && sy >= 0 && sx as usize + b.w <= w && sy as usize + b.h <= h;
    let mut sad = 0u64;
    for y in 0..b.h {
        let cur_row = &current.samples[(b.y0 + y) * w + b.x0..][..b.w];
        if inside {
            let ref_row = &reference.samples[(sy as usize + y) * w + sx as usize..][..b.w];
            sad += cur_row
                .iter()
                .zip(ref_row)
                .map(|(&c, &r)| u64::from(c.abs_diff(r)))
                .sum::<u64>();
        } else {
            let ry = clamp_coord(sy + y as i64, h);
            let ref_row = &reference.samples[ry * w..][..w];
            sad += cur_row
                .iter()
                .enumerate()
                .map(|(x, &c)| u64::from(c.abs_diff(ref_row[clamp_coord(sx + x as i64, w)])))
                .sum::<u64>();
        }
        if sad > limit {
            return sad;
        }
    }
    sad
}

/// Candidate displacements along one axis that can still win. Once a block
/// is pushed entirely past an edge, every further step reads the same
/// clamped samples and only increases `|d|`, so it loses the tie-break.
fn useful_span(start: usize, len: usize, frame_len: usize, range: i64) -> (i64, i64) {
    let lo = -(range.min((start + len - 1) as i64));
    let hi = range.min((frame_len - 1 - start) as i64);
    (lo, hi)
}

/// Full-search block matching of `current` against `reference`.
///
/// Every block tests every `(dx, dy)` in `[-range, range]^2`. The winner has
/// the smallest SAD, then the smallest `|dx| + |dy|`, then comes first in
/// row-major candidate order (`dy` outer, `dx` inner).
pub fn estimate_block_motion(
    reference: &CoefficientFrame,
    current: &CoefficientFrame,
    range: usize,
    params: &McParams,
) -> Result<MotionField> {
    params.validate()?;
    if reference.dims() != current.dims() {
        return Err(arg(
            "motion",
            format!(
                "reference is {}x{}, current is {}x{}",
                reference.width, reference.height, current.width, current.height
            ),
        ));
    }
    let (width, height) = current.dims();
    let bs = params.block_size;
    let (cols, rows) = block_grid(width, height, bs);
    let r = i64::try_from(range).unwrap_or(i64::MAX);
    let vectors = (0..cols * rows)
        .into_par_iter()
        .map(|i| {
            let b = Block::at(i % cols, i / cols, bs, width, height);
            let (dx_lo, dx_hi) = useful_span(b.x0, b.w, width, r);
            let (dy_lo, dy_hi) = useful_span(b.y0, b.h, height, r);
            let mut best = MotionVector::ZERO;
            let mut best_sad = block_sad(reference, current, b, best, u64::MAX);
            for dy in dy_lo..=dy_hi {
                for dx in dx_lo..=dx_hi {
                    let mv = MotionVector::new(dx as i32, dy as i32);
                    let sad = block_sad(reference, current, b, mv, best_sad);
                    // Candidates arrive in row-major order, so a later one
                    // only wins when strictly better on (SAD, |dx| + |dy|).
                    if sad < best_sad || (sad == best_sad && mv.l1() < best.l1()) {
                        best = mv;
                        best_sad = sad;
                    }
                }
            }
            best
        })
        .collect();
    MotionField::from_vectors(width, height, bs, range, vectors)
}

/// Motion-compensated prediction of the current frame from `reference`:
/// each block copies the reference block displaced by its vector.
pub fn warp_predict(reference: &CoefficientFrame, field: &MotionField) -> Result<CoefficientFrame> {
    field.covers(reference)?;
    let (w, h) = reference.dims();
    let mut out = CoefficientFrame::zeros(w, h, reference.kind);
    for (b, mv) in field.blocks() {
        for y in 0..b.h {
            let ry = clamp_coord((b.y0 + y) as i64 + i64::from(mv.dy), h);
            for x in 0..b.w {
                let rx = clamp_coord((b.x0 + x) as i64 + i64::from(mv.dx), w);
                out.samples[(b.y0 + y) * w + b.x0 + x] = reference.samples[ry * w + rx];
            }
        }
    }
    Ok(out)
}

/// Inverse-direction compensation for the update step: every highpass block
/// is scattered to its displaced position in the reference frame's
/// coordinates. Targets outside the frame are dropped, uncovered targets stay
/// zero, and later blocks (row-major) overwrite earlier ones.
pub fn warp_update(hp: &CoefficientFrame, field: &MotionField) -> Result<CoefficientFrame> {
    field.covers(hp)?;
    let (w, h) = hp.dims();
    let mut out = CoefficientFrame::zeros(w, h, SubbandKind::Highpass);
    for (b, mv) in field.blocks() {
        for y in 0..b.h {
            let ty = (b.y0 + y) as i64 + i64::from(mv.dy);
            if ty < 0 || ty >= h as i64 {
                continue;
            }
            for x in 0..b.w {
                let tx = (b.x0 + x) as i64 + i64::from(mv.dx);
                if tx < 0 || tx >= w as i64 {
                    continue;
                }
                out.samples[ty as usize * w + tx as usize] = hp.samples[(b.y0 + y) * w + b.x0 + x];
            }
        }
    }
    Ok(out)
}

/// Residuals of each vector against its left neighbor (the block above for
/// the first column), interleaved as `dx, dy`.
fn prediction_residuals(vectors: &[MotionVector], cols: usize) -> Vec<i32> {
    let mut out = Vec::with_capacity(vectors.len() * 2);
    for (i, mv) in vectors.iter().enumerate() {
        let pred = predictor(&vectors[..i], i, cols);
        out.push(mv.dx - pred.dx);
        out.push(mv.dy - pred.dy);
    }
    out
}

fn predictor(done: &[MotionVector], i: usize, cols: usize) -> MotionVector {
    if !i.is_multiple_of(cols) {
        done[i - 1]
    } else if i >= cols {
        done[i - cols]
    } else {
        MotionVector::ZERO
    }
}

/// Entropy-codes a motion field. An empty field gives an empty payload.
pub fn encode_motion_field(field: &MotionField) -> Vec<u8> {
    if field.vectors.is_empty() {
        return Vec::new();
    }
    let (cols, _) = field.grid();
    let residuals = prediction_residuals(&field.vectors, cols);
    encode_signed_values(&residuals, |i| i % 2).to_framed()
}

/// Inverse of [`encode_motion_field`]. The block grid follows from the frame
/// dimensions and block size; vectors longer than `range` are rejected.
pub fn decode_motion_field(
    bytes: &[u8],
    width: usize,
    height: usize,
    block_size: usize,
    range: usize,
) -> Result<MotionField> {
    if block_size == 0 {
        return Err(arg("motion", "block size must be at least 1"));
    }
    let (cols, rows) = block_grid(width, height, block_size);
    let count = cols * rows;
    if count == 0 {
        if !bytes.is_empty() {
            return Err(Error::MalformedStream(
                "payload present for an empty motion field".into(),
            ));
        }
        return MotionField::from_vectors(width, height, block_size, range, Vec::new());
    }
    let (stream, used) = CodedStream::read_framed(bytes)?;
    if used != bytes.len() {
        return Err(Error::MalformedStream(format!(
            "{} trailing bytes after motion field",
            bytes.len() - used
        )));
    }
    let residuals = decode_signed_values(&stream, count * 2, |i| i % 2)?;
    let mut vectors: Vec<MotionVector> = Vec::with_capacity(count);
    let limit = i64::try_from(range).unwrap_or(i64::MAX);
    for (i, pair) in residuals.chunks_exact(2).enumerate() {
        let pred = predictor(&vectors, i, cols);
        let dx = i64::from(pred.dx) + i64::from(pair[0]);
        let dy = i64::from(pred.dy) + i64::from(pair[1]);
        if dx.abs() > limit || dy.abs() > limit {
            return Err(Error::MalformedStream(format!(
                "motion vector ({dx}, {dy}) of block {i} exceeds search range {range}"
            )));
        }
        vectors.push(MotionVector::new(dx as i32, dy as i32));
    }
    MotionField::from_vectors(width, height, block_size, range, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::SubbandKind::Lowpass;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frame_from(w: usize, h: usize, f: impl Fn(usize, usize) -> i32) -> CoefficientFrame {
        let samples = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        CoefficientFrame::new(w, h, samples, Lowpass).unwrap()
    }

    fn random_frame(rng: &mut ChaCha8Rng, w: usize, h: usize) -> CoefficientFrame {
        let samples = (0..w * h).map(|_| rng.gen_range(0..256)).collect();
        CoefficientFrame::new(w, h, samples, Lowpass).unwrap()
    }

    /// Independent exhaustive search: every candidate, plain clamped reads,
    /// explicit lexicographic key.
    fn oracle(
        reference: &CoefficientFrame,
        current: &CoefficientFrame,
        range: i32,
        bs: usize,
    ) -> Vec<(MotionVector, u64)> {
        let (w, h) = current.dims();
        let mut out = Vec::new();
        for by in (0..h).step_by(bs) {
            for bx in (0..w).step_by(bs) {
                let mut best: Option<((u64, u32, usize), MotionVector)> = None;
                let mut order = 0usize;
                for dy in -range..=range {
                    for dx in -range..=range {
                        let mut sad = 0u64;
                        for y in by..(by + bs).min(h) {
                            for x in bx..(bx + bs).min(w) {
                                let rx = (x as i32 + dx).clamp(0, w as i32 - 1) as usize;
                                let ry = (y as i32 + dy).clamp(0, h as i32 - 1) as usize;
                                sad += u64::from(current.get(x, y).abs_diff(reference.get(rx, ry)));
                            }
                        }
                        let key = (sad, dx.unsigned_abs() + dy.unsigned_abs(), order);
                        if best.is_none_or(|(k, _)| key < k) {
                            best = Some((key, MotionVector::new(dx, dy)));
                        }
                        order += 1;
                    }
                }
                let (key, mv) = best.unwrap();
                out.push((mv, key.0));
            }
        }
        out
    }

    #[test]
    fn search_range_doubles_then_caps() {
        let p = McParams::default();
        assert_eq!(search_range_for_level(1, &p).unwrap(), 8);
        assert_eq!(search_range_for_level(2, &p).unwrap(), 16);
        assert_eq!(search_range_for_level(4, &p).unwrap(), 64);
        assert_eq!(search_range_for_level(5, &p).unwrap(), 64);
        assert_eq!(search_range_for_level(200, &p).unwrap(), 64);
        let tight = McParams::new(8, 8, 8).unwrap();
        for level in 1..10 {
            assert_eq!(search_range_for_level(level, &tight).unwrap(), 8);
        }
        assert!(search_range_for_level(0, &p).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(McParams::new(0, 8, 64).is_err());
        assert!(McParams::new(8, 0, 64).is_err());
        assert!(McParams::new(8, 65, 64).is_err());
        assert!(McParams::new(3, 64, 64).is_ok());
    }

    #[test]
    fn identical_frames_give_zero_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_frame(&mut rng, 24, 20);
        let field = estimate_block_motion(&f, &f, 4, &McParams::default()).unwrap();
        assert!(field.is_zero());
    }

    #[test]
    fn recovers_constructed_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let reference = random_frame(&mut rng, 48, 48);
        // current(x, y) = reference(x + 3, y + 2)
        let current = frame_from(48, 48, |x, y| {
            reference.get((x + 3).min(47), (y + 2).min(47))
        });
        let params = McParams::default();
        let field = estimate_block_motion(&reference, &current, 4, &params).unwrap();
        let (cols, rows) = field.grid();
        for row in 0..rows - 1 {
            for col in 0..cols - 1 {
                assert_eq!(
                    field.vector(col, row),
                    MotionVector::new(3, 2),
                    "block {col},{row}"
                );
            }
        }
        let predicted = warp_predict(&reference, &field).unwrap();
        for y in 0..40 {
            for x in 0..40 {
                assert_eq!(predicted.get(x, y), current.get(x, y));
            }
        }
    }

    #[test]
    fn matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = McParams::default();
        for _ in 0..20 {
            let reference = random_frame(&mut rng, 32, 32);
            let current = random_frame(&mut rng, 32, 32);
            let field = estimate_block_motion(&reference, &current, 4, &params).unwrap();
            let expected = oracle(&reference, &current, 4, 8);
            let got: Vec<_> = field.vectors().to_vec();
            assert_eq!(got, expected.iter().map(|e| e.0).collect::<Vec<_>>());
        }
    }

    #[test]
    fn oracle_agrees_on_edge_heavy_small_frames() {
        // Tiny frames with low-entropy content produce many SAD ties and many
        // fully clamped candidates.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..40 {
            let w = rng.gen_range(1..20);
            let h = rng.gen_range(1..20);
            let bs = rng.gen_range(1..9);
            let range = rng.gen_range(1..9);
            let mk = |rng: &mut ChaCha8Rng| {
                let s = (0..w * h).map(|_| rng.gen_range(0..3)).collect();
                CoefficientFrame::new(w, h, s, Lowpass).unwrap()
            };
            let reference = mk(&mut rng);
            let current = mk(&mut rng);
            let params = McParams::new(bs, range, range).unwrap();
            let field = estimate_block_motion(&reference, &current, range, &params).unwrap();
            let expected: Vec<_> = oracle(&reference, &current, range as i32, bs)
                .into_iter()
                .map(|e| e.0)
                .collect();
            assert_eq!(
                field.vectors(),
                &expected[..],
                "{w}x{h} bs {bs} range {range}"
            );
        }
    }

    #[test]
    fn predict_with_zero_field_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_frame(&mut rng, 19, 13);
        let field = MotionField::zero(19, 13, 8);
        assert_eq!(warp_predict(&f, &field).unwrap().samples, f.samples);
    }

    #[test]
    fn predict_clamps_at_right_edge() {
        let reference = frame_from(4, 3, |x, y| (10 * y + x) as i32);
        let field = MotionField::from_vectors(4, 3, 8, 1, vec![MotionVector::new(1, 0)]).unwrap();
        let out = warp_predict(&reference, &field).unwrap();
        for y in 0..3 {
            for x in 0..4 {
                assert_eq!(out.get(x, y), reference.get((x + 1).min(3), y));
            }
        }
    }

    #[test]
    fn update_with_zero_field_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = random_frame(&mut rng, 17, 9);
        let field = MotionField::zero(17, 9, 4);
        assert_eq!(warp_update(&f, &field).unwrap().samples, f.samples);
    }

    #[test]
    fn update_of_zero_hp_is_zero() {
        let hp = CoefficientFrame::zeros(16, 16, SubbandKind::Highpass);
        let vectors = vec![
            MotionVector::new(3, -2),
            MotionVector::new(-5, 1),
            MotionVector::new(0, 7),
            MotionVector::new(2, 2),
        ];
        let field = MotionField::from_vectors(16, 16, 8, 8, vectors).unwrap();
        assert!(warp_update(&hp, &field).unwrap().is_zero());
    }

    #[test]
    fn update_overlap_keeps_later_block() {
        // Two 2x2 blocks in a 4x2 frame; the right block moves left by 1 and
        // overlaps column 1 of the left block's (unmoved) target.
        let hp = CoefficientFrame::new(4, 2, vec![1, 2, 5, 6, 3, 4, 7, 8], SubbandKind::Highpass)
            .unwrap();
        let field = MotionField::from_vectors(
            4,
            2,
            2,
            1,
            vec![MotionVector::ZERO, MotionVector::new(-1, 0)],
        )
        .unwrap();
        let out = warp_update(&hp, &field).unwrap();
        // Column 3 is a hole (zero); column 1 holds the right block's values.
        assert_eq!(out.samples, vec![1, 5, 6, 0, 3, 7, 8, 0]);
    }

    #[test]
    fn warps_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_frame(&mut rng, 32, 24);
        let vectors = (0..12)
            .map(|_| MotionVector::new(rng.gen_range(-9..10), rng.gen_range(-9..10)))
            .collect();
        let field = MotionField::from_vectors(32, 24, 8, 9, vectors).unwrap();
        assert_eq!(
            warp_predict(&f, &field).unwrap(),
            warp_predict(&f, &field).unwrap()
        );
        assert_eq!(
            warp_update(&f, &field).unwrap(),
            warp_update(&f, &field).unwrap()
        );
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = CoefficientFrame::zeros(8, 8, Lowpass);
        let b = CoefficientFrame::zeros(8, 9, Lowpass);
        assert!(estimate_block_motion(&a, &b, 2, &McParams::default()).is_err());
        assert!(warp_predict(&b, &MotionField::zero(8, 8, 8)).is_err());
    }

    #[test]
    fn zero_field_codes_below_a_byte_per_vector() {
        let field = MotionField::zero(64, 64, 8);
        let bytes = encode_motion_field(&field);
        assert!(bytes.len() < 64, "{} bytes", bytes.len());
        assert_eq!(
            decode_motion_field(&bytes, 64, 64, 8, 8).unwrap().vectors(),
            field.vectors()
        );
    }

    #[test]
    fn empty_field_has_empty_payload() {
        let field = MotionField::zero(0, 0, 8);
        assert!(encode_motion_field(&field).is_empty());
        assert!(decode_motion_field(&[], 0, 0, 8, 8)
            .unwrap()
            .vectors()
            .is_empty());
    }

    #[test]
    fn truncated_field_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let vectors = (0..16)
            .map(|_| MotionVector::new(rng.gen_range(-8..9), rng.gen_range(-8..9)))
            .collect();
        let field = MotionField::from_vectors(32, 32, 8, 8, vectors).unwrap();
        let bytes = encode_motion_field(&field);
        assert!(decode_motion_field(&bytes[..bytes.len() - 2], 32, 32, 8, 8).is_err());
        assert!(decode_motion_field(&bytes, 32, 32, 8, 2).is_err());
    }

    proptest! {
        #[test]
        fn random_fields_round_trip(
            w in 1usize..70, h in 1usize..70, bs in 1usize..12, range in 1i32..64, seed in any::<u64>()
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (cols, rows) = block_grid(w, h, bs);
            let vectors = (0..cols * rows)
                .map(|_| MotionVector::new(rng.gen_range(-range..=range), rng.gen_range(-range..=range)))
                .collect();
            let field = MotionField::from_vectors(w, h, bs, range as usize, vectors).unwrap();
            let bytes = encode_motion_field(&field);
            prop_assert_eq!(decode_motion_field(&bytes, w, h, bs, range as usize).unwrap(), field);
        }
    }
}
