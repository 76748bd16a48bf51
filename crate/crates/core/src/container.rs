//! Layered bitstream container.
//!
//! ```text
//! header   "CAWL" | u8 version | u32 width | u32 height | u32 frame_count
//!          | u32 gop_size | u8 i_max | u32 lambda*1000 | u8 mc_mode
//!          | u32 block_size | u32 search_init | u32 search_max
//!          | u32 trailing_frame_count | u8 kept_levels
//! gop*     u32 section_len, then
//!            depth vector      framed entropy stream
//!            motion            levels i_max down to i_max-kept+1, one
//!                              u32-length-prefixed field per decomposed pair
//!                              (block MC only)
//!            BL                u32-prefixed frame payloads in position order
//!            EL_k              k = i_max down to i_max-kept+1, u32-prefixed
//!                              HP payloads in position order
//! trailing u32 section_len, then u32-prefixed intra frame payloads
//! ```
//!
//! All integers are little-endian. `kept_levels < i_max` marks a stream with
//! its finest enhancement layers removed.

use crate::adaptive::{DepthVector, FrameRole};
use crate::entropy::{decode_depth_vector, encode_depth_vector, CodedStream};
use crate::error::{arg, consistency, Error, Result};
use crate::lifting::McMode;
use crate::motion::McParams;

pub const MAGIC: [u8; 4] = *b"CAWL";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 44;
/// Largest supported number of temporal levels.
pub const MAX_LEVELS: u8 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamHeader {
    pub width: u32,
    pub height: u32,
    pub frame_count: u32,
    pub i_max: u8,
    pub lambda_milli: u32,
    pub mc_mode: McMode,
    pub mc_params: McParams,
    pub trailing_frame_count: u32,
    /// Enhancement layers present, counted from the deepest.
    pub kept_levels: u8,
}

impl StreamHeader {
    pub fn gop_size(&self) -> usize {
        1 << self.i_max
    }

    pub fn full_gops(&self) -> usize {
        (self.frame_count - self.trailing_frame_count) as usize / self.gop_size()
    }

    pub fn pixels(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Lowest level a decoder can synthesize down to.
    pub fn floor_level(&self) -> u8 {
        self.i_max - self.kept_levels
    }

    /// Levels whose enhancement layers are present, deepest first.
    pub fn present_levels(&self) -> impl Iterator<Item = u8> {
        ((self.floor_level() + 1)..=self.i_max).rev()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedContainer(msg));
        if self.width == 0 || self.height == 0 {
            return bad(format!(
                "zero frame dimensions {}x{}",
                self.width, self.height
            ));
        }
        if self.i_max == 0 || self.i_max > MAX_LEVELS {
            return bad(format!("i_max {} outside 1..={MAX_LEVELS}", self.i_max));
        }
        if self.kept_levels > self.i_max {
            return bad(format!(
                "kept levels {} exceed i_max {}",
                self.kept_levels, self.i_max
            ));
        }
        if self.frame_count == 0 {
            return bad("frame count is zero".into());
        }
        let gop = self.gop_size() as u32;
        if self.trailing_frame_count >= gop
            || self.trailing_frame_count > self.frame_count
            || !(self.frame_count - self.trailing_frame_count).is_multiple_of(gop)
        {
            return bad(format!(
                "{} frames do not split into GOPs of {gop} plus {} trailing frames",
                self.frame_count, self.trailing_frame_count
            ));
        }
        if let Err(e) = self.mc_params.validate() {
            return bad(format!("invalid motion parameters: {e}"));
        }
        Ok(())
    }

    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        for v in [
            self.width,
            self.height,
            self.frame_count,
            self.gop_size() as u32,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(self.i_max);
        out.extend_from_slice(&self.lambda_milli.to_le_bytes());
        out.push(match self.mc_mode {
            McMode::None => 0,
            McMode::Block => 1,
        });
        for v in [
            self.mc_params.block_size,
            self.mc_params.initial_search_range,
            self.mc_params.max_search_range,
        ] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.trailing_frame_count.to_le_bytes());
        out.push(self.kept_levels);
    }

    fn read(r: &mut Reader<'_>) -> Result<Self> {
        let magic: [u8; 4] = r.take(4, "magic")?.try_into().expect("4 bytes");
        if magic != MAGIC {
            return Err(Error::BadMagic(magic));
        }
        let version = r.u8("version")?;
        if version != VERSION {
            return Err(Error::Version {
                found: version,
                expected: VERSION,
            });
        }
        let width = r.u32("width")?;
        let height = r.u32("height")?;
        let frame_count = r.u32("frame count")?;
        let gop_size = r.u32("GOP size")?;
        let i_max = r.u8("i_max")?;
        let lambda_milli = r.u32("lambda")?;
        let mc_mode = match r.u8("mc mode")? {
            0 => McMode::None,
            1 => McMode::Block,
            m => return Err(Error::MalformedContainer(format!("unknown mc mode {m}"))),
        };
        let mc_params = McParams {
            block_size: r.u32("block size")? as usize,
            initial_search_range: r.u32("search range")? as usize,
            max_search_range: r.u32("max search range")? as usize,
        };
        let trailing_frame_count = r.u32("trailing frame count")?;
        let kept_levels = r.u8("kept levels")?;
        let header = Self {
            width,
            height,
            frame_count,
            i_max,
            lambda_milli,
            mc_mode,
            mc_params,
            trailing_frame_count,
            kept_levels,
        };
        header.validate()?;
        if gop_size as usize != header.gop_size() {
            return Err(Error::MalformedContainer(format!(
                "GOP size {gop_size} is not 2^{i_max}"
            )));
        }
        Ok(header)
    }
}

/// Coded payloads of one GOP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GopPayloads {
    pub depth: DepthVector,
    /// Motion field payloads per level, `motion[k - 1]` for level `k`, in
    /// pair position order. Empty for levels that are not present.
    pub motion: Vec<Vec<Vec<u8>>>,
    /// Base layer frame payloads in position order.
    pub base: Vec<Vec<u8>>,
    /// HP payloads per level, `enhancement[k - 1]` for level `k`.
    pub enhancement: Vec<Vec<Vec<u8>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredBitstream {
    pub header: StreamHeader,
    pub gops: Vec<GopPayloads>,
    /// Intra payloads of frames that do not fill a GOP.
    pub trailing: Vec<Vec<u8>>,
}

/// Counts of payloads implied by a depth vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GopShape {
    pub base: usize,
    /// HP frames (and motion fields) per level, index `k - 1`.
    pub per_level: Vec<usize>,
}

impl GopShape {
    pub fn of(depth: &DepthVector) -> Result<Self> {
        let roles = depth.parse()?;
        let mut per_level = vec![0; usize::from(depth.i_max())];
        let mut base = 0;
        for role in roles {
            match role {
                FrameRole::Highpass { level, .. } => per_level[usize::from(level) - 1] += 1,
                _ => base += 1,
            }
        }
        Ok(Self { base, per_level })
    }
}

fn push_prefixed(out: &mut Vec<u8>, payload: &[u8]) {
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(payload);
}

fn check_gop(header: &StreamHeader, g: usize, gop: &GopPayloads) -> Result<()> {
    let fail = |msg: String| Err(consistency("container", format!("GOP {g}: {msg}")));
    if gop.depth.len() != header.gop_size() || gop.depth.i_max() != header.i_max {
        return fail(format!(
            "depth vector of length {} / i_max {} does not match header",
            gop.depth.len(),
            gop.depth.i_max()
        ));
    }
    let shape = GopShape::of(&gop.depth)?;
    let levels = usize::from(header.i_max);
    if gop.base.len() != shape.base {
        return fail(format!(
            "{} base payloads, depth vector implies {}",
            gop.base.len(),
            shape.base
        ));
    }
    if gop.enhancement.len() != levels || gop.motion.len() != levels {
        return fail("layer tables must have one entry per level".into());
    }
    for level in 1..=header.i_max {
        let li = usize::from(level) - 1;
        let present = level > header.floor_level();
        let want = if present { shape.per_level[li] } else { 0 };
        if gop.enhancement[li].len() != want {
            return fail(format!(
                "EL{level} has {} payloads, expected {want}",
                gop.enhancement[li].len()
            ));
        }
        let want_mv = if header.mc_mode == McMode::Block {
            want
        } else {
            0
        };
        if gop.motion[li].len() != want_mv {
            return fail(format!(
                "level {level} has {} motion payloads, expected {want_mv}",
                gop.motion[li].len()
            ));
        }
    }
    Ok(())
}

/// Serializes a layered bitstream. Output bytes depend only on the input.
pub fn write_container(stream: &LayeredBitstream) -> Result<Vec<u8>> {
    let header = &stream.header;
    header
        .validate()
        .map_err(|e| consistency("container", format!("invalid header: {e}")))?;
    if stream.gops.len() != header.full_gops()
        || stream.trailing.len() != header.trailing_frame_count as usize
    {
        return Err(consistency(
            "container",
            format!(
                "{} GOPs and {} trailing frames do not match header ({} GOPs, {} trailing)",
                stream.gops.len(),
                stream.trailing.len(),
                header.full_gops(),
                header.trailing_frame_count
            ),
        ));
    }
    let mut out = Vec::new();
    header.write(&mut out);
    for (g, gop) in stream.gops.iter().enumerate() {
        check_gop(header, g, gop)?;
        let mut section = Vec::new();
        encode_depth_vector(&gop.depth).write_framed(&mut section);
        for level in header.present_levels() {
            for payload in &gop.motion[usize::from(level) - 1] {
                push_prefixed(&mut section, payload);
            }
        }
        for payload in &gop.base {
            push_prefixed(&mut section, payload);
        }
        for level in header.present_levels() {
            for payload in &gop.enhancement[usize::from(level) - 1] {
                push_prefixed(&mut section, payload);
            }
        }
        push_prefixed(&mut out, &section);
    }
    let mut section = Vec::new();
    for payload in &stream.trailing {
        push_prefixed(&mut section, payload);
    }
    push_prefixed(&mut out, &section);
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    base: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], base: usize) -> Self {
        Self { buf, pos: 0, base }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::MalformedContainer(format!(
                "truncated at byte {} while reading {what} ({n} bytes wanted, {} left)",
                self.base + self.pos,
                self.buf.len() - self.pos
            ))),
        }
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4, what)?.try_into().expect("4 bytes"),
        ))
    }

    fn prefixed(&mut self, what: &str) -> Result<&'a [u8]> {
        let len = self.u32(what)? as usize;
        self.take(len, what)
    }

    fn offset(&self) -> usize {
        self.base + self.pos
    }

    fn is_empty(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn read_gop(header: &StreamHeader, g: usize, r: &mut Reader<'_>) -> Result<GopPayloads> {
    let start = r.offset();
    let (v_stream, used) = CodedStream::read_framed(&r.buf[r.pos..]).map_err(|e| {
        Error::MalformedContainer(format!("GOP {g}: depth vector at byte {start}: {e}"))
    })?;
    r.pos += used;
    let depth = decode_depth_vector(&v_stream, header.gop_size(), header.i_max)
        .map_err(|e| Error::MalformedContainer(format!("GOP {g}: {e}")))?;
    let shape = GopShape::of(&depth)?;
    let levels = usize::from(header.i_max);
    let mut motion = vec![Vec::new(); levels];
    if header.mc_mode == McMode::Block {
        for level in header.present_levels() {
            let li = usize::from(level) - 1;
            for _ in 0..shape.per_level[li] {
                motion[li].push(r.prefixed("motion payload")?.to_vec());
            }
        }
    }
    let base = (0..shape.base)
        .map(|_| r.prefixed("base layer payload").map(<[u8]>::to_vec))
        .collect::<Result<Vec<_>>>()?;
    let mut enhancement = vec![Vec::new(); levels];
    for level in header.present_levels() {
        let li = usize::from(level) - 1;
        for _ in 0..shape.per_level[li] {
            enhancement[li].push(r.prefixed("enhancement payload")?.to_vec());
        }
    }
    if !r.is_empty() {
        return Err(Error::MalformedContainer(format!(
            "GOP {g}: {} unexpected bytes after the payloads its depth vector implies",
            r.buf.len() - r.pos
        )));
    }
    Ok(GopPayloads {
        depth,
        motion,
        base,
        enhancement,
    })
}

pub fn read_container(bytes: &[u8]) -> Result<LayeredBitstream> {
    let mut r = Reader::new(bytes, 0);
    let header = StreamHeader::read(&mut r)?;
    let mut gops = Vec::with_capacity(header.full_gops());
    for g in 0..header.full_gops() {
        let offset = r.offset() + 4;
        let section = r.prefixed("GOP section")?;
        gops.push(read_gop(&header, g, &mut Reader::new(section, offset))?);
    }
    let offset = r.offset() + 4;
    let section = r.prefixed("trailing section")?;
    let mut tr = Reader::new(section, offset);
    let trailing = (0..header.trailing_frame_count)
        .map(|_| tr.prefixed("trailing frame").map(<[u8]>::to_vec))
        .collect::<Result<Vec<_>>>()?;
    if !tr.is_empty() || !r.is_empty() {
        return Err(Error::MalformedContainer(format!(
            "unexpected bytes after the last section at byte {}",
            r.offset()
        )));
    }
    Ok(LayeredBitstream {
        header,
        gops,
        trailing,
    })
}

/// Keeps the base layer and the `keep_levels` deepest enhancement layers
/// (with their motion). Pure byte-level rewrite; no payload is re-coded.
pub fn extract_temporal_layers(bytes: &[u8], keep_levels: u8) -> Result<Vec<u8>> {
    let mut stream = read_container(bytes)?;
    let header = &mut stream.header;
    if keep_levels > header.i_max {
        return Err(arg(
            "container",
            format!("keep levels {keep_levels} outside 0..={}", header.i_max),
        ));
    }
    header.kept_levels = header.kept_levels.min(keep_levels);
    let floor = usize::from(header.floor_level());
    for gop in &mut stream.gops {
        for li in 0..floor {
            gop.enhancement[li].clear();
            gop.motion[li].clear();
        }
    }
    write_container(&stream)
}

/// Byte attribution of a container, section by section. Length prefixes are
/// counted with the payload they frame; GOP and trailing section prefixes
/// count as header.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SectionSizes {
    pub header: usize,
    pub depth_vectors: usize,
    pub motion: usize,
    pub base_layer: usize,
    /// Index `k - 1` for EL_k.
    pub enhancement: Vec<usize>,
}

impl SectionSizes {
    pub fn total(&self) -> usize {
        self.header
            + self.depth_vectors
            + self.motion
            + self.base_layer
            + self.enhancement.iter().sum::<usize>()
    }
}

pub fn section_sizes(stream: &LayeredBitstream) -> SectionSizes {
    let framed = |p: &Vec<u8>| 4 + p.len();
    let mut sizes = SectionSizes {
        header: HEADER_LEN + 4 * (stream.gops.len() + 1),
        enhancement: vec![0; usize::from(stream.header.i_max)],
        ..Default::default()
    };
    for gop in &stream.gops {
        sizes.depth_vectors += encode_depth_vector(&gop.depth).framed_len();
        sizes.motion += gop.motion.iter().flatten().map(framed).sum::<usize>();
        sizes.base_layer += gop.base.iter().map(framed).sum::<usize>();
        for (li, layer) in gop.enhancement.iter().enumerate() {
            sizes.enhancement[li] += layer.iter().map(framed).sum::<usize>();
        }
    }
    sizes.base_layer += stream.trailing.iter().map(framed).sum::<usize>();
    sizes
}
