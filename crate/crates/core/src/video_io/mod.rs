//! Uncompressed video containers and the luma/chroma frame model.
//!
//! Samples are held as `f64` from the moment they are read until they are
//! written back out; the only 8-bit quantization happens in the writers.
//! Chroma planes carry signed values (no +128 offset) so the color
//! conversion formulas in [`color`] apply to them unchanged.

pub mod color;
mod raw;
mod y4m;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use raw::{read_raw_yuv, write_raw_yuv, RawGeometry};
pub use y4m::{read_y4m, read_y4m_from, write_y4m, write_y4m_to};

/// A dense row-major plane of real-valued samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "plane {width}x{height} needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    #[inline]
    pub fn row_mut(&mut self, y: usize) -> &mut [f64] {
        &mut self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Copies the `size`×`size` square with top-left corner `(x, y)` in row-major order.
    pub fn block(&self, x: usize, y: usize, size: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(size * size);
        for row in y..y + size {
            out.extend_from_slice(&self.row(row)[x..x + size]);
        }
        out
    }

    /// Writes a row-major `size`×`size` square back at `(x, y)`.
    pub fn put_block(&mut self, x: usize, y: usize, size: usize, values: &[f64]) {
        debug_assert_eq!(values.len(), size * size);
        for (r, chunk) in values.chunks_exact(size).enumerate() {
            self.row_mut(y + r)[x..x + size].copy_from_slice(chunk);
        }
    }
}

/// Chroma subsampling of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChromaLayout {
    #[serde(rename = "420")]
    C420,
    #[serde(rename = "422")]
    C422,
    #[serde(rename = "444")]
    C444,
}

impl ChromaLayout {
    /// Chroma plane dimensions for a luma plane of `width`×`height`.
    pub fn chroma_size(self, width: usize, height: usize) -> (usize, usize) {
        match self {
            ChromaLayout::C420 => (width.div_ceil(2), height.div_ceil(2)),
            ChromaLayout::C422 => (width.div_ceil(2), height),
            ChromaLayout::C444 => (width, height),
        }
    }

    /// Bytes in one 8-bit frame payload (Y, then Cb, then Cr).
    pub fn frame_bytes(self, width: usize, height: usize) -> usize {
        let (cw, ch) = self.chroma_size(width, height);
        width * height + 2 * cw * ch
    }

    /// Default Y4M colorspace token for the layout.
    pub fn y4m_tag(self) -> &'static str {
        match self {
            ChromaLayout::C420 => "C420jpeg",
            ChromaLayout::C422 => "C422",
            ChromaLayout::C444 => "C444",
        }
    }
}

impl fmt::Display for ChromaLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChromaLayout::C420 => "420",
            ChromaLayout::C422 => "422",
            ChromaLayout::C444 => "444",
        })
    }
}

impl FromStr for ChromaLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "420" => Ok(ChromaLayout::C420),
            "422" => Ok(ChromaLayout::C422),
            "444" => Ok(ChromaLayout::C444),
            other => Err(Error::Config(format!(
                "unknown chroma format `{other}` (expected 420, 422 or 444)"
            ))),
        }
    }
}

/// Frames per second as a ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl FrameRate {
    pub const fn new(num: u32, den: u32) -> Self {
        FrameRate { num, den }
    }
}

impl Default for FrameRate {
    fn default() -> Self {
        FrameRate::new(25, 1)
    }
}

impl fmt::Display for FrameRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.num, self.den)
    }
}

impl FromStr for FrameRate {
    type Err = Error;

    /// Accepts `N/D`, `N:D` or a bare integer.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid frame rate `{s}` (expected N/D)"));
        let (num, den) = match s.split_once(['/', ':']) {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num: u32 = num.trim().parse().map_err(|_| bad())?;
        let den: u32 = den.trim().parse().map_err(|_| bad())?;
        if num == 0 || den == 0 {
            return Err(bad());
        }
        Ok(FrameRate { num, den })
    }
}

/// One picture: a full-resolution luma plane plus pass-through chroma.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: usize,
    pub luma: Plane,
    pub cb: Plane,
    pub cr: Plane,
    pub layout: ChromaLayout,
}

impl Frame {
    /// Builds a frame around `luma` with neutral (zero) chroma.
    pub fn from_luma(index: usize, luma: Plane, layout: ChromaLayout) -> Self {
        let (cw, ch) = layout.chroma_size(luma.width(), luma.height());
        Frame {
            index,
            luma,
            cb: Plane::new(cw, ch),
            cr: Plane::new(cw, ch),
            layout,
        }
    }

    pub fn new(
        index: usize,
        luma: Plane,
        cb: Plane,
        cr: Plane,
        layout: ChromaLayout,
    ) -> Result<Self> {
        let expected = layout.chroma_size(luma.width(), luma.height());
        for (name, plane) in [("Cb", &cb), ("Cr", &cr)] {
            if (plane.width(), plane.height()) != expected {
                return Err(Error::Shape(format!(
                    "{name} plane is {}x{}, {layout} layout needs {}x{}",
                    plane.width(),
                    plane.height(),
                    expected.0,
                    expected.1
                )));
            }
        }
        Ok(Frame {
            index,
            luma,
            cb,
            cr,
            layout,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.luma.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.luma.height()
    }

    /// Returns a copy of this frame with its luma plane replaced.
    pub fn with_luma(&self, luma: Plane) -> Frame {
        debug_assert_eq!((luma.width(), luma.height()), (self.width(), self.height()));
        Frame {
            index: self.index,
            luma,
            cb: self.cb.clone(),
            cr: self.cr.clone(),
            layout: self.layout,
        }
    }
}

/// An ordered run of frames sharing geometry and chroma layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Frame>,
    pub frame_rate: FrameRate,
    pub source_id: String,
    /// Y4M header tokens other than `W`, `H` and `F`, kept verbatim so a
    /// read/write cycle reproduces the original header.
    pub header_tags: Vec<String>,
}

impl FrameSequence {
    /// Wraps frames, renumbering nothing; use [`FrameSequence::validate`] to check invariants.
    pub fn new(frames: Vec<Frame>, frame_rate: FrameRate, source_id: impl Into<String>) -> Self {
        FrameSequence {
            frames,
            frame_rate,
            source_id: source_id.into(),
            header_tags: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// `(width, height, layout)` of the first frame.
    pub fn geometry(&self) -> Option<(usize, usize, ChromaLayout)> {
        self.frames
            .first()
            .map(|f| (f.width(), f.height(), f.layout))
    }

    /// Looks a frame up by its original `index`, not its position.
    pub fn frame_by_index(&self, index: usize) -> Option<&Frame> {
        match self.frames.get(index) {
            Some(f) if f.index == index => Some(f),
            _ => self.frames.iter().find(|f| f.index == index),
        }
    }

    /// Checks shared geometry and strictly increasing frame indices.
    pub fn validate(&self) -> Result<()> {
        let Some((w, h, layout)) = self.geometry() else {
            return Ok(());
        };
        for pair in self.frames.windows(2) {
            if pair[1].index <= pair[0].index {
                return Err(Error::Shape(format!(
                    "frame indices must increase: {} follows {}",
                    pair[1].index, pair[0].index
                )));
            }
        }
        for f in &self.frames {
            if (f.width(), f.height(), f.layout) != (w, h, layout) {
                return Err(Error::Shape(format!(
                    "frame {} is {}x{} {}, sequence is {w}x{h} {layout}",
                    f.index,
                    f.width(),
                    f.height(),
                    f.layout
                )));
            }
        }
        Ok(())
    }
}

/// Clamps to [0, 255] and rounds half-up.
#[inline]
pub fn quantize_sample(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}
