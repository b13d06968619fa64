//! CDF 9/7 lifting wavelet and its 2-level Mallat decomposition of square blocks.
//!
//! The lifting ladder is two predict/update pairs followed by scaling, with
//! whole-sample symmetric extension at both ends. Approximation
//! coefficients have DC gain √2 and detail coefficients Nyquist gain √2,
//! which keeps the transform close to orthonormal.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const ALPHA: f64 = -1.586_134_342_059_924;
const BETA: f64 = -0.052_980_118_572_961;
const GAMMA: f64 = 0.882_911_075_530_934;
const DELTA: f64 = 0.443_506_852_043_971;
const ZETA: f64 = 1.149_604_398_860_241;

/// One lifting pass over `x` in place: every sample of the given parity
/// gets `coeff` times the sum of its two neighbors, mirrored at the ends.
#[inline]
fn lift(x: &mut [f64], first: usize, coeff: f64) {
    let n = x.len();
    let mut i = first;
    while i < n {
        let left = if i == 0 { x[1] } else { x[i - 1] };
        let right = if i + 1 < n { x[i + 1] } else { x[i - 1] };
        x[i] += coeff * (left + right);
        i += 2;
    }
}

fn check_even(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Shape(format!(
            "9/7 transform needs an even length of at least 2, got {n}"
        )));
    }
    Ok(())
}

/// In-place forward transform; afterwards `x` holds `[approx | detail]`.
fn forward_in_place(x: &mut [f64], scratch: &mut Vec<f64>) {
    lift(x, 1, ALPHA);
    lift(x, 0, BETA);
    lift(x, 1, GAMMA);
    lift(x, 0, DELTA);
    let half = x.len() / 2;
    scratch.clear();
    scratch.extend_from_slice(x);
    for k in 0..half {
        x[k] = scratch[2 * k] * ZETA;
        x[half + k] = scratch[2 * k + 1] / ZETA;
    }
}

/// In-place inverse of [`forward_in_place`].
fn inverse_in_place(x: &mut [f64], scratch: &mut Vec<f64>) {
    let half = x.len() / 2;
    scratch.clear();
    scratch.extend_from_slice(x);
    for k in 0..half {
        x[2 * k] = scratch[k] / ZETA;
        x[2 * k + 1] = scratch[half + k] * ZETA;
    }
    lift(x, 0, -DELTA);
    lift(x, 1, -GAMMA);
    lift(x, 0, -BETA);
    lift(x, 1, -ALPHA);
}

pub fn fwt97_1d(signal: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_even(signal.len())?;
    let mut x = signal.to_vec();
    forward_in_place(&mut x, &mut Vec::new());
    let detail = x.split_off(signal.len() / 2);
    Ok((x, detail))
}

pub fn iwt97_1d(approx: &[f64], detail: &[f64]) -> Result<Vec<f64>> {
    if approx.len() != detail.len() {
        return Err(Error::Shape(format!(
            "approximation has {} coefficients, detail has {}",
            approx.len(),
            detail.len()
        )));
    }
    let mut x = [approx, detail].concat();
    check_even(x.len())?;
    inverse_in_place(&mut x, &mut Vec::new());
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BandKind {
    LL,
    HL,
    LH,
    HH,
}

/// A subband of a Mallat pyramid; level 1 is the finest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subband {
    pub kind: BandKind,
    pub level: usize,
}

impl Subband {
    pub const LL2: Subband = Subband::new(BandKind::LL, 2);
    pub const HL2: Subband = Subband::new(BandKind::HL, 2);
    pub const LH2: Subband = Subband::new(BandKind::LH, 2);
    pub const HH2: Subband = Subband::new(BandKind::HH, 2);
    pub const HL1: Subband = Subband::new(BandKind::HL, 1);
    pub const LH1: Subband = Subband::new(BandKind::LH, 1);
    pub const HH1: Subband = Subband::new(BandKind::HH, 1);

    pub const fn new(kind: BandKind, level: usize) -> Self {
        Subband { kind, level }
    }

    /// All bands of a pyramid with `levels` levels, coarsest first.
    pub fn all(levels: usize) -> Vec<Subband> {
        let mut out = vec![Subband::new(BandKind::LL, levels)];
        for level in (1..=levels).rev() {
            for kind in [BandKind::HL, BandKind::LH, BandKind::HH] {
                out.push(Subband::new(kind, level));
            }
        }
        out
    }
}

impl fmt::Display for Subband {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.kind, self.level)
    }
}

impl FromStr for Subband {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("unknown subband `{s}`"));
        if s.len() < 3 || !s.is_ascii() {
            return Err(bad());
        }
        let (kind, level) = s.split_at(2);
        let kind = match kind {
            "LL" => BandKind::LL,
            "HL" => BandKind::HL,
            "LH" => BandKind::LH,
            "HH" => BandKind::HH,
            _ => return Err(bad()),
        };
        let level = level.parse().map_err(|_| bad())?;
        Ok(Subband { kind, level })
    }
}

/// Row/column rectangle inside a pyramid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub row: usize,
    pub col: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Region {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat indices into a `stride`-wide array, raster order.
    pub fn indices(&self, stride: usize) -> impl Iterator<Item = usize> + '_ {
        (self.row..self.row + self.rows)
            .flat_map(move |r| (self.col..self.col + self.cols).map(move |c| r * stride + c))
    }
}

/// Multi-level 2D decomposition of an `m`×`m` block in Mallat layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandPyramid {
    size: usize,
    levels: usize,
    coeffs: Vec<f64>,
}

impl SubbandPyramid {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Builds a pyramid from raw coefficients already in Mallat layout.
    pub fn from_coefficients(size: usize, levels: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_pyramid_shape(size, levels)?;
        if coeffs.len() != size * size {
            return Err(Error::Shape(format!(
                "{size}x{size} pyramid needs {} coefficients, got {}",
                size * size,
                coeffs.len()
            )));
        }
        Ok(SubbandPyramid {
            size,
            levels,
            coeffs,
        })
    }

    pub fn region(&self, band: Subband) -> Result<Region> {
        let Subband { kind, level } = band;
        if level == 0 || level > self.levels || (kind == BandKind::LL && level != self.levels) {
            return Err(Error::Domain(format!(
                "subband {band} does not exist in a {}-level pyramid",
                self.levels
            )));
        }
        let half = self.size >> level;
        let (row, col) = match kind {
            BandKind::LL => (0, 0),
            BandKind::HL => (0, half),
            BandKind::LH => (half, 0),
            BandKind::HH => (half, half),
        };
        Ok(Region {
            row,
            col,
            rows: half,
            cols: half,
        })
    }

    /// Copies a band's coefficients out in raster order.
    pub fn band(&self, band: Subband) -> Result<Vec<f64>> {
        let region = self.region(band)?;
        Ok(region.indices(self.size).map(|k| self.coeffs[k]).collect())
    }

    /// Mutable access to one band; writes land in the pyramid.
    pub fn band_mut(&mut self, band: Subband) -> Result<BandMut<'_>> {
        let region = self.region(band)?;
        Ok(BandMut {
            stride: self.size,
            region,
            coeffs: &mut self.coeffs,
        })
    }
}

/// Mutable window onto one subband of a [`SubbandPyramid`].
pub struct BandMut<'a> {
    stride: usize,
    region: Region,
    coeffs: &'a mut [f64],
}

impl BandMut<'_> {
    pub fn region(&self) -> Region {
        self.region
    }

    pub fn len(&self) -> usize {
        self.region.len()
    }

    pub fn is_empty(&self) -> bool {
        self.region.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.coeffs[self.offset(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let k = self.offset(row, col);
        self.coeffs[k] = value;
    }

    /// Visits the band in raster order.
    pub fn for_each_mut(&mut self, mut f: impl FnMut(usize, &mut f64)) {
        for (n, k) in self.region.indices(self.stride).enumerate() {
            f(n, &mut self.coeffs[k]);
        }
    }

    fn offset(&self, row: usize, col: usize) -> usize {
        assert!(row < self.region.rows && col < self.region.cols);
        (self.region.row + row) * self.stride + self.region.col + col
    }
}

fn check_pyramid_shape(size: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::Shape(
            "decomposition needs at least one level".into(),
        ));
    }
    let unit = 1usize.checked_shl(levels as u32).unwrap_or(0);
    if unit == 0 || size == 0 || !size.is_multiple_of(unit) || size / unit < 1 {
        return Err(Error::Shape(format!(
            "block size {size} is not divisible by 2^{levels}"
        )));
    }
    Ok(())
}

/// Rows then columns per level, recursing on the LL quadrant.
pub fn fwt2d_block(block: &[f64], size: usize, levels: usize) -> Result<SubbandPyramid> {
    check_pyramid_shape(size, levels)?;
    if block.len() != size * size {
        return Err(Error::Shape(format!(
            "expected {} samples for a {size}x{size} block, got {}",
            size * size,
            block.len()
        )));
    }
    let mut c = block.to_vec();
    let mut line = Vec::with_capacity(size);
    let mut scratch = Vec::with_capacity(size);
    let mut n = size;
    for _ in 0..levels {
        for r in 0..n {
            forward_in_place(&mut c[r * size..r * size + n], &mut scratch);
        }
        for col in 0..n {
            line.clear();
            line.extend((0..n).map(|r| c[r * size + col]));
            forward_in_place(&mut line, &mut scratch);
            for (r, v) in line.iter().enumerate() {
                c[r * size + col] = *v;
            }
        }
        n /= 2;
    }
    Ok(SubbandPyramid {
        size,
        levels,
        coeffs: c,
    })
}

pub fn iwt2d_block(pyramid: &SubbandPyramid) -> Vec<f64> {
    let size = pyramid.size;
    let mut c = pyramid.coeffs.clone();
    let mut line = Vec::with_capacity(size);
    let mut scratch = Vec::with_capacity(size);
    for level in (0..pyramid.levels).rev() {
        let n = size >> level;
        for col in 0..n {
            line.clear();
            line.extend((0..n).map(|r| c[r * size + col]));
            inverse_in_place(&mut line, &mut scratch);
            for (r, v) in line.iter().enumerate() {
                c[r * size + col] = *v;
            }
        }
        for r in 0..n {
            inverse_in_place(&mut c[r * size..r * size + n], &mut scratch);
        }
    }
    c
}
