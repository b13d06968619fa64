//! Additive embedding `I_w = I + α·W` and its non-blind inverse
//! `W* = (I_w* − I) / α`, either on luma samples directly or on the HL2 and
//! LH2 coefficients of each selected 8×8 block.

use std::collections::HashSet;

use super::gaussian::{WatermarkPattern, WatermarkShape};
use super::manifest::{BlockPos, Domain, EmbedManifest};
use crate::error::{Error, Result};
use crate::video_io::{Frame, Plane};
use crate::wavelet::{fwt2d_block, iwt2d_block, Subband};

pub const FREQUENCY_BLOCK_SIZE: usize = 8;
pub const FREQUENCY_LEVELS: usize = 2;
/// Four HL2 plus four LH2 coefficients per 8×8 block.
pub const SAMPLES_PER_FREQUENCY_BLOCK: usize = 8;
const FREQUENCY_BANDS: [Subband; 2] = [Subband::HL2, Subband::LH2];

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "alpha must be positive and finite, got {alpha}"
        )))
    }
}

fn check_blocks(plane: &Plane, blocks: &[BlockPos], m: usize) -> Result<()> {
    let mut seen = HashSet::with_capacity(blocks.len());
    for b in blocks {
        if (b.grid_j + 1) * m > plane.width() || (b.grid_i + 1) * m > plane.height() {
            return Err(Error::Shape(format!(
                "block ({}, {}) of size {m} lies outside the {}x{} frame",
                b.grid_i,
                b.grid_j,
                plane.width(),
                plane.height()
            )));
        }
        if !seen.insert(*b) {
            return Err(Error::Config(format!(
                "block ({}, {}) selected twice",
                b.grid_i, b.grid_j
            )));
        }
    }
    Ok(())
}

/// Number of m×m tiles per tile row, after checking the pattern tiles evenly.
fn tiles_across(shape: WatermarkShape, m: usize, blocks: usize) -> Result<usize> {
    if m == 0 || !shape.rows.is_multiple_of(m) || !shape.cols.is_multiple_of(m) {
        return Err(Error::Capacity(format!(
            "a {}x{} watermark does not tile into {m}x{m} blocks",
            shape.rows, shape.cols
        )));
    }
    let needed = shape.len() / (m * m);
    if blocks != needed {
        return Err(Error::Capacity(format!(
            "spatial embedding needs {needed} blocks, got {blocks}"
        )));
    }
    Ok(shape.cols / m)
}

fn check_frequency(shape: WatermarkShape, m: usize, blocks: usize) -> Result<()> {
    if m != FREQUENCY_BLOCK_SIZE {
        return Err(Error::Config(format!(
            "frequency embedding uses {FREQUENCY_BLOCK_SIZE}x{FREQUENCY_BLOCK_SIZE} blocks, got {m}"
        )));
    }
    if !shape.len().is_multiple_of(SAMPLES_PER_FREQUENCY_BLOCK)
        || blocks != shape.len() / SAMPLES_PER_FREQUENCY_BLOCK
    {
        return Err(Error::Capacity(format!(
            "frequency embedding of {} samples needs {} blocks, got {blocks}",
            shape.len(),
            shape.len().div_ceil(SAMPLES_PER_FREQUENCY_BLOCK)
        )));
    }
    Ok(())
}

/// Adds tile `k` of the watermark, scaled by `alpha`, to the luma of `blocks[k]`.
pub fn embed_spatial(
    frame: &Frame,
    wm: &WatermarkPattern,
    blocks: &[BlockPos],
    block_size: usize,
    alpha: f64,
) -> Result<Frame> {
    check_alpha(alpha)?;
    let across = tiles_across(wm.shape, block_size, blocks.len())?;
    check_blocks(&frame.luma, blocks, block_size)?;
    let m = block_size;
    let mut luma = frame.luma.clone();
    for (k, b) in blocks.iter().enumerate() {
        let (tr, tc) = (k / across, k % across);
        for r in 0..m {
            let row = &mut luma.row_mut(b.grid_i * m + r)[b.grid_j * m..(b.grid_j + 1) * m];
            for (c, v) in row.iter_mut().enumerate() {
                *v += alpha * wm.get(tr * m + r, tc * m + c);
            }
        }
    }
    Ok(frame.with_luma(luma))
}

/// `(suspect − original) / alpha` over each block, reassembled in tile order.
pub fn extract_spatial_blocks(
    original: &Frame,
    suspect: &Frame,
    blocks: &[BlockPos],
    block_size: usize,
    alpha: f64,
    shape: WatermarkShape,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_geometry(original, suspect)?;
    let across = tiles_across(shape, block_size, blocks.len())?;
    check_blocks(&original.luma, blocks, block_size)?;
    let m = block_size;
    let mut out = vec![0.0; shape.len()];
    for (k, b) in blocks.iter().enumerate() {
        let (tr, tc) = (k / across, k % across);
        for r in 0..m {
            let y = b.grid_i * m + r;
            let xs = b.grid_j * m..(b.grid_j + 1) * m;
            let orig = &original.luma.row(y)[xs.clone()];
            let sus = &suspect.luma.row(y)[xs];
            let dst = &mut out[(tr * m + r) * shape.cols + tc * m..][..m];
            for ((d, s), o) in dst.iter_mut().zip(sus).zip(orig) {
                *d = (s - o) / alpha;
            }
        }
    }
    Ok(out)
}

/// Adds `alpha` times the next eight watermark samples to HL2 then LH2 of
/// each selected block and writes the reconstructed block back.
pub fn embed_frequency(
    frame: &Frame,
    wm: &WatermarkPattern,
    blocks: &[BlockPos],
    block_size: usize,
    alpha: f64,
) -> Result<Frame> {
    check_alpha(alpha)?;
    check_frequency(wm.shape, block_size, blocks.len())?;
    check_blocks(&frame.luma, blocks, block_size)?;
    let m = block_size;
    let mut luma = frame.luma.clone();
    let mut chunks = wm.samples.chunks_exact(SAMPLES_PER_FREQUENCY_BLOCK);
    for b in blocks {
        let chunk = chunks.next().expect("capacity checked");
        let (x, y) = (b.grid_j * m, b.grid_i * m);
        let mut pyramid = fwt2d_block(&luma.block(x, y, m), m, FREQUENCY_LEVELS)?;
        let mut samples = chunk.iter();
        for band in FREQUENCY_BANDS {
            pyramid
                .band_mut(band)?
                .for_each_mut(|_, c| *c += alpha * samples.next().expect("8 samples per block"));
        }
        luma.put_block(x, y, m, &iwt2d_block(&pyramid));
    }
    Ok(frame.with_luma(luma))
}

/// Coefficient-domain extraction: HL2 then LH2 differences over `alpha`, block by block.
pub fn extract_frequency_blocks(
    original: &Frame,
    suspect: &Frame,
    blocks: &[BlockPos],
    block_size: usize,
    alpha: f64,
    shape: WatermarkShape,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_geometry(original, suspect)?;
    check_frequency(shape, block_size, blocks.len())?;
    check_blocks(&original.luma, blocks, block_size)?;
    let m = block_size;
    let mut out = Vec::with_capacity(shape.len());
    for b in blocks {
        let (x, y) = (b.grid_j * m, b.grid_i * m);
        let po = fwt2d_block(&original.luma.block(x, y, m), m, FREQUENCY_LEVELS)?;
        let ps = fwt2d_block(&suspect.luma.block(x, y, m), m, FREQUENCY_LEVELS)?;
        for band in FREQUENCY_BANDS {
            let (o, s) = (po.band(band)?, ps.band(band)?);
            out.extend(s.iter().zip(&o).map(|(s, o)| (s - o) / alpha));
        }
    }
    Ok(out)
}

fn check_geometry(original: &Frame, suspect: &Frame) -> Result<()> {
    if (original.width(), original.height()) != (suspect.width(), suspect.height()) {
        return Err(Error::Shape(format!(
            "original is {}x{} but suspect is {}x{}",
            original.width(),
            original.height(),
            suspect.width(),
            suspect.height()
        )));
    }
    Ok(())
}

fn manifest_blocks<'a>(
    manifest: &'a EmbedManifest,
    original: &Frame,
    want: Domain,
) -> Result<&'a [BlockPos]> {
    if manifest.domain != want {
        return Err(Error::Config(format!(
            "manifest is for the {} domain, not {want}",
            manifest.domain
        )));
    }
    manifest
        .entry(original.index)
        .map(|e| e.blocks.as_slice())
        .ok_or_else(|| Error::Integrity(format!("frame {} is not in the manifest", original.index)))
}

pub fn extract_spatial(
    original: &Frame,
    suspect: &Frame,
    manifest: &EmbedManifest,
) -> Result<Vec<f64>> {
    let blocks = manifest_blocks(manifest, original, Domain::Spatial)?;
    extract_spatial_blocks(
        original,
        suspect,
        blocks,
        manifest.block_size,
        manifest.alpha,
        manifest.shape(),
    )
}

pub fn extract_frequency(
    original: &Frame,
    suspect: &Frame,
    manifest: &EmbedManifest,
) -> Result<Vec<f64>> {
    let blocks = manifest_blocks(manifest, original, Domain::Frequency)?;
    extract_frequency_blocks(
        original,
        suspect,
        blocks,
        manifest.block_size,
        manifest.alpha,
        manifest.shape(),
    )
}

/// Dispatches on the manifest's domain.
pub fn extract(original: &Frame, suspect: &Frame, manifest: &EmbedManifest) -> Result<Vec<f64>> {
    match manifest.domain {
        Domain::Spatial => extract_spatial(original, suspect, manifest),
        Domain::Frequency => extract_frequency(original, suspect, manifest),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video_io::ChromaLayout;
    use crate::watermark::{
        generate_watermark, similarity, FrameEntry, MANIFEST_VERSION, XOSHIRO_GENERATOR,
    };

    fn host(w: usize, h: usize) -> Frame {
        Frame::from_luma(
            1,
            Plane::from_fn(w, h, |x, y| ((x * 37 + y * 91) % 200) as f64 + 20.0),
            ChromaLayout::C420,
        )
    }

    fn grid(n: usize, cols: usize) -> Vec<BlockPos> {
        (0..n).map(|k| BlockPos::new(k / cols, k % cols)).collect()
    }

    fn manifest(domain: Domain, side: usize, blocks: Vec<BlockPos>) -> EmbedManifest {
        EmbedManifest {
            version: MANIFEST_VERSION,
            generator_id: XOSHIRO_GENERATOR.into(),
            seed: 3,
            domain,
            alpha: 0.1,
            block_size: 8,
            wm_side: side,
            wm_rows: None,
            threshold: 4.0,
            range: 7,
            frames: vec![FrameEntry { index: 1, blocks }],
            skipped: vec![],
        }
    }

    #[test]
    fn spatial_arithmetic() {
        let f = Frame::from_luma(0, Plane::filled(8, 8, 100.0), ChromaLayout::C444);
        let wm = WatermarkPattern {
            shape: WatermarkShape::square(8),
            samples: vec![2.0; 64],
            seed: 0,
            generator_id: XOSHIRO_GENERATOR.into(),
        };
        let out = embed_spatial(&f, &wm, &[BlockPos::new(0, 0)], 8, 0.1).unwrap();
        assert!(out.luma.data().iter().all(|&v| (v - 100.2).abs() < 1e-12));
        let zero = WatermarkPattern {
            samples: vec![0.0; 64],
            ..wm
        };
        assert_eq!(
            embed_spatial(&f, &zero, &[BlockPos::new(0, 0)], 8, 0.1).unwrap(),
            f
        );
    }

    #[test]
    fn spatial_tile_placement() {
        // tile k of a 16x16 pattern goes to blocks[k]; tile 1 is the top-right tile
        let f = Frame::from_luma(1, Plane::new(32, 32), ChromaLayout::C420);
        let wm = generate_watermark(8, WatermarkShape::square(16), XOSHIRO_GENERATOR).unwrap();
        let blocks = [
            BlockPos::new(3, 3),
            BlockPos::new(0, 2),
            BlockPos::new(1, 0),
            BlockPos::new(2, 1),
        ];
        let out = embed_spatial(&f, &wm, &blocks, 8, 1.0).unwrap();
        assert_eq!(out.luma.get(16 + 5, 2), wm.get(2, 8 + 5));
        assert_eq!(out.luma.get(24, 24), wm.get(0, 0));
        assert_eq!(out.luma.get(8 + 7, 16 + 7), wm.get(15, 15));
    }

    #[test]
    fn spatial_roundtrip_and_locality() {
        let f = host(64, 64);
        let wm = generate_watermark(3, WatermarkShape::square(32), XOSHIRO_GENERATOR).unwrap();
        let blocks = grid(16, 8);
        let out = embed_spatial(&f, &wm, &blocks, 8, 0.1).unwrap();
        // rows 2.. of the block grid are untouched
        assert_eq!(out.luma.row(20), f.luma.row(20));
        assert_eq!(out.cb, f.cb);
        let m = manifest(Domain::Spatial, 32, blocks);
        let w_star = extract_spatial(&f, &out, &m).unwrap();
        assert!(w_star
            .iter()
            .zip(&wm.samples)
            .all(|(a, b)| (a - b).abs() < 1e-9));
        assert!(extract_spatial(&f, &f, &m)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn frequency_roundtrip_and_capacity() {
        let f = host(128, 64);
        let wm = generate_watermark(3, WatermarkShape::square(32), XOSHIRO_GENERATOR).unwrap();
        let blocks = grid(128, 16);
        let out = embed_frequency(&f, &wm, &blocks, 8, 0.1).unwrap();
        let m = manifest(Domain::Frequency, 32, blocks.clone());
        let w_star = extract_frequency(&f, &out, &m).unwrap();
        assert!(w_star
            .iter()
            .zip(&wm.samples)
            .all(|(a, b)| (a - b).abs() < 1e-6));
        assert!(similarity(&w_star, &wm.samples).unwrap() >= 0.999999);
        assert!(extract_frequency(&f, &f, &m)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));

        assert!(matches!(
            embed_frequency(&f, &wm, &blocks[..127], 8, 0.1),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            embed_frequency(&f, &wm, &blocks, 4, 0.1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn frequency_zero_watermark_is_transparent() {
        let f = host(64, 32);
        let wm = WatermarkPattern {
            shape: WatermarkShape { rows: 8, cols: 32 },
            samples: vec![0.0; 256],
            seed: 0,
            generator_id: XOSHIRO_GENERATOR.into(),
        };
        let out = embed_frequency(&f, &wm, &grid(32, 8), 8, 0.1).unwrap();
        assert!(out
            .luma
            .data()
            .iter()
            .zip(f.luma.data())
            .all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn argument_errors() {
        let f = host(64, 64);
        let wm = generate_watermark(3, WatermarkShape::square(32), XOSHIRO_GENERATOR).unwrap();
        assert!(matches!(
            embed_spatial(&f, &wm, &grid(15, 8), 8, 0.1),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            embed_spatial(&f, &wm, &grid(16, 8), 8, 0.0),
            Err(Error::Config(_))
        ));
        let mut dup = grid(16, 8);
        dup[15] = dup[0];
        assert!(matches!(
            embed_spatial(&f, &wm, &dup, 8, 0.1),
            Err(Error::Config(_))
        ));
        let mut outside = grid(16, 8);
        outside[0] = BlockPos::new(9, 0);
        assert!(matches!(
            embed_spatial(&f, &wm, &outside, 8, 0.1),
            Err(Error::Shape(_))
        ));

        let m = manifest(Domain::Spatial, 32, grid(16, 8));
        let small = host(32, 32);
        assert!(matches!(
            extract_spatial(&f, &small, &m),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            extract_frequency(&f, &f, &m),
            Err(Error::Config(_))
        ));
        let mut neg = m.clone();
        neg.alpha = -1.0;
        assert!(matches!(
            extract_spatial(&f, &f, &neg),
            Err(Error::Config(_))
        ));
        let mut other = f.clone();
        other.index = 5;
        assert!(matches!(
            extract_spatial(&other, &other, &m),
            Err(Error::Integrity(_))
        ));
    }
}
