use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::gaussian::{generate_watermark, WatermarkPattern, WatermarkShape};
use super::SAMPLES_PER_FREQUENCY_BLOCK;
use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Spatial,
    Frequency,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Spatial => "spatial",
            Domain::Frequency => "frequency",
        })
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spatial" => Ok(Domain::Spatial),
            "frequency" => Ok(Domain::Frequency),
            other => Err(Error::Config(format!(
                "unknown domain `{other}` (expected spatial or frequency)"
            ))),
        }
    }
}

/// Grid coordinates of a block; serialized as `[grid_i, grid_j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct BlockPos {
    pub grid_i: usize,
    pub grid_j: usize,
}

impl BlockPos {
    pub const fn new(grid_i: usize, grid_j: usize) -> Self {
        BlockPos { grid_i, grid_j }
    }
}

impl From<[usize; 2]> for BlockPos {
    fn from([grid_i, grid_j]: [usize; 2]) -> Self {
        BlockPos { grid_i, grid_j }
    }
}

impl From<BlockPos> for [usize; 2] {
    fn from(p: BlockPos) -> Self {
        [p.grid_i, p.grid_j]
    }
}

/// Blocks of one watermarked frame, in watermark-chunk order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub index: usize,
    pub blocks: Vec<BlockPos>,
}

/// Everything non-blind extraction needs besides the two videos.
///
/// Chunk `k` of the watermark (raster-order m×m tiles in the spatial
/// domain, consecutive runs of 8 samples in the frequency domain, HL2 then
/// LH2) lives in `blocks[k]` of every frame entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedManifest {
    pub version: u32,
    pub generator_id: String,
    pub seed: u64,
    pub domain: Domain,
    pub alpha: f64,
    pub block_size: usize,
    pub wm_side: usize,
    /// Row count of the watermark; equals `wm_side` for square patterns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wm_rows: Option<usize>,
    pub threshold: f64,
    pub range: i32,
    pub frames: Vec<FrameEntry>,
    /// Frames that had too few motion blocks.
    #[serde(default)]
    pub skipped: Vec<usize>,
}

impl EmbedManifest {
    pub fn shape(&self) -> WatermarkShape {
        WatermarkShape {
            rows: self.wm_rows.unwrap_or(self.wm_side),
            cols: self.wm_side,
        }
    }

    pub fn blocks_per_frame(&self) -> usize {
        let samples = self.shape().len();
        match self.domain {
            Domain::Spatial => samples / (self.block_size * self.block_size).max(1),
            Domain::Frequency => samples / SAMPLES_PER_FREQUENCY_BLOCK,
        }
    }

    pub fn entry(&self, index: usize) -> Option<&FrameEntry> {
        self.frames.iter().find(|e| e.index == index)
    }

    /// Regenerates the embedded watermark from the recorded seed and generator.
    pub fn watermark(&self) -> Result<WatermarkPattern> {
        generate_watermark(self.seed, self.shape(), &self.generator_id)
    }

    /// Checks internal consistency: version, parameters, and duplicate-free
    /// block lists of the right length.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Integrity(msg));
        if self.version != MANIFEST_VERSION {
            return bad(format!(
                "manifest version {} is not supported (expected {MANIFEST_VERSION})",
                self.version
            ));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.block_size == 0 || self.shape().is_empty() {
            return bad("block size and watermark size must be positive".into());
        }
        let per_frame = self.blocks_per_frame();
        let mut seen_frames = HashSet::new();
        for entry in &self.frames {
            if !seen_frames.insert(entry.index) {
                return bad(format!("frame {} listed twice", entry.index));
            }
            if entry.blocks.len() != per_frame {
                return bad(format!(
                    "frame {} lists {} blocks, {} expected",
                    entry.index,
                    entry.blocks.len(),
                    per_frame
                ));
            }
            let unique: HashSet<_> = entry.blocks.iter().collect();
            if unique.len() != entry.blocks.len() {
                return bad(format!("frame {} repeats a block", entry.index));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::Integrity(format!("manifest serialization failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: EmbedManifest = serde_json::from_str(text)
            .map_err(|e| Error::format(format!("invalid manifest: {e}")))?;
        m.validate()?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::watermark::XOSHIRO_GENERATOR;

    fn sample() -> EmbedManifest {
        EmbedManifest {
            version: MANIFEST_VERSION,
            generator_id: XOSHIRO_GENERATOR.into(),
            seed: 9,
            domain: Domain::Spatial,
            alpha: 0.1,
            block_size: 8,
            wm_side: 16,
            wm_rows: None,
            threshold: 4.0,
            range: 7,
            frames: vec![FrameEntry {
                index: 1,
                blocks: vec![
                    BlockPos::new(0, 0),
                    BlockPos::new(0, 1),
                    BlockPos::new(1, 0),
                    BlockPos::new(1, 1),
                ],
            }],
            skipped: vec![2],
        }
    }

    #[test]
    fn json_shape_and_roundtrip() {
        let m = sample();
        let text = m.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["domain"], "spatial");
        assert_eq!(v["frames"][0]["blocks"][2], serde_json::json!([1, 0]));
        assert!(v.get("wm_rows").is_none());
        for key in [
            "version",
            "generator_id",
            "seed",
            "alpha",
            "block_size",
            "wm_side",
            "threshold",
            "range",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(EmbedManifest::from_json(&text).unwrap(), m);
    }

    #[test]
    fn validation_catches_duplicates_and_counts() {
        let mut m = sample();
        m.frames[0].blocks[3] = BlockPos::new(0, 0);
        assert!(matches!(m.validate(), Err(Error::Integrity(_))));
        let mut m = sample();
        m.frames[0].blocks.pop();
        assert!(matches!(m.validate(), Err(Error::Integrity(_))));
        let mut m = sample();
        m.version = 99;
        assert!(m.validate().is_err());
        let mut m = sample();
        m.alpha = 0.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn block_counts_per_domain() {
        let mut m = sample();
        m.wm_side = 32;
        assert_eq!(m.blocks_per_frame(), 16);
        m.domain = Domain::Frequency;
        assert_eq!(m.blocks_per_frame(), 128);
        m.wm_rows = Some(16);
        assert_eq!(m.blocks_per_frame(), 64);
        m.domain = Domain::Spatial;
        assert_eq!(m.blocks_per_frame(), 8);
    }
}
