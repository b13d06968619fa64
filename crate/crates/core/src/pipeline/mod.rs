//! Video-level embedding and extraction, plus the robustness experiment.
//!
//! Frame `t ≥ 1` is matched against original frame `t − 1`. If it has at
//! least as many motion blocks as the watermark needs, the blocks nearest
//! the center carry the watermark; otherwise the frame is skipped. Frame 0
//! has no reference and is never watermarked.

mod experiment;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{self, DEFAULT_BLOCK_SIZE, DEFAULT_SEARCH_RANGE, DEFAULT_THRESHOLD};
use crate::video_io::FrameSequence;
use crate::watermark::{
    self, BlockPos, Domain, EmbedManifest, FrameEntry, WatermarkShape, DEFAULT_ALPHA,
    FREQUENCY_BLOCK_SIZE, MANIFEST_VERSION, SAMPLES_PER_FREQUENCY_BLOCK, XOSHIRO_GENERATOR,
};

pub use experiment::{run_experiment, Clip, ExperimentConfig, ExperimentOutput, ManifestRecord};
pub use report::{EvaluationReport, ReportFormat, ReportRow};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_DETECTION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: Domain,
    pub alpha: f64,
    pub block_size: usize,
    pub shape: WatermarkShape,
    pub threshold: f64,
    pub search_range: i32,
    pub seed: u64,
    pub generator_id: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: Domain::Frequency,
            alpha: DEFAULT_ALPHA,
            block_size: DEFAULT_BLOCK_SIZE,
            shape: WatermarkShape::square(32),
            threshold: DEFAULT_THRESHOLD,
            search_range: DEFAULT_SEARCH_RANGE,
            seed: DEFAULT_SEED,
            generator_id: XOSHIRO_GENERATOR.to_string(),
        }
    }
}

impl RunConfig {
    pub fn with_domain(&self, domain: Domain) -> Self {
        RunConfig {
            domain,
            ..self.clone()
        }
    }

    /// Motion blocks a frame must offer to carry the watermark.
    pub fn required_blocks(&self) -> usize {
        match self.domain {
            Domain::Spatial => self.shape.len() / (self.block_size * self.block_size).max(1),
            Domain::Frequency => self.shape.len() / SAMPLES_PER_FREQUENCY_BLOCK,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return fail(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.block_size == 0 {
            return fail("block size must be positive".into());
        }
        if self.shape.is_empty() {
            return fail("watermark must have at least one sample".into());
        }
        if !(self.threshold >= 0.0 && self.threshold.is_finite()) {
            return fail(format!(
                "motion threshold must be >= 0, got {}",
                self.threshold
            ));
        }
        if self.search_range < 1 {
            return fail(format!(
                "search range must be >= 1, got {}",
                self.search_range
            ));
        }
        match self.domain {
            Domain::Spatial => {
                let m = self.block_size;
                if !self.shape.rows.is_multiple_of(m) || !self.shape.cols.is_multiple_of(m) {
                    return fail(format!(
                        "a {}x{} watermark does not tile into {m}x{m} blocks",
                        self.shape.rows, self.shape.cols
                    ));
                }
            }
            Domain::Frequency => {
                if self.block_size != FREQUENCY_BLOCK_SIZE {
                    return fail(format!(
                        "the frequency domain requires block size {FREQUENCY_BLOCK_SIZE}, got {}",
                        self.block_size
                    ));
                }
                if !self.shape.len().is_multiple_of(SAMPLES_PER_FREQUENCY_BLOCK) {
                    return fail(format!(
                        "frequency watermark size must be a multiple of {SAMPLES_PER_FREQUENCY_BLOCK}"
                    ));
                }
            }
        }
        // surfaces an unknown generator as a configuration error up front
        watermark::generate_watermark(self.seed, WatermarkShape::square(1), &self.generator_id)?;
        Ok(())
    }

    fn empty_manifest(&self) -> EmbedManifest {
        EmbedManifest {
            version: MANIFEST_VERSION,
            generator_id: self.generator_id.clone(),
            seed: self.seed,
            domain: self.domain,
            alpha: self.alpha,
            block_size: self.block_size,
            wm_side: self.shape.cols,
            wm_rows: (self.shape.rows != self.shape.cols).then_some(self.shape.rows),
            threshold: self.threshold,
            range: self.search_range,
            frames: Vec::new(),
            skipped: Vec::new(),
        }
    }
}

/// Motion statistics of one frame pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameMotion {
    pub index: usize,
    pub motion_blocks: usize,
    pub watermarked: bool,
}

#[derive(Debug, Clone)]
pub struct EmbedOutput {
    pub video: FrameSequence,
    pub manifest: EmbedManifest,
    pub motion: Vec<FrameMotion>,
}

/// Embeds one shared watermark into every frame with enough motion.
pub fn embed_video(seq: &FrameSequence, cfg: &RunConfig) -> Result<EmbedOutput> {
    cfg.validate()?;
    seq.validate()?;
    if seq.len() < 2 {
        return Err(Error::Config(format!(
            "embedding needs at least 2 frames, got {}",
            seq.len()
        )));
    }
    let (w, h, _) = seq.geometry().expect("non-empty");
    let m = cfg.block_size;
    if w % m != 0 || h % m != 0 {
        return Err(Error::Config(format!(
            "frame size {w}x{h} is not a multiple of block size {m}"
        )));
    }
    let wm = watermark::generate_watermark(cfg.seed, cfg.shape, &cfg.generator_id)?;
    let required = cfg.required_blocks();

    let results: Vec<(FrameMotion, Option<(Vec<BlockPos>, crate::video_io::Frame)>)> = (1..seq
        .len())
        .into_par_iter()
        .map(|t| -> Result<_> {
            let (prev, cur) = (&seq.frames[t - 1], &seq.frames[t]);
            let field =
                motion::compute_motion_field(prev, cur, m, cfg.threshold, cfg.search_range)?;
            let motion_blocks = field.motion_count();
            let mut stats = FrameMotion {
                index: cur.index,
                motion_blocks,
                watermarked: false,
            };
            let selected = match motion::select_blocks(&field, required) {
                Ok(sel) => sel,
                Err(Error::InsufficientMotion { .. }) => return Ok((stats, None)),
                Err(e) => return Err(e),
            };
            let blocks: Vec<BlockPos> = selected
                .iter()
                .map(|r| BlockPos::new(r.grid_i, r.grid_j))
                .collect();
            let marked = match cfg.domain {
                Domain::Spatial => watermark::embed_spatial(cur, &wm, &blocks, m, cfg.alpha)?,
                Domain::Frequency => watermark::embed_frequency(cur, &wm, &blocks, m, cfg.alpha)?,
            };
            stats.watermarked = true;
            Ok((stats, Some((blocks, marked))))
        })
        .collect::<Result<_>>()?;

    let mut manifest = cfg.empty_manifest();
    let mut frames = Vec::with_capacity(seq.len());
    frames.push(seq.frames[0].clone());
    let mut motion = Vec::with_capacity(results.len());
    for ((stats, marked), original) in results.into_iter().zip(&seq.frames[1..]) {
        match marked {
            Some((blocks, frame)) => {
                manifest.frames.push(FrameEntry {
                    index: stats.index,
                    blocks,
                });
                frames.push(frame);
            }
            None => {
                manifest.skipped.push(stats.index);
                frames.push(original.clone());
            }
        }
        motion.push(stats);
    }
    if manifest.frames.is_empty() {
        return Err(Error::NoCapacity);
    }
    Ok(EmbedOutput {
        video: FrameSequence {
            frames,
            ..seq.clone()
        },
        manifest,
        motion,
    })
}

/// Per-frame extraction outcome; `delta` is `None` when the suspect lacks the frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameScore {
    pub index: usize,
    pub delta: Option<f64>,
}

impl FrameScore {
    pub fn dropped(&self) -> bool {
        self.delta.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub frames: Vec<FrameScore>,
    /// Mean similarity over surviving frames; `None` if every frame was dropped.
    pub mean_delta: Option<f64>,
}

impl Extraction {
    pub fn dropped(&self) -> usize {
        self.frames.iter().filter(|f| f.dropped()).count()
    }
}

/// Extracts from every manifest frame present in `suspect` and scores it
/// against the regenerated watermark. A zero extraction scores 0.
pub fn extract_video(
    original: &FrameSequence,
    suspect: &FrameSequence,
    manifest: &EmbedManifest,
) -> Result<Extraction> {
    manifest.validate()?;
    let wm = manifest
        .watermark()
        .map_err(|e| Error::Integrity(format!("cannot regenerate the watermark: {e}")))?;
    let frames = manifest
        .frames
        .par_iter()
        .map(|entry| -> Result<FrameScore> {
            let orig = original.frame_by_index(entry.index).ok_or_else(|| {
                Error::Integrity(format!("original video has no frame {}", entry.index))
            })?;
            let Some(sus) = suspect.frame_by_index(entry.index) else {
                return Ok(FrameScore {
                    index: entry.index,
                    delta: None,
                });
            };
            if (orig.width(), orig.height()) != (sus.width(), sus.height()) {
                return Err(Error::Integrity(format!(
                    "frame {}: original is {}x{}, suspect is {}x{}",
                    entry.index,
                    orig.width(),
                    orig.height(),
                    sus.width(),
                    sus.height()
                )));
            }
            let w_star = watermark::extract(orig, sus, manifest).map_err(|e| match e {
                Error::Shape(m) => Error::Integrity(m),
                other => other,
            })?;
            let delta = match watermark::similarity(&w_star, &wm.samples) {
                Ok(d) => d,
                Err(Error::Domain(_)) => 0.0,
                Err(e) => return Err(e),
            };
            Ok(FrameScore {
                index: entry.index,
                delta: Some(delta),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let surviving: Vec<f64> = frames.iter().filter_map(|f| f.delta).collect();
    let mean_delta =
        (!surviving.is_empty()).then(|| surviving.iter().sum::<f64>() / surviving.len() as f64);
    Ok(Extraction { frames, mean_delta })
}
