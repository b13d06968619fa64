//! Deterministic degradations used to probe watermark robustness.
//!
//! All frame attacks act on luma only and leave chroma bit-identical.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video_io::{Frame, FrameSequence, Plane};

pub const QUANT_BLOCK: usize = 8;
pub const DEFAULT_Q_BASE: f64 = 16.0;
pub const DEFAULT_RADIUS: usize = 1;
pub const DEFAULT_BOOST: f64 = 1.0;

/// Which frames a frame-drop attack removes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropSpec {
    /// Original frame indices to remove.
    Indices(Vec<usize>),
    /// Removes every ⌈1/ratio⌉-th frame by position.
    Ratio(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackSpec {
    AdaptiveQuantization {
        q_base: f64,
        /// When false the step is `q_base` everywhere.
        adaptive: bool,
    },
    Lowpass {
        radius: usize,
    },
    Highpass {
        radius: usize,
        boost: f64,
    },
    FrameDrop(DropSpec),
}

impl AttackSpec {
    pub fn quantization() -> Self {
        AttackSpec::AdaptiveQuantization {
            q_base: DEFAULT_Q_BASE,
            adaptive: true,
        }
    }

    pub fn lowpass() -> Self {
        AttackSpec::Lowpass {
            radius: DEFAULT_RADIUS,
        }
    }

    pub fn highpass() -> Self {
        AttackSpec::Highpass {
            radius: DEFAULT_RADIUS,
            boost: DEFAULT_BOOST,
        }
    }

    /// The three per-frame attacks of the standard evaluation.
    pub fn standard_set() -> Vec<AttackSpec> {
        vec![Self::quantization(), Self::lowpass(), Self::highpass()]
    }

    /// Short name used in reports: `quant`, `lowpass`, `highpass`, `drop`.
    pub fn name(&self) -> &'static str {
        match self {
            AttackSpec::AdaptiveQuantization { .. } => "quant",
            AttackSpec::Lowpass { .. } => "lowpass",
            AttackSpec::Highpass { .. } => "highpass",
            AttackSpec::FrameDrop(_) => "drop",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            AttackSpec::AdaptiveQuantization { q_base, .. } => *q_base >= 1.0 && q_base.is_finite(),
            AttackSpec::Lowpass { radius } => *radius >= 1,
            AttackSpec::Highpass { radius, boost } => {
                *radius >= 1 && *boost > 0.0 && boost.is_finite()
            }
            AttackSpec::FrameDrop(DropSpec::Ratio(r)) => (0.0..1.0).contains(r),
            AttackSpec::FrameDrop(DropSpec::Indices(_)) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid attack parameters: {self}")))
        }
    }

    /// Applies the attack to a whole sequence.
    pub fn apply(&self, seq: &FrameSequence) -> Result<FrameSequence> {
        self.validate()?;
        let per_frame = |f: &dyn Fn(&Frame) -> Frame| FrameSequence {
            frames: seq.frames.iter().map(f).collect(),
            ..seq.clone()
        };
        Ok(match self {
            AttackSpec::AdaptiveQuantization { q_base, adaptive } => {
                per_frame(&|f| quantize_frame(f, *q_base, *adaptive))
            }
            AttackSpec::Lowpass { radius } => per_frame(&|f| lowpass_frame(f, *radius)),
            AttackSpec::Highpass { radius, boost } => {
                per_frame(&|f| highpass_frame(f, *radius, *boost))
            }
            AttackSpec::FrameDrop(spec) => drop_frames(seq, spec)?,
        })
    }
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackSpec::AdaptiveQuantization { q_base, adaptive } => {
                write!(f, "quant(q_base={q_base}, adaptive={adaptive})")
            }
            AttackSpec::Lowpass { radius } => write!(f, "lowpass(radius={radius})"),
            AttackSpec::Highpass { radius, boost } => {
                write!(f, "highpass(radius={radius}, boost={boost})")
            }
            AttackSpec::FrameDrop(DropSpec::Ratio(r)) => write!(f, "drop(ratio={r})"),
            AttackSpec::FrameDrop(DropSpec::Indices(ix)) => write!(f, "drop(frames={ix:?})"),
        }
    }
}

/// Rounds every sample to the nearest multiple of `step`.
pub fn quantize_samples(samples: &mut [f64], step: f64) {
    for v in samples {
        *v = (*v / step).round() * step;
    }
}

/// Mean absolute deviation from the mean.
fn block_activity(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    samples.iter().map(|v| (v - mean).abs()).sum::<f64>() / n
}

/// Step used for one block: `max(1, q_base · activity / 8)`, or `q_base` when not adaptive.
pub fn quantizer_step(samples: &[f64], q_base: f64, adaptive: bool) -> f64 {
    if adaptive {
        (q_base * block_activity(samples) / QUANT_BLOCK as f64).max(1.0)
    } else {
        q_base
    }
}

/// Per 8×8 luma block (partial blocks at the edges included), quantize with
/// an activity-scaled step.
pub fn adaptive_quantize(frame: &Frame, q_base: f64) -> Result<Frame> {
    AttackSpec::AdaptiveQuantization {
        q_base,
        adaptive: true,
    }
    .validate()?;
    Ok(quantize_frame(frame, q_base, true))
}

fn quantize_frame(frame: &Frame, q_base: f64, adaptive: bool) -> Frame {
    let mut luma = frame.luma.clone();
    let (w, h) = (luma.width(), luma.height());
    let mut buf = Vec::with_capacity(QUANT_BLOCK * QUANT_BLOCK);
    for by in (0..h).step_by(QUANT_BLOCK) {
        for bx in (0..w).step_by(QUANT_BLOCK) {
            let (bw, bh) = (QUANT_BLOCK.min(w - bx), QUANT_BLOCK.min(h - by));
            buf.clear();
            for y in by..by + bh {
                buf.extend_from_slice(&luma.row(y)[bx..bx + bw]);
            }
            let step = quantizer_step(&buf, q_base, adaptive);
            quantize_samples(&mut buf, step);
            for (r, chunk) in buf.chunks_exact(bw).enumerate() {
                luma.row_mut(by + r)[bx..bx + bw].copy_from_slice(chunk);
            }
        }
    }
    frame.with_luma(luma)
}

/// Whole-sample mirror: index −1 maps to 1, index n maps to n − 2.
fn mirror(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let k = i.rem_euclid(period);
    (if k >= n as isize { period - k } else { k }) as usize
}

/// Separable box mean of side `2·radius + 1` with mirrored borders.
pub fn box_filter(plane: &Plane, radius: usize) -> Plane {
    let (w, h) = (plane.width(), plane.height());
    let r = radius as isize;
    let norm = (2 * radius + 1) as f64;
    let mut horiz = Plane::new(w, h);
    for y in 0..h {
        let src = plane.row(y);
        let dst = horiz.row_mut(y);
        for (x, d) in dst.iter_mut().enumerate() {
            let s: f64 = (-r..=r).map(|k| src[mirror(x as isize + k, w)]).sum();
            *d = s / norm;
        }
    }
    Plane::from_fn(w, h, |x, y| {
        (-r..=r)
            .map(|k| horiz.get(x, mirror(y as isize + k, h)))
            .sum::<f64>()
            / norm
    })
}

pub fn lowpass(frame: &Frame, radius: usize) -> Result<Frame> {
    AttackSpec::Lowpass { radius }.validate()?;
    Ok(lowpass_frame(frame, radius))
}

fn lowpass_frame(frame: &Frame, radius: usize) -> Frame {
    frame.with_luma(box_filter(&frame.luma, radius))
}

/// High-boost sharpening `Y + boost·(Y − lowpass(Y))`.
pub fn highpass(frame: &Frame, radius: usize, boost: f64) -> Result<Frame> {
    AttackSpec::Highpass { radius, boost }.validate()?;
    Ok(highpass_frame(frame, radius, boost))
}

fn highpass_frame(frame: &Frame, radius: usize, boost: f64) -> Frame {
    let blurred = box_filter(&frame.luma, radius);
    let mut luma = frame.luma.clone();
    for (v, b) in luma.data_mut().iter_mut().zip(blurred.data()) {
        *v += boost * (*v - b);
    }
    frame.with_luma(luma)
}

/// Removes frames; survivors keep their original `index`.
pub fn drop_frames(seq: &FrameSequence, spec: &DropSpec) -> Result<FrameSequence> {
    let keep: Vec<bool> = match spec {
        DropSpec::Indices(indices) => {
            for &i in indices {
                if seq.frame_by_index(i).is_none() {
                    return Err(Error::Domain(format!("frame {i} is not in the sequence")));
                }
            }
            seq.frames
                .iter()
                .map(|f| !indices.contains(&f.index))
                .collect()
        }
        DropSpec::Ratio(ratio) => {
            if !(0.0..1.0).contains(ratio) {
                return Err(Error::Domain(format!(
                    "drop ratio must be in [0, 1), got {ratio}"
                )));
            }
            if *ratio == 0.0 {
                vec![true; seq.len()]
            } else {
                let every = (1.0 / ratio).ceil() as usize;
                (0..seq.len()).map(|pos| (pos + 1) % every != 0).collect()
            }
        }
    };
    Ok(FrameSequence {
        frames: seq
            .frames
            .iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(f, _)| f.clone())
            .collect(),
        ..seq.clone()
    })
}
