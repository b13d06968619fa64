use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// xoshiro256** seeded through SplitMix64 (the reference `seed_from_u64` expansion).
pub const XOSHIRO_GENERATOR: &str = "xoshiro256starstar-splitmix64";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatermarkShape {
    pub rows: usize,
    pub cols: usize,
}

impl WatermarkShape {
    pub const fn square(side: usize) -> Self {
        WatermarkShape {
            rows: side,
            cols: side,
        }
    }

    /// Shape for a sample budget: 1024 → 32×32, 512 → 16×32, otherwise a square if possible.
    pub fn for_samples(samples: usize) -> Result<Self> {
        match samples {
            1024 => Ok(Self::square(32)),
            512 => Ok(WatermarkShape { rows: 16, cols: 32 }),
            n => {
                let side = (n as f64).sqrt().round() as usize;
                if side > 0 && side * side == n {
                    Ok(Self::square(side))
                } else {
                    Err(Error::Config(format!(
                        "no watermark shape for {n} samples (use 512 or a square count)"
                    )))
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Standard-normal source using the polar Box–Muller method over a uniform PRNG.
pub struct PolarGaussian<R> {
    rng: R,
    spare: Option<f64>,
}

impl<R: Rng> PolarGaussian<R> {
    pub fn new(rng: R) -> Self {
        PolarGaussian { rng, spare: None }
    }

    /// Uniform on [-1, 1) from the top 53 bits of one draw.
    fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.rng.next_u64() >> 11) as f64 * SCALE) * 2.0 - 1.0
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = self.uniform();
            let v = self.uniform();
            let s = u * u + v * v;
            if s >= 1.0 || s == 0.0 {
                continue;
            }
            let factor = (-2.0 * s.ln() / s).sqrt();
            self.spare = Some(v * factor);
            return u * factor;
        }
    }
}

/// An n×n (or rows×cols) matrix of standard-normal samples, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatermarkPattern {
    pub shape: WatermarkShape,
    pub samples: Vec<f64>,
    pub seed: u64,
    pub generator_id: String,
}

impl WatermarkPattern {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.shape.cols + col]
    }
}

pub fn generate_watermark(
    seed: u64,
    shape: WatermarkShape,
    generator_id: &str,
) -> Result<WatermarkPattern> {
    if shape.is_empty() {
        return Err(Error::Config(
            "watermark must have at least one sample".into(),
        ));
    }
    let mut source = match generator_id {
        XOSHIRO_GENERATOR => PolarGaussian::new(Xoshiro256StarStar::seed_from_u64(seed)),
        other => {
            return Err(Error::Config(format!(
                "unknown generator `{other}` (supported: {XOSHIRO_GENERATOR})"
            )))
        }
    };
    let samples = (0..shape.len()).map(|_| source.sample()).collect();
    Ok(WatermarkPattern {
        shape,
        samples,
        seed,
        generator_id: generator_id.to_string(),
    })
}
