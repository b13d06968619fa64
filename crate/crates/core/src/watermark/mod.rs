//! Seeded Gaussian watermark, non-blind embedding/extraction, and the
//! PSNR and similarity measures.

mod embed;
mod gaussian;
mod manifest;
mod metrics;

pub use embed::{
    embed_frequency, embed_spatial, extract, extract_frequency, extract_frequency_blocks,
    extract_spatial, extract_spatial_blocks, FREQUENCY_BLOCK_SIZE, FREQUENCY_LEVELS,
    SAMPLES_PER_FREQUENCY_BLOCK,
};
pub use gaussian::{
    generate_watermark, PolarGaussian, WatermarkPattern, WatermarkShape, XOSHIRO_GENERATOR,
};
pub use manifest::{BlockPos, Domain, EmbedManifest, FrameEntry, MANIFEST_VERSION};
pub use metrics::{psnr, psnr_planes, similarity};

/// Default embedding strength.
pub const DEFAULT_ALPHA: f64 = 0.1;
