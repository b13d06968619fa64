//! Motion-guided video watermarking.
//!
//! A seeded Gaussian watermark is added to the luma of motion-active blocks
//! near the frame center, either directly on the samples or on the HL2/LH2
//! subbands of a 2-level CDF 9/7 decomposition of each block. Extraction is
//! non-blind: it needs the original video and the [`EmbedManifest`]
//! written at embedding time.

pub mod attacks;
pub mod error;
pub mod motion;
pub mod pipeline;
pub mod synth;
pub mod video_io;
pub mod watermark;
pub mod wavelet;

pub use error::{Error, ErrorClass, Result};
pub use video_io::{ChromaLayout, Frame, FrameRate, FrameSequence, Plane};
pub use watermark::{Domain, EmbedManifest, WatermarkPattern};
