//! Headerless planar YUV (8-bit), geometry supplied by the caller.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{quantize_sample, ChromaLayout, Frame, FrameRate, FrameSequence, Plane};
use crate::error::{Error, Result};

/// Geometry for a headerless planar YUV stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawGeometry {
    pub width: usize,
    pub height: usize,
    pub layout: ChromaLayout,
    pub frame_rate: FrameRate,
}

impl RawGeometry {
    /// Parses a `WxH` size string.
    pub fn parse_size(s: &str) -> Result<(usize, usize)> {
        let bad = || Error::Config(format!("invalid raw size `{s}` (expected WxH)"));
        let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let w: usize = w.parse().map_err(|_| bad())?;
        let h: usize = h.parse().map_err(|_| bad())?;
        if w == 0 || h == 0 {
            return Err(bad());
        }
        Ok((w, h))
    }
}

pub fn read_raw_yuv(path: impl AsRef<Path>, geometry: RawGeometry) -> Result<FrameSequence> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;

    let RawGeometry {
        width: w,
        height: h,
        layout,
        frame_rate,
    } = geometry;
    let (cw, ch) = layout.chroma_size(w, h);
    let frame_len = layout.frame_bytes(w, h);
    if bytes.is_empty() {
        return Err(Error::format(format!(
            "{}: empty raw video",
            path.display()
        )));
    }

    let mut frames = Vec::with_capacity(bytes.len() / frame_len);
    for (index, chunk) in bytes.chunks(frame_len).enumerate() {
        if chunk.len() < frame_len {
            return Err(Error::Truncated {
                frame: index,
                expected: frame_len,
                got: chunk.len(),
            });
        }
        let (y, rest) = chunk.split_at(w * h);
        let (cb, cr) = rest.split_at(cw * ch);
        let plane = |b: &[u8], pw, ph, off: f64| {
            Plane::from_vec(pw, ph, b.iter().map(|&v| v as f64 - off).collect())
        };
        frames.push(Frame::new(
            index,
            plane(y, w, h, 0.0)?,
            plane(cb, cw, ch, 128.0)?,
            plane(cr, cw, ch, 128.0)?,
            layout,
        )?);
    }

    let mut seq = FrameSequence::new(frames, frame_rate, path.display().to_string());
    seq.header_tags = vec!["Ip".into(), "A1:1".into(), layout.y4m_tag().into()];
    Ok(seq)
}

pub fn write_raw_yuv(seq: &FrameSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if seq.is_empty() {
        return Err(Error::Config("cannot write an empty sequence".into()));
    }
    seq.validate()?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for frame in &seq.frames {
        let bytes: Vec<u8> = frame
            .luma
            .data()
            .iter()
            .map(|&v| quantize_sample(v))
            .chain(
                frame
                    .cb
                    .data()
                    .iter()
                    .chain(frame.cr.data())
                    .map(|&v| quantize_sample(v + 128.0)),
            )
            .collect();
        w.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_parsing() {
        assert_eq!(RawGeometry::parse_size("176x144").unwrap(), (176, 144));
        assert!(RawGeometry::parse_size("176").is_err());
        assert!(RawGeometry::parse_size("0x4").is_err());
    }

    #[test]
    fn raw_roundtrip_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clip.yuv");
        let geom = RawGeometry {
            width: 8,
            height: 4,
            layout: ChromaLayout::C420,
            frame_rate: FrameRate::new(25, 1),
        };
        let bytes: Vec<u8> = (0..2 * 48).map(|i| (i * 5 % 256) as u8).collect();
        std::fs::write(&path, &bytes).unwrap();
        let seq = read_raw_yuv(&path, geom).unwrap();
        assert_eq!(seq.len(), 2);
        let out = dir.path().join("out.yuv");
        write_raw_yuv(&seq, &out).unwrap();
        assert_eq!(std::fs::read(&out).unwrap(), bytes);

        std::fs::write(&path, &bytes[..60]).unwrap();
        assert!(matches!(
            read_raw_yuv(&path, geom),
            Err(Error::Truncated {
                frame: 1,
                expected: 48,
                got: 12
            })
        ));
    }
}
