//! YUV4MPEG2 reader and writer (8-bit, progressive, C420/C422/C444).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{quantize_sample, ChromaLayout, Frame, FrameRate, FrameSequence, Plane};
use crate::error::{Error, Result};

const SIGNATURE: &str = "YUV4MPEG2";
const FRAME_TAG: &str = "FRAME";
const MAX_HEADER_LEN: usize = 4096;
const CHROMA_OFFSET: f64 = 128.0;

pub fn read_y4m(path: impl AsRef<Path>) -> Result<FrameSequence> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut seq = read_y4m_from(BufReader::new(file))?;
    seq.source_id = path.display().to_string();
    Ok(seq)
}

pub fn write_y4m(seq: &FrameSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_y4m_to(seq, &mut w).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    w.flush().map_err(|e| Error::io(path, e))
}

struct Header {
    width: usize,
    height: usize,
    rate: FrameRate,
    layout: ChromaLayout,
    tags: Vec<String>,
}

fn parse_header(line: &str) -> Result<Header> {
    let mut tokens = line.split(' ').filter(|t| !t.is_empty());
    match tokens.next() {
        Some(SIGNATURE) => {}
        Some(other) => return Err(Error::bad_token("not a YUV4MPEG2 stream", other)),
        None => return Err(Error::format("empty stream header")),
    }

    let mut width = None;
    let mut height = None;
    let mut rate = FrameRate::default();
    let mut layout = ChromaLayout::C420;
    let mut tags = Vec::new();

    for token in tokens {
        let split = token.chars().next().map_or(0, char::len_utf8);
        let (key, value) = token.split_at(split);
        match key {
            "W" => width = Some(parse_dim(token, value)?),
            "H" => height = Some(parse_dim(token, value)?),
            "F" => {
                let (n, d) = value
                    .split_once(':')
                    .ok_or_else(|| Error::bad_token("frame rate must be N:D", token))?;
                let num = n
                    .parse()
                    .map_err(|_| Error::bad_token("bad frame rate", token))?;
                let den = d
                    .parse()
                    .map_err(|_| Error::bad_token("bad frame rate", token))?;
                if num == 0 || den == 0 {
                    return Err(Error::bad_token("frame rate must be positive", token));
                }
                rate = FrameRate::new(num, den);
            }
            "C" => {
                layout = match value {
                    "420" | "420jpeg" | "420paldv" | "420mpeg2" => ChromaLayout::C420,
                    "422" => ChromaLayout::C422,
                    "444" => ChromaLayout::C444,
                    _ => return Err(Error::bad_token("unsupported colorspace", token)),
                };
                tags.push(token.to_string());
            }
            "I" => {
                if !matches!(value, "p" | "?") {
                    return Err(Error::bad_token(
                        "interlaced content is not supported",
                        token,
                    ));
                }
                tags.push(token.to_string());
            }
            "A" | "X" => tags.push(token.to_string()),
            _ => return Err(Error::bad_token("unknown header parameter", token)),
        }
    }

    let width = width.ok_or_else(|| Error::format("header has no W parameter"))?;
    let height = height.ok_or_else(|| Error::format("header has no H parameter"))?;
    Ok(Header {
        width,
        height,
        rate,
        layout,
        tags,
    })
}

fn parse_dim(token: &str, value: &str) -> Result<usize> {
    match value.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(Error::bad_token(
            "dimension must be a positive integer",
            token,
        )),
    }
}

/// Reads one `\n`-terminated line. `Ok(None)` means clean EOF before any byte.
fn read_line<R: BufRead>(r: &mut R, what: &str) -> Result<Option<String>> {
    let mut buf = Vec::new();
    let n = r
        .take(MAX_HEADER_LEN as u64)
        .read_until(b'\n', &mut buf)
        .map_err(|e| Error::io("<stream>", e))?;
    if n == 0 {
        return Ok(None);
    }
    if buf.last() != Some(&b'\n') {
        return Err(Error::format(format!("unterminated {what}")));
    }
    buf.pop();
    String::from_utf8(buf)
        .map(Some)
        .map_err(|_| Error::format(format!("{what} is not ASCII")))
}

pub fn read_y4m_from<R: Read>(reader: R) -> Result<FrameSequence> {
    let mut r = BufReader::new(reader);
    let line = read_line(&mut r, "stream header")?
        .ok_or_else(|| Error::format("empty file: missing YUV4MPEG2 signature"))?;
    let header = parse_header(&line)?;
    let (w, h) = (header.width, header.height);
    let (cw, ch) = header.layout.chroma_size(w, h);
    let frame_len = header.layout.frame_bytes(w, h);

    let mut frames = Vec::new();
    let mut payload = vec![0u8; frame_len];
    while let Some(tag) = read_line(&mut r, "frame header")? {
        let index = frames.len();
        if tag.split(' ').next() != Some(FRAME_TAG) {
            return Err(Error::bad_token(
                format!("frame {index}: expected FRAME marker"),
                tag,
            ));
        }
        let got = read_full(&mut r, &mut payload)?;
        if got < frame_len {
            return Err(Error::Truncated {
                frame: index,
                expected: frame_len,
                got,
            });
        }
        let to_plane = |bytes: &[u8], pw, ph, offset: f64| {
            Plane::from_vec(pw, ph, bytes.iter().map(|&b| b as f64 - offset).collect())
        };
        let (y, rest) = payload.split_at(w * h);
        let (cb, cr) = rest.split_at(cw * ch);
        frames.push(Frame::new(
            index,
            to_plane(y, w, h, 0.0)?,
            to_plane(cb, cw, ch, CHROMA_OFFSET)?,
            to_plane(cr, cw, ch, CHROMA_OFFSET)?,
            header.layout,
        )?);
    }

    Ok(FrameSequence {
        frames,
        frame_rate: header.rate,
        source_id: String::new(),
        header_tags: header.tags,
    })
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(Error::io("<stream>", e)),
        }
    }
    Ok(filled)
}

pub fn write_y4m_to<W: Write>(seq: &FrameSequence, w: &mut W) -> Result<()> {
    let (width, height, layout) = seq
        .geometry()
        .ok_or_else(|| Error::Config("cannot write an empty sequence".into()))?;
    seq.validate()?;

    let io = |e| Error::io("<stream>", e);
    let mut header = format!("{SIGNATURE} W{width} H{height} F{}", seq.frame_rate);
    let has_colorspace = seq.header_tags.iter().any(|t| t.starts_with('C'));
    for tag in &seq.header_tags {
        header.push(' ');
        header.push_str(tag);
    }
    if seq.header_tags.is_empty() {
        header.push_str(" Ip A1:1");
    }
    if !has_colorspace {
        header.push(' ');
        header.push_str(layout.y4m_tag());
    }
    header.push('\n');
    w.write_all(header.as_bytes()).map_err(io)?;

    let mut payload = Vec::with_capacity(layout.frame_bytes(width, height));
    for frame in &seq.frames {
        payload.clear();
        payload.extend(frame.luma.data().iter().map(|&v| quantize_sample(v)));
        for plane in [&frame.cb, &frame.cr] {
            payload.extend(
                plane
                    .data()
                    .iter()
                    .map(|&v| quantize_sample(v + CHROMA_OFFSET)),
            );
        }
        w.write_all(b"FRAME\n").map_err(io)?;
        w.write_all(&payload).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(frames: usize, w: usize, h: usize, c: &str) -> Vec<u8> {
        let layout: ChromaLayout = c.parse().unwrap();
        let mut out = format!("YUV4MPEG2 W{w} H{h} F30:1 Ip A1:1 C{c}\n").into_bytes();
        for f in 0..frames {
            out.extend_from_slice(b"FRAME\n");
            for i in 0..layout.frame_bytes(w, h) {
                out.push(((i * 7 + f * 13) % 256) as u8);
            }
        }
        out
    }

    #[test]
    fn reads_two_frame_420() {
        let seq = read_y4m_from(&fixture(2, 16, 16, "420")[..]).unwrap();
        assert_eq!(seq.len(), 2);
        let f = &seq.frames[1];
        assert_eq!((f.luma.width(), f.luma.height()), (16, 16));
        assert_eq!((f.cb.width(), f.cb.height()), (8, 8));
        assert_eq!(f.index, 1);
        assert_eq!(seq.frame_rate, FrameRate::new(30, 1));
        assert_eq!(f.luma.get(0, 0), 13.0);
        // chroma bytes lose the +128 offset
        assert_eq!(f.cb.get(0, 0), ((256 * 7 + 13) % 256) as f64 - 128.0);
    }

    #[test]
    fn empty_file_is_format_error() {
        assert!(matches!(read_y4m_from(&b""[..]), Err(Error::Format { .. })));
    }

    #[test]
    fn malformed_header_names_token() {
        let err = read_y4m_from(&b"YUV4MPEG2 W16 Hx F30:1\n"[..]).unwrap_err();
        match err {
            Error::Format { token, .. } => assert_eq!(token.as_deref(), Some("Hx")),
            other => panic!("unexpected {other:?}"),
        }
        let err = read_y4m_from(&b"YUV4MPEG2 W16 H16 Cmono\n"[..]).unwrap_err();
        assert!(err.to_string().contains("Cmono"), "{err}");
        let err = read_y4m_from(&b"RIFF W16 H16\n"[..]).unwrap_err();
        assert!(err.to_string().contains("RIFF"), "{err}");
    }

    #[test]
    fn truncated_payload_reports_frame() {
        let mut bytes = fixture(3, 16, 16, "420");
        bytes.truncate(bytes.len() - 10);
        match read_y4m_from(&bytes[..]).unwrap_err() {
            Error::Truncated {
                frame,
                expected,
                got,
            } => {
                assert_eq!(frame, 2);
                assert_eq!(expected, 384);
                assert_eq!(got, 374);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn roundtrip_is_byte_identical() {
        for c in ["420", "422", "444"] {
            let bytes = fixture(3, 24, 16, c);
            let seq = read_y4m_from(&bytes[..]).unwrap();
            let mut out = Vec::new();
            write_y4m_to(&seq, &mut out).unwrap();
            assert_eq!(out, bytes, "layout {c}");
        }
    }

    #[test]
    fn writer_clamps_and_rounds() {
        let mut luma = Plane::filled(2, 2, 128.0);
        luma.set(0, 0, 255.7);
        luma.set(1, 0, -0.4);
        luma.set(0, 1, 10.5);
        let seq = FrameSequence::new(
            vec![Frame::from_luma(0, luma, ChromaLayout::C444)],
            FrameRate::new(25, 1),
            "t",
        );
        let mut out = Vec::new();
        write_y4m_to(&seq, &mut out).unwrap();
        let payload = &out[out.len() - 12..];
        assert_eq!(&payload[..4], &[255, 0, 11, 128]);
        // Zero-valued chroma is written with the +128 offset.
        assert!(payload[4..].iter().all(|&b| b == 0x80));
    }

    #[test]
    fn constant_frame_payload() {
        let seq = FrameSequence::new(
            vec![Frame::from_luma(
                0,
                Plane::filled(4, 4, 128.0),
                ChromaLayout::C420,
            )],
            FrameRate::new(25, 1),
            "t",
        );
        let mut out = Vec::new();
        write_y4m_to(&seq, &mut out).unwrap();
        let header_end = out.iter().position(|&b| b == b'\n').unwrap() + 1;
        assert_eq!(&out[header_end..header_end + 6], b"FRAME\n");
        assert!(out[header_end + 6..].iter().all(|&b| b == 0x80));
        assert_eq!(out.len() - header_end - 6, 24);
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let seq = FrameSequence::new(Vec::new(), FrameRate::default(), "t");
        assert!(matches!(
            write_y4m_to(&seq, &mut Vec::new()),
            Err(Error::Config(_))
        ));
    }
}
