//! Byte-level encoders and decoders for grayscale images, masks, overlays,
//! and metric reports.
//!
//! Samples are normalized to `[0, 1]` on read by dividing by the file's
//! declared maximum. Writes quantize to 8 bits with `round(v * 255)`
//! (half away from zero), clamped to `[0, 255]`.

use std::fmt::Write as _;

use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::evaluation::{ConfusionCounts, Metrics, OverlayImage};
use crate::image::{BinaryMask, Image};
use crate::segmentation::Sweep;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFileFormat {
    /// `P2`, ASCII samples.
    PgmAscii,
    /// `P5`, binary samples.
    PgmBinary,
    PngGray8,
    /// `P6`, for overlays.
    PpmBinary,
    PngRgb8,
}

impl ImageFileFormat {
    /// Picks a format from a file extension (`pgm` → binary PGM, `ppm`, `png`).
    pub fn from_extension(ext: &str, rgb: bool) -> Option<Self> {
        match (ext.to_ascii_lowercase().as_str(), rgb) {
            ("pgm", false) => Some(Self::PgmBinary),
            ("ppm", true) => Some(Self::PpmBinary),
            ("png", false) => Some(Self::PngGray8),
            ("png", true) => Some(Self::PngRgb8),
            _ => None,
        }
    }

    fn is_rgb(self) -> bool {
        matches!(self, Self::PpmBinary | Self::PngRgb8)
    }
}

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Decodes a grayscale PGM (`P2`/`P5`, 8 or 16 bit) or 8-bit grayscale PNG.
pub fn read_image(bytes: &[u8]) -> Result<Image> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        return read_png_gray(bytes);
    }
    let magic = bytes
        .get(..2)
        .ok_or(ParseError::at(ParseErrorKind::BadMagic, 0))?;
    match magic {
        b"P2" | b"P5" => read_pgm(bytes),
        [b'P', b'1' | b'3' | b'4' | b'6' | b'7'] => Err(ParseError::at(
            ParseErrorKind::Unsupported(format!(
                "netpbm {} (only grayscale P2/P5)",
                String::from_utf8_lossy(magic)
            )),
            0,
        )
        .into()),
        _ => Err(ParseError::at(ParseErrorKind::BadMagic, 0).into()),
    }
}

/// Decodes an image and treats samples above one half as foreground.
pub fn read_mask(bytes: &[u8]) -> Result<BinaryMask> {
    let img = read_image(bytes)?;
    let (w, h) = img.dims();
    Ok(BinaryMask::from_raw(
        w,
        h,
        img.pixels().iter().map(|&v| v > 0.5).collect(),
    ))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skips whitespace and `#` comments (to end of line).
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Reads an unsigned decimal token. `None` at end of input.
    fn number(&mut self, what: &str) -> Result<Option<u64>, ParseError> {
        self.skip_separators();
        let start = self.pos;
        if start >= self.bytes.len() {
            return Ok(None);
        }
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = &self.bytes[start..self.pos];
        let terminated = self
            .bytes
            .get(self.pos)
            .is_none_or(|b| b.is_ascii_whitespace() || *b == b'#');
        if digits.is_empty() || !terminated {
            return Err(ParseError::at(
                ParseErrorKind::MalformedHeader(format!("expected unsigned integer for {what}")),
                start,
            ));
        }
        std::str::from_utf8(digits)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .map(Some)
            .ok_or_else(|| {
                ParseError::at(
                    ParseErrorKind::MalformedHeader(format!("{what} out of range")),
                    start,
                )
            })
    }

    fn header_field(&mut self, what: &str) -> Result<u64, ParseError> {
        let at = self.pos;
        self.number(what)?.ok_or_else(|| {
            ParseError::at(
                ParseErrorKind::MalformedHeader(format!("missing {what}")),
                at,
            )
        })
    }
}

struct PnmHeader {
    width: usize,
    height: usize,
    maxval: u16,
    /// Offset of the first payload byte (after the single separator).
    data_start: usize,
}

fn parse_pnm_header(bytes: &[u8]) -> Result<PnmHeader, ParseError> {
    let mut cur = Cursor { bytes, pos: 2 };
    if !bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(ParseError::at(ParseErrorKind::BadMagic, 0));
    }
    let dim = |cur: &mut Cursor, what: &str| -> Result<usize, ParseError> {
        let at = cur.pos;
        let v = cur.header_field(what)?;
        if v == 0 || v > u32::MAX as u64 {
            return Err(ParseError::at(
                ParseErrorKind::MalformedHeader(format!("{what} {v} out of range")),
                at,
            ));
        }
        Ok(v as usize)
    };
    let width = dim(&mut cur, "width")?;
    let height = dim(&mut cur, "height")?;
    let at = cur.pos;
    let maxval = cur.header_field("maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(ParseError::at(
            ParseErrorKind::MalformedHeader(format!("maxval {maxval} outside 1..=65535")),
            at,
        ));
    }
    if width.checked_mul(height).is_none_or(|n| n > 1 << 31) {
        return Err(ParseError::at(
            ParseErrorKind::MalformedHeader(format!("{width}x{height} too large")),
            at,
        ));
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => {}
        _ => {
            return Err(ParseError::at(
                ParseErrorKind::MalformedHeader("missing separator after maxval".into()),
                cur.pos,
            ))
        }
    }
    Ok(PnmHeader {
        width,
        height,
        maxval: maxval as u16,
        data_start: cur.pos + 1,
    })
}

fn read_pgm(bytes: &[u8]) -> Result<Image> {
    let header = parse_pnm_header(bytes)?;
    let n = header.width * header.height;
    let maxval = header.maxval as f64;
    let mut pixels = Vec::with_capacity(n);
    if &bytes[..2] == b"P2" {
        let mut cur = Cursor {
            bytes,
            pos: header.data_start,
        };
        while pixels.len() < n {
            let at = cur.pos;
            let v = match cur.number("sample") {
                Ok(Some(v)) => v,
                Ok(None) => {
                    return Err(ParseError::at(
                        ParseErrorKind::TruncatedPayload {
                            expected: n,
                            found: pixels.len(),
                        },
                        bytes.len(),
                    )
                    .into())
                }
                Err(_) => {
                    return Err(ParseError::at(
                        ParseErrorKind::BadSample("non-numeric sample".into()),
                        at,
                    )
                    .into())
                }
            };
            if v > header.maxval as u64 {
                return Err(ParseError::at(
                    ParseErrorKind::BadSample(format!("{v} exceeds maxval {}", header.maxval)),
                    at,
                )
                .into());
            }
            pixels.push(v as f64 / maxval);
        }
    } else {
        let wide = header.maxval > 255;
        let bps = if wide { 2 } else { 1 };
        let payload = &bytes[header.data_start..];
        if payload.len() < n * bps {
            return Err(ParseError::at(
                ParseErrorKind::TruncatedPayload {
                    expected: n,
                    found: payload.len() / bps,
                },
                bytes.len(),
            )
            .into());
        }
        for (i, chunk) in payload[..n * bps].chunks_exact(bps).enumerate() {
            let v = if wide {
                u16::from_be_bytes([chunk[0], chunk[1]])
            } else {
                chunk[0] as u16
            };
            if v > header.maxval {
                return Err(ParseError::at(
                    ParseErrorKind::BadSample(format!("{v} exceeds maxval {}", header.maxval)),
                    header.data_start + i * bps,
                )
                .into());
            }
            pixels.push(v as f64 / maxval);
        }
    }
    Image::new(header.width, header.height, pixels)
}

fn png_error(e: png::DecodingError) -> Error {
    ParseError::new(ParseErrorKind::MalformedHeader(format!("png: {e}"))).into()
}

fn read_png_gray(bytes: &[u8]) -> Result<Image> {
    let decoder = png::Decoder::new(bytes);
    let mut reader = decoder.read_info().map_err(png_error)?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(ParseError::new(ParseErrorKind::Unsupported(format!(
            "png {:?} {:?} (only 8-bit grayscale)",
            info.color_type, info.bit_depth
        )))
        .into());
    }
    let mut buf = vec![0; reader.output_buffer_size()];
    let frame = reader.next_frame(&mut buf).map_err(png_error)?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let pixels = buf[..frame.buffer_size()]
        .chunks_exact(frame.line_size)
        .flat_map(|line| line[..w].iter().map(|&b| b as f64 / 255.0))
        .collect();
    Image::new(w, h, pixels)
}

/// `round(v * 255)` clamped to `[0, 255]`.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "cannot encode {width}x{height}"
        )));
    }
    Ok(())
}

fn encode_gray8(
    width: usize,
    height: usize,
    samples: &[u8],
    format: ImageFileFormat,
) -> Result<Vec<u8>> {
    check_dims(width, height)?;
    match format {
        ImageFileFormat::PgmBinary => {
            let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
            out.extend_from_slice(samples);
            Ok(out)
        }
        ImageFileFormat::PgmAscii => {
            let mut out = format!("P2\n{width} {height}\n255\n");
            for row in samples.chunks(width) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            Ok(out.into_bytes())
        }
        ImageFileFormat::PngGray8 => encode_png(width, height, samples, png::ColorType::Grayscale),
        other => Err(Error::InvalidParams(format!(
            "{other:?} is not a grayscale format"
        ))),
    }
}

fn encode_png(width: usize, height: usize, data: &[u8], color: png::ColorType) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::InvalidImage(format!("png: {e}")))?;
        writer
            .write_image_data(data)
            .map_err(|e| Error::InvalidImage(format!("png: {e}")))?;
    }
    Ok(out)
}

/// Encodes a `[0, 1]` grayscale image as 8-bit PGM or PNG.
pub fn write_image(img: &Image, format: ImageFileFormat) -> Result<Vec<u8>> {
    let samples: Vec<u8> = img.pixels().iter().map(|&v| quantize(v)).collect();
    encode_gray8(img.width(), img.height(), &samples, format)
}

/// Foreground as 255, background as 0.
pub fn write_mask(mask: &BinaryMask, format: ImageFileFormat) -> Result<Vec<u8>> {
    let samples: Vec<u8> = mask
        .bits()
        .iter()
        .map(|&b| if b { 255 } else { 0 })
        .collect();
    encode_gray8(mask.width(), mask.height(), &samples, format)
}

pub fn write_overlay(ov: &OverlayImage, format: ImageFileFormat) -> Result<Vec<u8>> {
    check_dims(ov.width(), ov.height())?;
    let data: Vec<u8> = ov.pixels().iter().flatten().copied().collect();
    match format {
        ImageFileFormat::PpmBinary => {
            let mut out = format!("P6\n{} {}\n255\n", ov.width(), ov.height()).into_bytes();
            out.extend_from_slice(&data);
            Ok(out)
        }
        ImageFileFormat::PngRgb8 => encode_png(ov.width(), ov.height(), &data, png::ColorType::Rgb),
        other => {
            debug_assert!(!other.is_rgb());
            Err(Error::InvalidParams(format!(
                "{other:?} is not an RGB format"
            )))
        }
    }
}

/// One line of a metrics report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub image: String,
    pub level: usize,
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
    pub chosen: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    pub rows: Vec<ReportRow>,
}

impl MetricsReport {
    /// Appends every sweep entry for `image`, flagging `chosen` if given.
    pub fn push_sweep(&mut self, image: &str, sweep: &Sweep, chosen: Option<usize>) {
        self.rows.extend(sweep.entries.iter().map(|e| ReportRow {
            image: image.to_string(),
            level: e.level,
            counts: e.counts,
            metrics: e.metrics,
            chosen: chosen == Some(e.level),
        }));
    }
}

pub const CSV_HEADER: &str = "image,level,tp,fp,fn,tn,precision,recall,accuracy,f1,chosen";

fn csv_field(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"")).into()
    } else {
        s.into()
    }
}

/// Renders the report as LF-terminated CSV, rows ordered by `(image, level)`.
pub fn write_metrics_csv(report: &MetricsReport) -> Vec<u8> {
    let mut rows: Vec<&ReportRow> = report.rows.iter().collect();
    rows.sort_by(|a, b| a.image.cmp(&b.image).then(a.level.cmp(&b.level)));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let c = &r.counts;
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
            csv_field(&r.image),
            r.level,
            c.true_pos,
            c.false_pos,
            c.false_neg,
            c.true_neg,
            m.precision,
            m.recall,
            m.accuracy,
            m.f1,
            r.chosen
        );
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_pgm_decodes() {
        let img = read_image(b"P2\n3 2\n255\n0 128 255\n64 32 16\n").unwrap();
        assert_eq!(img.dims(), (3, 2));
        let expected = [
            0.0,
            128.0 / 255.0,
            1.0,
            64.0 / 255.0,
            32.0 / 255.0,
            16.0 / 255.0,
        ];
        assert_eq!(img.pixels(), &expected);
    }

    #[test]
    fn binary_pgm_endpoints() {
        let mut bytes = b"P5\n2 1\n255\n".to_vec();
        bytes.extend([0u8, 255]);
        assert_eq!(read_image(&bytes).unwrap().pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn sixteen_bit_pgm() {
        let mut bytes = b"P5 2 1 1000\n".to_vec();
        bytes.extend(500u16.to_be_bytes());
        bytes.extend(1000u16.to_be_bytes());
        assert_eq!(read_image(&bytes).unwrap().pixels(), &[0.5, 1.0]);
    }

    #[test]
    fn comments_skipped() {
        let img = read_image(b"P2\n# made by hand\n2 1 # dims\n# max\n4\n1 # a\n4\n").unwrap();
        assert_eq!(img.pixels(), &[0.25, 1.0]);
    }

    #[test]
    fn truncated_ascii_payload() {
        let err = read_image(b"P2\n3 2\n255\n1 2 3 4 5").unwrap_err();
        match err {
            Error::Parse(ParseError {
                kind:
                    ParseErrorKind::TruncatedPayload {
                        expected: 6,
                        found: 5,
                    },
                ..
            }) => {}
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn truncated_binary_payload() {
        let err = read_image(b"P5\n3 2\n255\nabc").unwrap_err();
        assert!(matches!(
            err,
            Error::Parse(ParseError {
                kind: ParseErrorKind::TruncatedPayload { .. },
                ..
            })
        ));
    }

    #[test]
    fn unsupported_and_bad_magic() {
        assert!(matches!(
            read_image(b"P6\n1 1\n255\n\0\0\0"),
            Err(Error::Parse(ParseError {
                kind: ParseErrorKind::Unsupported(_),
                ..
            }))
        ));
        assert!(matches!(
            read_image(b"GIF89a"),
            Err(Error::Parse(ParseError {
                kind: ParseErrorKind::BadMagic,
                offset: Some(0)
            }))
        ));
    }

    #[test]
    fn sample_over_maxval_rejected() {
        assert!(read_image(b"P2\n1 1\n10\n11\n").is_err());
    }

    #[test]
    fn mask_bytes() {
        let m = BinaryMask::new(2, 1, vec![true, false]).unwrap();
        let bytes = write_mask(&m, ImageFileFormat::PgmBinary).unwrap();
        assert_eq!(bytes, b"P5\n2 1\n255\n\xff\x00");
        assert_eq!(read_mask(&bytes).unwrap(), m);
    }

    #[test]
    fn quantization_rounds_half_away() {
        assert_eq!(quantize(0.5 / 255.0), 1);
        assert_eq!(quantize(-0.2), 0);
        assert_eq!(quantize(1.7), 255);
        assert_eq!(quantize(254.5 / 255.0), 255);
    }

    #[test]
    fn png_gray_round_trip() {
        let img = Image::from_fn(5, 3, |x, y| (x + 5 * y) as f64 / 14.0).unwrap();
        let bytes = write_image(&img, ImageFileFormat::PngGray8).unwrap();
        let back = read_image(&bytes).unwrap();
        assert!(back.max_abs_diff(&img).unwrap() <= 1.0 / 510.0);
    }

    #[test]
    fn rgb_png_rejected_as_grayscale_input() {
        let ov = crate::evaluation::overlay(
            &BinaryMask::new(2, 1, vec![true, false]).unwrap(),
            &BinaryMask::new(2, 1, vec![true, true]).unwrap(),
        )
        .unwrap();
        let bytes = write_overlay(&ov, ImageFileFormat::PngRgb8).unwrap();
        assert!(matches!(
            read_image(&bytes),
            Err(Error::Parse(ParseError {
                kind: ParseErrorKind::Unsupported(_),
                ..
            }))
        ));
    }

    #[test]
    fn empty_report_is_header_only() {
        let out = write_metrics_csv(&MetricsReport::default());
        assert_eq!(out, format!("{CSV_HEADER}\n").into_bytes());
    }

    #[test]
    fn csv_quotes_awkward_ids() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(
            ImageFileFormat::from_extension("PGM", false),
            Some(ImageFileFormat::PgmBinary)
        );
        assert_eq!(
            ImageFileFormat::from_extension("png", true),
            Some(ImageFileFormat::PngRgb8)
        );
        assert_eq!(ImageFileFormat::from_extension("ppm", false), None);
    }
}
