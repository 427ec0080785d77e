//! PPM (P6) and PNG decoding to 8-bit RGB.

use std::io::Cursor;

use super::DataError;

/// 8-bit RGB raster, row-major, three bytes per pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Self {
        assert_eq!(pixels.len(), width * height * 3, "pixel buffer size");
        Self { width, height, pixels }
    }

    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        let i = (row * self.width + col) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    PpmP6,
    Png,
}

impl ImageFormat {
    /// Guess from a file extension (case-insensitive).
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "ppm" => Some(Self::PpmP6),
            "png" => Some(Self::Png),
            _ => None,
        }
    }
}

fn parse_err(offset: usize, reason: impl Into<String>) -> DataError {
    DataError::Parse {
        offset,
        reason: reason.into(),
    }
}

pub fn decode_image(bytes: &[u8], format: ImageFormat) -> Result<RgbImage, DataError> {
    match format {
        ImageFormat::PpmP6 => decode_ppm(bytes),
        ImageFormat::Png => decode_png(bytes),
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, DataError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(parse_err(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| parse_err(start, format!("{what} out of range")))
    }
}

/// Binary PPM with maxval 255.
pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage, DataError> {
    if bytes.len() < 2 {
        return Err(parse_err(bytes.len(), "truncated magic"));
    }
    if &bytes[..2] != b"P6" {
        return Err(parse_err(0, "missing P6 magic"));
    }
    let mut r = HeaderReader { bytes, pos: 2 };
    let width = r.number("width")?;
    let height = r.number("height")?;
    let max_start = r.pos;
    let maxval = r.number("maxval")?;
    if maxval != 255 {
        return Err(DataError::UnsupportedFormat(format!(
            "PPM maxval {maxval} at byte {max_start}; only 255 is supported"
        )));
    }
    match bytes.get(r.pos) {
        Some(b) if b.is_ascii_whitespace() => r.pos += 1,
        _ => return Err(parse_err(r.pos, "expected single whitespace after maxval")),
    }
    if width == 0 || height == 0 {
        return Err(parse_err(r.pos, "zero image dimension"));
    }
    let need = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(3))
        .ok_or_else(|| parse_err(r.pos, "image dimensions overflow"))?;
    let data = &bytes[r.pos..];
    if data.len() < need {
        return Err(parse_err(
            bytes.len(),
            format!("truncated pixel data: need {need} bytes, have {}", data.len()),
        ));
    }
    Ok(RgbImage::new(width, height, data[..need].to_vec()))
}

/// PNG of any color type/bit depth, converted to 8-bit RGB.
pub fn decode_png(bytes: &[u8]) -> Result<RgbImage, DataError> {
    const SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];
    if let Some(i) = SIGNATURE.iter().zip(bytes).position(|(a, b)| a != b) {
        return Err(parse_err(i, "invalid PNG signature"));
    }
    if bytes.len() < SIGNATURE.len() {
        return Err(parse_err(bytes.len(), "truncated PNG signature"));
    }
    let mut cursor = Cursor::new(bytes);
    let result = (|| {
        let mut decoder = png::Decoder::new(&mut cursor);
        decoder.set_transformations(png::Transformations::normalize_to_color8());
        let mut reader = decoder.read_info()?;
        let size = reader.output_buffer_size().unwrap_or(0);
        let mut buf = vec![0; size];
        let info = reader.next_frame(&mut buf)?;
        buf.truncate(info.buffer_size());
        Ok::<_, png::DecodingError>((info, buf))
    })();
    let (info, buf) = result.map_err(|e| parse_err(cursor.position() as usize, e.to_string()))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let pixels: Vec<u8> = match info.color_type {
        png::ColorType::Rgb => buf,
        png::ColorType::Rgba => buf.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
        png::ColorType::Grayscale => buf.iter().flat_map(|&g| [g, g, g]).collect(),
        png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).flat_map(|p| [p[0], p[0], p[0]]).collect(),
        png::ColorType::Indexed => {
            return Err(DataError::UnsupportedFormat("indexed PNG was not expanded".into()));
        }
    };
    Ok(RgbImage::new(w, h, pixels))
}

/// Encode RGB pixels as a binary PPM.
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// Encode RGB pixels as an 8-bit PNG.
pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>, DataError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(|e| DataError::Io(e.to_string()))?;
        writer
            .write_image_data(&img.pixels)
            .map_err(|e| DataError::Io(e.to_string()))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_built_p6() {
        let mut bytes = b"P6 2 2 255\n".to_vec();
        let px = [10u8, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120];
        bytes.extend_from_slice(&px);
        let img = decode_ppm(&bytes).unwrap();
        assert_eq!((img.width, img.height), (2, 2));
        assert_eq!(img.pixels, px);
        assert_eq!(img.get(1, 0), [70, 80, 90]);
    }

    #[test]
    fn p6_with_comment() {
        let mut bytes = b"P6\n# made by hand\n1 1\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3]);
        assert_eq!(decode_ppm(&bytes).unwrap().pixels, vec![1, 2, 3]);
    }

    #[test]
    fn p6_maxval_other_than_255_is_unsupported() {
        let mut bytes = b"P6 1 1 65535\n".to_vec();
        bytes.extend_from_slice(&[0; 6]);
        assert!(matches!(decode_ppm(&bytes), Err(DataError::UnsupportedFormat(_))));
    }

    #[test]
    fn p6_errors_carry_offsets() {
        assert!(matches!(
            decode_ppm(b"P5 1 1 255\n"),
            Err(DataError::Parse { offset: 0, .. })
        ));
        assert!(matches!(decode_ppm(b"P6 x"), Err(DataError::Parse { offset: 3, .. })));
        let truncated = b"P6 2 1 255\n\x01\x02\x03";
        assert!(matches!(
            decode_ppm(truncated),
            Err(DataError::Parse { offset: 14, .. })
        ));
    }

    #[test]
    fn white_png_pixel() {
        let img = RgbImage::new(1, 1, vec![255, 255, 255]);
        let bytes = encode_png(&img).unwrap();
        assert_eq!(decode_png(&bytes).unwrap().get(0, 0), [255, 255, 255]);
    }

    #[test]
    fn broken_png_reports_offset() {
        let img = RgbImage::new(3, 2, (0..18).collect());
        let bytes = encode_png(&img).unwrap();
        assert!(matches!(decode_png(&bytes[..20]), Err(DataError::Parse { .. })));
        let mut bad = bytes.clone();
        bad[1] = b'X';
        assert!(matches!(decode_png(&bad), Err(DataError::Parse { offset: 1, .. })));
    }
}
