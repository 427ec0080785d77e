//! Sign Normalized Format: a fixed little-endian container for canonical
//! labeled images.
//!
//! ```text
//! "SNF1" | version u32 = 1 | count u32 | height u32 | width u32 | channels u32
//! labels: count × u8
//! pixels: count × H × W × C × f32
//! ```

use crate::numcore::Tensor;

use super::{ClassId, DataError, Dataset, LabeledImage, IMAGE_SIZE, NUM_CLASSES};

pub const SNF_MAGIC: [u8; 4] = *b"SNF1";
pub const SNF_VERSION: u32 = 1;
pub const SNF_HEADER_LEN: usize = 24;

pub fn snf_len(count: usize) -> usize {
    SNF_HEADER_LEN + count + 4 * count * IMAGE_SIZE * IMAGE_SIZE
}

pub fn write_snf(data: &Dataset) -> Vec<u8> {
    let n = data.len();
    let mut out = Vec::with_capacity(snf_len(n));
    out.extend_from_slice(&SNF_MAGIC);
    for v in [SNF_VERSION, n as u32, IMAGE_SIZE as u32, IMAGE_SIZE as u32, 1] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend(data.images.iter().map(|i| i.class_id.index() as u8));
    for img in &data.images {
        for v in img.pixels.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4 bytes"))
}

/// Parse an SNF buffer; images are tagged with `source_tag`.
pub fn read_snf(bytes: &[u8], source_tag: &str) -> Result<Dataset, DataError> {
    if bytes.len() < SNF_HEADER_LEN {
        return Err(DataError::SizeMismatch {
            expected: SNF_HEADER_LEN,
            actual: bytes.len(),
        });
    }
    if bytes[..4] != SNF_MAGIC {
        return Err(DataError::BadMagic {
            expected: SNF_MAGIC,
            found: bytes[..4].try_into().expect("4 bytes"),
        });
    }
    let version = u32_at(bytes, 4);
    if version != SNF_VERSION {
        return Err(DataError::UnsupportedVersion(version));
    }
    let count = u32_at(bytes, 8) as usize;
    let (h, w, c) = (u32_at(bytes, 12), u32_at(bytes, 16), u32_at(bytes, 20));
    if (h, w, c) != (IMAGE_SIZE as u32, IMAGE_SIZE as u32, 1) {
        return Err(DataError::NonCanonical(format!("SNF image shape {h}x{w}x{c}")));
    }
    let expected = count
        .checked_mul(1 + 4 * IMAGE_SIZE * IMAGE_SIZE)
        .and_then(|b| b.checked_add(SNF_HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(DataError::SizeMismatch {
            expected: expected.unwrap_or(usize::MAX),
            actual: bytes.len(),
        });
    }
    let labels = &bytes[SNF_HEADER_LEN..SNF_HEADER_LEN + count];
    let pixels = &bytes[SNF_HEADER_LEN + count..];
    let per = IMAGE_SIZE * IMAGE_SIZE * 4;
    let mut images = Vec::with_capacity(count);
    for (i, (&label, chunk)) in labels.iter().zip(pixels.chunks_exact(per)).enumerate() {
        if label as usize >= NUM_CLASSES {
            return Err(DataError::LabelOutOfRange { index: i, label });
        }
        let values = chunk
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
            .collect();
        let tensor = Tensor::new(&[IMAGE_SIZE, IMAGE_SIZE, 1], values).expect("canonical size");
        images.push(LabeledImage::new(tensor, ClassId::new(label as usize)?, source_tag)?);
    }
    Ok(Dataset::new(images))
}
