use std::fs;
use std::path::Path;

use super::{decode_image, preprocess, ClassId, DataError, Dataset, ImageFormat, LabeledImage, IMAGE_SIZE};

/// Load `<root>/<class_id>/<image files>` into canonical images.
///
/// Class directories are visited in id order and files in name order, so
/// the result is independent of directory listing order. Files with other
/// extensions are skipped.
pub fn ingest_directory(root: &Path, source_tag: &str) -> Result<Dataset, DataError> {
    let mut images = Vec::new();
    for class in ClassId::all() {
        let dir = root.join(class.index().to_string());
        if !dir.is_dir() {
            continue;
        }
        let mut files: Vec<_> = fs::read_dir(&dir)
            .map_err(|e| DataError::Io(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for path in files {
            let Some(format) = path
                .extension()
                .and_then(|e| e.to_str())
                .and_then(ImageFormat::from_extension)
            else {
                continue;
            };
            let bytes = fs::read(&path).map_err(|e| DataError::Io(format!("{}: {e}", path.display())))?;
            let rgb = decode_image(&bytes, format).map_err(|e| DataError::InFile {
                path: path.display().to_string(),
                source: Box::new(e),
            })?;
            images.push(LabeledImage::new(preprocess(&rgb, IMAGE_SIZE), class, source_tag)?);
        }
    }
    Ok(Dataset::new(images))
}
