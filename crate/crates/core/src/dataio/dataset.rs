use crate::numcore::Tensor;

use super::{ClassId, DataError, IMAGE_SIZE, NUM_CLASSES};

/// One canonical 28×28×1 image in `[-1, 1]` with its class label.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledImage {
    pub pixels: Tensor<f32>,
    pub class_id: ClassId,
    pub source_tag: String,
}

impl LabeledImage {
    pub fn new(pixels: Tensor<f32>, class_id: ClassId, source_tag: impl Into<String>) -> Result<Self, DataError> {
        if pixels.shape() != [IMAGE_SIZE, IMAGE_SIZE, 1] {
            return Err(DataError::NonCanonical(format!("image shape {:?}", pixels.shape())));
        }
        if let Some(v) = pixels.data().iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(DataError::NonCanonical(format!("pixel value {v} outside [-1, 1]")));
        }
        Ok(Self {
            pixels,
            class_id,
            source_tag: source_tag.into(),
        })
    }
}

/// Ordered collection of labeled images.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub images: Vec<LabeledImage>,
}

impl Dataset {
    pub fn new(images: Vec<LabeledImage>) -> Self {
        Self { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn histogram(&self) -> [usize; NUM_CLASSES] {
        let mut h = [0; NUM_CLASSES];
        for img in &self.images {
            h[img.class_id.index()] += 1;
        }
        h
    }

    pub fn labels(&self) -> Vec<usize> {
        self.images.iter().map(|i| i.class_id.index()).collect()
    }

    pub fn only_class(&self, class: ClassId) -> Dataset {
        Dataset::new(self.images.iter().filter(|i| i.class_id == class).cloned().collect())
    }

    /// Append `other` after `self`.
    pub fn merged(mut self, other: &Dataset) -> Dataset {
        self.images.extend(other.images.iter().cloned());
        self
    }

    /// Stack the selected images into an `[n, 28, 28, 1]` batch.
    pub fn batch(&self, indices: &[usize]) -> Tensor<f32> {
        let per = IMAGE_SIZE * IMAGE_SIZE;
        let mut data = Vec::with_capacity(indices.len() * per);
        for &i in indices {
            data.extend_from_slice(self.images[i].pixels.data());
        }
        Tensor::new(&[indices.len(), IMAGE_SIZE, IMAGE_SIZE, 1], data).expect("canonical images")
    }
}
