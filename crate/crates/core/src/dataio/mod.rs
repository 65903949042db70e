//! MNIST IDX parsing, normalization, one-hot targets and seeded minibatching.

mod dataset;
mod idx;

#[cfg(test)]
pub(crate) use dataset::one_hot_n;
pub use dataset::{
    batch_indices, minibatches, normalize, one_hot, LabeledDataset, Minibatch, Minibatches, Mnist,
    MnistFiles, RawMnist, MNIST_CLASSES, MNIST_PIXELS, MNIST_SIDE, TEST_IMAGES, TEST_LABELS,
    TRAIN_IMAGES, TRAIN_LABELS,
};
pub use idx::{
    maybe_decompress, parse_idx_images, parse_idx_labels, read_idx_file, RawImages, RawLabels,
    IMAGES_MAGIC, LABELS_MAGIC,
};
