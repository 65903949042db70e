use std::path::{Path, PathBuf};

use crate::dataio::idx::{parse_idx_images, parse_idx_labels, read_idx_file, RawImages, RawLabels};
use crate::error::{Error, Result};
use crate::linalg::{argmax, Matrix, Vector};
use crate::rng::permutation;
use crate::scalar::Scalar;

pub const MNIST_SIDE: usize = 28;
pub const MNIST_PIXELS: usize = MNIST_SIDE * MNIST_SIDE;
pub const MNIST_CLASSES: usize = 10;

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

/// Maps each 28×28 image to a flat 784-vector with pixel `p` at `p / 255`.
pub fn normalize<T: Scalar>(raw: &RawImages) -> Result<Vec<Vector<T>>> {
    check_mnist_geometry(raw)?;
    Ok((0..raw.count)
        .map(|i| Vector::from_vec(raw.image(i).iter().map(|&p| pixel_value(p)).collect()))
        .collect())
}

#[inline]
fn pixel_value<T: Scalar>(p: u8) -> T {
    T::from_u8(p).unwrap() / T::from_u8(255).unwrap()
}

fn check_mnist_geometry(raw: &RawImages) -> Result<()> {
    if raw.rows * raw.cols != MNIST_PIXELS {
        return Err(Error::InvalidShape(format!(
            "expected {MNIST_SIDE}x{MNIST_SIDE} images, got {}x{}",
            raw.rows, raw.cols
        )));
    }
    Ok(())
}

/// Ten-component indicator vector for a digit label.
pub fn one_hot<T: Scalar>(label: usize) -> Result<Vector<T>> {
    one_hot_n(label, MNIST_CLASSES)
}

pub(crate) fn one_hot_n<T: Scalar>(label: usize, classes: usize) -> Result<Vector<T>> {
    if label >= classes {
        return Err(Error::InvalidValue(format!(
            "label {label} is outside 0..{classes}"
        )));
    }
    let mut v = Vector::zeros(classes);
    v[label] = T::one();
    Ok(v)
}

/// Input vectors with values in `[0, 1]` paired with one-hot targets.
///
/// Samples are stored contiguously so minibatches can be gathered into
/// matrices without per-sample allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T> {
    n: usize,
    input_width: usize,
    classes: usize,
    inputs: Vec<T>,
    targets: Vec<T>,
}

impl<T: Scalar> LabeledDataset<T> {
    /// Builds a dataset from explicit vectors, validating every invariant.
    pub fn new(inputs: Vec<Vector<T>>, targets: Vec<Vector<T>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::InvalidShape(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        let input_width = inputs.first().map_or(0, Vector::len);
        let classes = targets.first().map_or(0, Vector::len);
        let mut flat_in = Vec::with_capacity(inputs.len() * input_width);
        let mut flat_tg = Vec::with_capacity(targets.len() * classes);
        for (i, (x, y)) in inputs.iter().zip(&targets).enumerate() {
            if x.len() != input_width || y.len() != classes {
                return Err(Error::InvalidShape(format!(
                    "sample {i} has shape ({}, {}), expected ({input_width}, {classes})",
                    x.len(),
                    y.len()
                )));
            }
            if let Some(v) = x
                .as_slice()
                .iter()
                .find(|v| !(**v >= T::zero() && **v <= T::one()))
            {
                return Err(Error::InvalidValue(format!(
                    "input {i} has component {v} outside [0, 1]"
                )));
            }
            let ones = y.as_slice().iter().filter(|v| **v == T::one()).count();
            let zeros = y.as_slice().iter().filter(|v| **v == T::zero()).count();
            if ones != 1 || zeros != classes - 1 {
                return Err(Error::InvalidValue(format!("target {i} is not one-hot")));
            }
            flat_in.extend_from_slice(x.as_slice());
            flat_tg.extend_from_slice(y.as_slice());
        }
        Ok(Self {
            n: inputs.len(),
            input_width,
            classes,
            inputs: flat_in,
            targets: flat_tg,
        })
    }

    /// Normalizes images and one-hot encodes labels.
    pub fn from_raw(images: &RawImages, labels: &RawLabels) -> Result<Self> {
        check_mnist_geometry(images)?;
        if images.count != labels.count {
            return Err(Error::InvalidShape(format!(
                "{} images but {} labels",
                images.count, labels.count
            )));
        }
        let inputs = images.pixels.iter().map(|&p| pixel_value(p)).collect();
        let mut targets = vec![T::zero(); labels.count * MNIST_CLASSES];
        for (i, &label) in labels.labels.iter().enumerate() {
            if label as usize >= MNIST_CLASSES {
                return Err(Error::InvalidValue(format!("label {label} at index {i}")));
            }
            targets[i * MNIST_CLASSES + label as usize] = T::one();
        }
        Ok(Self {
            n: images.count,
            input_width: MNIST_PIXELS,
            classes: MNIST_CLASSES,
            inputs,
            targets,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn input_width(&self) -> usize {
        self.input_width
    }

    #[inline]
    pub fn classes(&self) -> usize {
        self.classes
    }

    #[inline]
    pub fn input(&self, i: usize) -> &[T] {
        &self.inputs[i * self.input_width..(i + 1) * self.input_width]
    }

    #[inline]
    pub fn target(&self, i: usize) -> &[T] {
        &self.targets[i * self.classes..(i + 1) * self.classes]
    }

    /// Class index of sample `i`.
    pub fn label(&self, i: usize) -> usize {
        argmax(self.target(i)).unwrap_or(0)
    }

    /// New dataset holding the given samples in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut inputs = Vec::with_capacity(indices.len() * self.input_width);
        let mut targets = Vec::with_capacity(indices.len() * self.classes);
        for &i in indices {
            inputs.extend_from_slice(self.input(i));
            targets.extend_from_slice(self.target(i));
        }
        Self {
            n: indices.len(),
            input_width: self.input_width,
            classes: self.classes,
            inputs,
            targets,
        }
    }

    /// The first `n` samples (or all of them if fewer).
    pub fn head(&self, n: usize) -> Self {
        let n = n.min(self.n);
        self.select(&(0..n).collect::<Vec<_>>())
    }

    /// Gathers the listed samples into an input matrix and a target matrix.
    pub fn gather(&self, indices: &[usize]) -> Result<(Matrix<T>, Matrix<T>)> {
        let sub = self.select(indices);
        Ok((
            Matrix::new(indices.len(), self.input_width, sub.inputs)?,
            Matrix::new(indices.len(), self.classes, sub.targets)?,
        ))
    }
}

/// One batch of samples; row `r` of both matrices belongs to `indices[r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Minibatch<T> {
    pub indices: Vec<usize>,
    pub inputs: Matrix<T>,
    pub targets: Matrix<T>,
}

impl<T> Minibatch<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Sample order for one epoch: `0..n` shuffled under `seed`, cut into
/// consecutive chunks of `batch_size` (the last one may be shorter).
pub fn batch_indices(n: usize, batch_size: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if batch_size < 1 || batch_size > n {
        return Err(Error::InvalidValue(format!(
            "batch size {batch_size} must lie in 1..={n}"
        )));
    }
    Ok(permutation(n, seed)
        .chunks(batch_size)
        .map(<[usize]>::to_vec)
        .collect())
}

/// Lazily gathered minibatches for one epoch.
pub struct Minibatches<'a, T> {
    ds: &'a LabeledDataset<T>,
    plan: std::vec::IntoIter<Vec<usize>>,
}

impl<T: Scalar> Iterator for Minibatches<'_, T> {
    type Item = Minibatch<T>;

    fn next(&mut self) -> Option<Minibatch<T>> {
        let indices = self.plan.next()?;
        let (inputs, targets) = self
            .ds
            .gather(&indices)
            .expect("batch indices are nonempty and in range");
        Some(Minibatch {
            indices,
            inputs,
            targets,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.plan.size_hint()
    }
}

impl<T: Scalar> ExactSizeIterator for Minibatches<'_, T> {}

/// Shuffles the dataset under `seed` and yields `⌈n/m⌉` minibatches covering
/// every sample exactly once.
pub fn minibatches<T: Scalar>(
    ds: &LabeledDataset<T>,
    batch_size: usize,
    seed: u64,
) -> Result<Minibatches<'_, T>> {
    Ok(Minibatches {
        ds,
        plan: batch_indices(ds.len(), batch_size, seed)?.into_iter(),
    })
}

/// Locations of the four standard MNIST files inside a directory.
#[derive(Debug, Clone)]
pub struct MnistFiles {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl MnistFiles {
    /// Resolves each standard file name, also accepting a `.gz` variant.
    pub fn locate(dir: &Path) -> Result<Self> {
        let find = |name: &str| -> Result<PathBuf> {
            let plain = dir.join(name);
            if plain.is_file() {
                return Ok(plain);
            }
            let gz = dir.join(format!("{name}.gz"));
            if gz.is_file() {
                return Ok(gz);
            }
            Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{} not found (also tried .gz)", plain.display()),
            )))
        };
        Ok(Self {
            train_images: find(TRAIN_IMAGES)?,
            train_labels: find(TRAIN_LABELS)?,
            test_images: find(TEST_IMAGES)?,
            test_labels: find(TEST_LABELS)?,
        })
    }
}

/// Raw training and test files parsed but not normalized.
#[derive(Debug, Clone)]
pub struct RawMnist {
    pub train_images: RawImages,
    pub train_labels: RawLabels,
    pub test_images: RawImages,
    pub test_labels: RawLabels,
}

impl RawMnist {
    pub fn load(dir: &Path) -> Result<Self> {
        let files = MnistFiles::locate(dir)?;
        Ok(Self {
            train_images: parse_idx_images(&read_idx_file(&files.train_images)?)?,
            train_labels: parse_idx_labels(&read_idx_file(&files.train_labels)?)?,
            test_images: parse_idx_images(&read_idx_file(&files.test_images)?)?,
            test_labels: parse_idx_labels(&read_idx_file(&files.test_labels)?)?,
        })
    }
}

/// Training and test splits ready for use.
#[derive(Debug, Clone)]
pub struct Mnist<T> {
    pub train: LabeledDataset<T>,
    pub test: LabeledDataset<T>,
}

impl<T: Scalar> Mnist<T> {
    pub fn load(dir: &Path) -> Result<Self> {
        let raw = RawMnist::load(dir)?;
        Ok(Self {
            train: LabeledDataset::from_raw(&raw.train_images, &raw.train_labels)?,
            test: LabeledDataset::from_raw(&raw.test_images, &raw.test_labels)?,
        })
    }
}
