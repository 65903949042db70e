//! Dense row-major matrices and vectors.
//!
//! Every binary operation checks shapes and returns [`Error::DimensionMismatch`]
//! on disagreement; there is no broadcasting. Reductions always accumulate in
//! ascending index order starting from zero, so the batched kernels used during
//! training produce bit-identical results to the per-sample operations here.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{mismatch, Error, Result};
use crate::scalar::Scalar;

/// Dense matrix stored as a flat row-major buffer.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Dense vector.
#[derive(Clone, PartialEq, Default)]
pub struct Vector<T> {
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    /// Wraps a row-major buffer. Fails if either dimension is zero or the
    /// buffer length is not `rows * cols`.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows, e.g. `Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]])`.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::InvalidShape(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Single-column matrix holding `v`.
    pub fn column(v: &Vector<T>) -> Result<Self> {
        Self::new(v.len(), 1, v.data.clone())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut out = vec![T::zero(); self.data.len()];
        transpose_into(self.rows, self.cols, &self.data, &mut out);
        Self {
            rows: self.cols,
            cols: self.rows,
            data: out,
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with("add", other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with("sub", other, |a, b| a - b)
    }

    pub fn scale(&self, factor: T) -> Self {
        self.map(|x| x * factor)
    }

    fn zip_with(&self, op: &'static str, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(mismatch(op, shape_str(self), shape_str(other)));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.shape() != other.shape() {
            return Err(mismatch("max_abs_diff", shape_str(self), shape_str(other)));
        }
        Ok(max_abs_diff(&self.data, &other.data))
    }
}

impl<T: Scalar> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(
            j < self.cols,
            "column {j} out of range for {} columns",
            self.cols
        );
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(
            j < self.cols,
            "column {j} out of range for {} columns",
            self.cols
        );
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} ", self.rows, self.cols)?;
        f.debug_list().entries(self.data.chunks(self.cols)).finish()
    }
}

impl<T: Scalar> Vector<T> {
    pub fn from_vec(data: Vec<T>) -> Self {
        Self { data }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![T::zero(); len],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Componentwise product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(mismatch("hadamard", self.len(), other.len()));
        }
        Ok(Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a * b)
                .collect(),
        })
    }

    /// Index of the largest component, lowest index on ties. `None` when empty.
    pub fn argmax(&self) -> Option<usize> {
        argmax(&self.data)
    }
}

impl<T> From<Vec<T>> for Vector<T> {
    fn from(data: Vec<T>) -> Self {
        Self { data }
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;

    #[inline]
    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}

impl<T> IndexMut<usize> for Vector<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.data[i]
    }
}

impl<T: fmt::Debug> fmt::Debug for Vector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vector{:?}", self.data)
    }
}

/// Matrix product `a · b`.
pub fn matmul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.cols != b.rows {
        return Err(mismatch("matmul", shape_str(a), shape_str(b)));
    }
    let mut out = vec![T::zero(); a.rows * b.cols];
    gemm(a.rows, a.cols, b.cols, &a.data, &b.data, &mut out);
    Ok(Matrix {
        rows: a.rows,
        cols: b.cols,
        data: out,
    })
}

/// Weighted input `W·a + b` of one layer.
pub fn affine<T: Scalar>(w: &Matrix<T>, a: &Vector<T>, b: &Vector<T>) -> Result<Vector<T>> {
    if w.cols != a.len() {
        return Err(mismatch(
            "affine (W·a)",
            shape_str(w),
            format!("vector of {}", a.len()),
        ));
    }
    if w.rows != b.len() {
        return Err(mismatch(
            "affine (+b)",
            shape_str(w),
            format!("bias of {}", b.len()),
        ));
    }
    let data = (0..w.rows)
        .map(|j| dot(w.row(j), &a.data) + b.data[j])
        .collect();
    Ok(Vector { data })
}

/// `Wᵀ v`, accumulated row by row of `W` so each entry sums in ascending
/// row order.
pub fn transpose_mul<T: Scalar>(w: &Matrix<T>, v: &Vector<T>) -> Result<Vector<T>> {
    if w.rows != v.len() {
        return Err(mismatch(
            "transpose_mul",
            shape_str(w),
            format!("vector of {}", v.len()),
        ));
    }
    let mut out = vec![T::zero(); w.cols];
    for (k, &vk) in v.data.iter().enumerate() {
        if vk == T::zero() {
            continue;
        }
        for (o, &wkj) in out.iter_mut().zip(w.row(k)) {
            *o += vk * wkj;
        }
    }
    Ok(Vector { data: out })
}

/// Outer product `u vᵀ`.
pub fn outer<T: Scalar>(u: &Vector<T>, v: &Vector<T>) -> Matrix<T> {
    Matrix::from_fn(u.len(), v.len(), |j, k| u[j] * v[k])
}

/// Types whose entries can be replaced one by one while keeping their shape.
pub trait Elementwise<T> {
    fn map_entries(&self, f: &dyn Fn(T) -> T) -> Self;
}

impl<T: Scalar> Elementwise<T> for Matrix<T> {
    fn map_entries(&self, f: &dyn Fn(T) -> T) -> Self {
        self.map(f)
    }
}

impl<T: Scalar> Elementwise<T> for Vector<T> {
    fn map_entries(&self, f: &dyn Fn(T) -> T) -> Self {
        self.map(f)
    }
}

/// Applies `f` to every entry of a matrix or vector.
pub fn map_elementwise<T, M: Elementwise<T>>(f: impl Fn(T) -> T, m: &M) -> M {
    m.map_entries(&f)
}

/// Ordered dot product. Zero left-hand entries are skipped; because the
/// running sum starts at `+0.0` it can never become `-0.0`, so skipping
/// `±0` products does not change the result for finite inputs.
#[inline]
pub(crate) fn dot<T: Scalar>(lhs: &[T], rhs: &[T]) -> T {
    let mut acc = T::zero();
    for (&x, &y) in lhs.iter().zip(rhs) {
        if y != T::zero() {
            acc += x * y;
        }
    }
    acc
}

const COL_BLOCK: usize = 256;

/// `c = a · b` for row-major `a: m×k`, `b: k×n`, `c: m×n`.
///
/// Each output entry accumulates its `k` products in ascending order, which
/// matches [`dot`] exactly. Columns are processed in blocks so the slice of
/// `b` being reused across rows of `a` stays cache resident. Zero entries of
/// `a` are skipped; activations after relu and raw pixels are mostly zero.
pub(crate) fn gemm<T: Scalar>(m: usize, k: usize, n: usize, a: &[T], b: &[T], c: &mut [T]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    c.fill(T::zero());
    for j0 in (0..n).step_by(COL_BLOCK) {
        let j1 = (j0 + COL_BLOCK).min(n);
        for i in 0..m {
            let a_row = &a[i * k..(i + 1) * k];
            let c_row = &mut c[i * n + j0..i * n + j1];
            for (t, &a_it) in a_row.iter().enumerate() {
                if a_it == T::zero() {
                    continue;
                }
                let b_row = &b[t * n + j0..t * n + j1];
                for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                    *cv += a_it * bv;
                }
            }
        }
    }
}

pub(crate) fn transpose_into<T: Scalar>(rows: usize, cols: usize, src: &[T], dst: &mut [T]) {
    const TILE: usize = 32;
    for i0 in (0..rows).step_by(TILE) {
        for j0 in (0..cols).step_by(TILE) {
            for i in i0..(i0 + TILE).min(rows) {
                for j in j0..(j0 + TILE).min(cols) {
                    dst[j * rows + i] = src[i * cols + j];
                }
            }
        }
    }
}

pub(crate) fn argmax<T: Scalar>(values: &[T]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

pub(crate) fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(T::zero(), T::max)
}

fn shape_str<T>(m: &Matrix<T>) -> String {
    format!("{}x{}", m.rows, m.cols)
}
