//! Dense row-major matrices and rank-3 arrays, plus the matrix products the
//! layers are built on.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Dense row-major 2D array.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "Matrix::from_vec",
                format!("{}x{}={} elements", rows, cols, rows * cols),
                data.len(),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Single-row matrix borrowing its contents from a slice.
    pub fn from_row(row: &[F]) -> Self {
        Matrix {
            rows: 1,
            cols: row.len(),
            data: row.to_vec(),
        }
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
    pub fn row(&self, r: usize) -> &[F] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [F] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> F {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: F) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn data(&self) -> &[F] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<F> {
        self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(F) -> F + Sync) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self · rhs`
    pub fn dot(&self, rhs: &Matrix<F>) -> Result<Matrix<F>> {
        if self.cols != rhs.rows {
            return Err(Error::shape(
                "Matrix::dot",
                format!("lhs cols == rhs rows ({})", self.cols),
                rhs.rows,
            ));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        gemm_nn(
            self.rows, self.cols, rhs.cols, &self.data, &rhs.data, &mut out.data,
        );
        Ok(out)
    }

    /// `selfᵀ · rhs`
    pub fn t_dot(&self, rhs: &Matrix<F>) -> Result<Matrix<F>> {
        if self.rows != rhs.rows {
            return Err(Error::shape(
                "Matrix::t_dot",
                format!("lhs rows == rhs rows ({})", self.rows),
                rhs.rows,
            ));
        }
        let mut out = Matrix::zeros(self.cols, rhs.cols);
        gemm_tn(
            self.rows, self.cols, rhs.cols, &self.data, &rhs.data, &mut out.data,
        );
        Ok(out)
    }

    /// `self · rhsᵀ`
    pub fn dot_t(&self, rhs: &Matrix<F>) -> Result<Matrix<F>> {
        if self.cols != rhs.cols {
            return Err(Error::shape(
                "Matrix::dot_t",
                format!("lhs cols == rhs cols ({})", self.cols),
                rhs.cols,
            ));
        }
        let mut out = Matrix::zeros(self.rows, rhs.rows);
        gemm_nt(
            self.rows, self.cols, rhs.rows, &self.data, &rhs.data, &mut out.data,
        );
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix<F> {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// Column sums as a vector of length `cols`.
    pub fn col_sums(&self) -> Vec<F> {
        let mut out = vec![F::zero(); self.cols];
        for r in 0..self.rows {
            axpy(&mut out, F::one(), self.row(r));
        }
        out
    }

    /// Add `bias` to every row.
    pub fn add_row_vector(&mut self, bias: &[F]) {
        debug_assert_eq!(bias.len(), self.cols);
        for r in 0..self.rows {
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (o, b) in row.iter_mut().zip(bias) {
                *o += *b;
            }
        }
    }

    /// Elementwise `self += other`.
    pub fn add_assign(&mut self, other: &Matrix<F>) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                "Matrix::add_assign",
                format!("{:?}", self.shape()),
                format!("{:?}", other.shape()),
            ));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Matrix<F>) -> F {
        debug_assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(F::zero(), F::max)
    }
}

/// Dense row-major rank-3 array with shape `(d0, d1, d2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<F> {
    d0: usize,
    d1: usize,
    d2: usize,
    data: Vec<F>,
}

impl<F: Scalar> Tensor3<F> {
    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Tensor3 {
            d0,
            d1,
            d2,
            data: vec![F::zero(); d0 * d1 * d2],
        }
    }

    pub fn from_vec(d0: usize, d1: usize, d2: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != d0 * d1 * d2 {
            return Err(Error::shape(
                "Tensor3::from_vec",
                d0 * d1 * d2,
                data.len(),
            ));
        }
        Ok(Tensor3 { d0, d1, d2, data })
    }

    pub fn from_fn(d0: usize, d1: usize, d2: usize, mut f: impl FnMut(usize, usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(d0 * d1 * d2);
        for i in 0..d0 {
            for j in 0..d1 {
                for k in 0..d2 {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 { d0, d1, d2, data }
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.d0, self.d1, self.d2)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> F {
        self.data[(i * self.d1 + j) * self.d2 + k]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize, k: usize) -> &mut F {
        &mut self.data[(i * self.d1 + j) * self.d2 + k]
    }

    /// Contiguous innermost slice at `(i, j, ..)`>
    #[inline]
    pub fn inner(&self, i: usize, j: usize) -> &[F] {
        let start = (i * self.d1 + j) * self.d2;
        &self.data[start..start + self.d2]
    }

    #[inline]
    pub fn inner_mut(&mut self, i: usize, j: usize) -> &mut [F] {
        let start = (i * self.d1 + j) * self.d2;
        &mut self.data[start..start + self.d2]
    }

    #[inline]
    pub fn data(&self) -> &[F] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `dst(c×r) = src(r×c)ᵀ`, blocked for cache-friendly strided access.
fn transpose_into<F: Scalar>(r: usize, c: usize, src: &[F], dst: &mut [F]) {
    debug_assert_eq!(src.len(), r * c);
    debug_assert_eq!(dst.len(), r * c);
    const TILE: usize = 32;
    for i0 in (0..r).step_by(TILE) {
        for j0 in (0..c).step_by(TILE) {
            for i in i0..(i0 + TILE).min(r) {
                for j in j0..(j0 + TILE).min(c) {
                    dst[j * r + i] = src[i * c + j];
                }
            }
        }
    }
}

/// `y += a * x`, elementwise.
#[inline]
pub(crate) fn axpy<F: Scalar>(y: &mut [F], a: F, x: &[F]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = a.mul_add(xi, *yi);
    }
}

/// Dot product with split accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [F::zero(); 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = i * 4;
        acc[0] = a[j].mul_add(b[j], acc[0]);
        acc[1] = a[j + 1].mul_add(b[j + 1], acc[1]);
        acc[2] = a[j + 2].mul_add(b[j + 2], acc[2]);
        acc[3] = a[j + 3].mul_add(b[j + 3], acc[3]);
    }
    let mut tail = F::zero();
    for j in chunks * 4..a.len() {
        tail = a[j].mul_add(b[j], tail);
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail
}

const PAR_FLOP_THRESHOLD: usize = 1 << 20;

// The kernels below block the output rows in groups of 4 so the streamed
// operand is loaded once per group instead of once per row; with only a few
// dozen output columns this is the difference between bandwidth-bound and
// compute-bound.
const ROW_BLOCK: usize = 4;

/// `out = a(m×k) · b(k×n)`, row-parallel when large.
pub(crate) fn gemm_nn<F: Scalar>(m: usize, k: usize, n: usize, a: &[F], b: &[F], out: &mut [F]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    let block_body = |i0: usize, out_block: &mut [F]| {
        let rows_here = out_block.len() / n;
        if rows_here == ROW_BLOCK {
            let (o0, rest) = out_block.split_at_mut(n);
            let (o1, rest) = rest.split_at_mut(n);
            let (o2, o3) = rest.split_at_mut(n);
            // two reduction steps per pass: 8 fma per out-element update
            let k_pairs = k / 2 * 2;
            let mut kk = 0;
            while kk < k_pairs {
                let b_row = &b[kk * n..(kk + 1) * n];
                let c_row = &b[(kk + 1) * n..(kk + 2) * n];
                let a00 = a[i0 * k + kk];
                let a01 = a[i0 * k + kk + 1];
                let a10 = a[(i0 + 1) * k + kk];
                let a11 = a[(i0 + 1) * k + kk + 1];
                let a20 = a[(i0 + 2) * k + kk];
                let a21 = a[(i0 + 2) * k + kk + 1];
                let a30 = a[(i0 + 3) * k + kk];
                let a31 = a[(i0 + 3) * k + kk + 1];
                for j in 0..n {
                    let bj = b_row[j];
                    let cj = c_row[j];
                    o0[j] = a01.mul_add(cj, a00.mul_add(bj, o0[j]));
                    o1[j] = a11.mul_add(cj, a10.mul_add(bj, o1[j]));
                    o2[j] = a21.mul_add(cj, a20.mul_add(bj, o2[j]));
                    o3[j] = a31.mul_add(cj, a30.mul_add(bj, o3[j]));
                }
                kk += 2;
            }
            while kk < k {
                let b_row = &b[kk * n..(kk + 1) * n];
                axpy(o0, a[i0 * k + kk], b_row);
                axpy(o1, a[(i0 + 1) * k + kk], b_row);
                axpy(o2, a[(i0 + 2) * k + kk], b_row);
                axpy(o3, a[(i0 + 3) * k + kk], b_row);
                kk += 1;
            }
        } else {
            for (local, out_row) in out_block.chunks_mut(n).enumerate() {
                let i = i0 + local;
                for kk in 0..k {
                    axpy(out_row, a[i * k + kk], &b[kk * n..(kk + 1) * n]);
                }
            }
        }
    };
    if m * k * n >= PAR_FLOP_THRESHOLD && m > ROW_BLOCK {
        out.par_chunks_mut(ROW_BLOCK * n)
            .enumerate()
            .for_each(|(ci, out_block)| block_body(ci * ROW_BLOCK, out_block));
    } else {
        for (ci, out_block) in out.chunks_mut(ROW_BLOCK * n).enumerate() {
            block_body(ci * ROW_BLOCK, out_block);
        }
    }
}

/// `out(c_a×n) = a(r×c_a)ᵀ · b(r×n)`; blocks the reduction dimension so
/// four `b` rows stay hot across each output-row pass.
pub(crate) fn gemm_tn<F: Scalar>(r: usize, c_a: usize, n: usize, a: &[F], b: &[F], out: &mut [F]) {
    debug_assert_eq!(a.len(), r * c_a);
    debug_assert_eq!(b.len(), r * n);
    debug_assert_eq!(out.len(), c_a * n);
    let chunk_body = |i0: usize, out_chunk: &mut [F]| {
        let rows_here = out_chunk.len() / n;
        let r_blocks = r / ROW_BLOCK * ROW_BLOCK;
        let mut kk = 0;
        while kk < r_blocks {
            let b0 = &b[kk * n..(kk + 1) * n];
            let b1 = &b[(kk + 1) * n..(kk + 2) * n];
            let b2 = &b[(kk + 2) * n..(kk + 3) * n];
            let b3 = &b[(kk + 3) * n..(kk + 4) * n];
            let a0 = &a[kk * c_a..(kk + 1) * c_a];
            let a1 = &a[(kk + 1) * c_a..(kk + 2) * c_a];
            let a2 = &a[(kk + 2) * c_a..(kk + 3) * c_a];
            let a3 = &a[(kk + 3) * c_a..(kk + 4) * c_a];
            for local in 0..rows_here {
                let i = i0 + local;
                let (c0, c1, c2, c3) = (a0[i], a1[i], a2[i], a3[i]);
                let out_row = &mut out_chunk[local * n..(local + 1) * n];
                for j in 0..n {
                    let v = c0.mul_add(b0[j], c1.mul_add(b1[j], c2.mul_add(b2[j], c3 * b3[j])));
                    out_row[j] += v;
                }
            }
            kk += ROW_BLOCK;
        }
        while kk < r {
            let a_row = &a[kk * c_a..(kk + 1) * c_a];
            let b_row = &b[kk * n..(kk + 1) * n];
            for local in 0..rows_here {
                axpy(&mut out_chunk[local * n..(local + 1) * n], a_row[i0 + local], b_row);
            }
            kk += 1;
        }
    };
    if r * c_a * n >= PAR_FLOP_THRESHOLD && c_a > 1 {
        let threads = rayon::current_num_threads().max(1);
        let chunk_rows = c_a.div_ceil(threads).max(1);
        out.par_chunks_mut(chunk_rows * n)
            .enumerate()
            .for_each(|(ci, out_chunk)| chunk_body(ci * chunk_rows, out_chunk));
    } else {
        chunk_body(0, out);
    }
}

/// `out(m×n) = a(m×k) · b(n×k)ᵀ`.
///
/// Large products transpose `b` once and run the streaming `gemm_nn`
/// kernel; the inner-product layout is kept only for small inputs.
pub(crate) fn gemm_nt<F: Scalar>(m: usize, k: usize, n: usize, a: &[F], b: &[F], out: &mut [F]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), n * k);
    debug_assert_eq!(out.len(), m * n);
    if m * k * n >= PAR_FLOP_THRESHOLD {
        let mut bt = vec![F::zero(); k * n];
        transpose_into(n, k, b, &mut bt);
        gemm_nn(m, k, n, a, &bt, out);
        return;
    }
    let block_body = |i0: usize, out_block: &mut [F]| {
        let rows_here = out_block.len() / n;
        if rows_here == ROW_BLOCK {
            let a0 = &a[i0 * k..(i0 + 1) * k];
            let a1 = &a[(i0 + 1) * k..(i0 + 2) * k];
            let a2 = &a[(i0 + 2) * k..(i0 + 3) * k];
            let a3 = &a[(i0 + 3) * k..(i0 + 4) * k];
            for j in 0..n {
                let b_row = &b[j * k..(j + 1) * k];
                let mut s0 = F::zero();
                let mut s1 = F::zero();
                let mut s2 = F::zero();
                let mut s3 = F::zero();
                for t in 0..k {
                    let bt = b_row[t];
                    s0 = a0[t].mul_add(bt, s0);
                    s1 = a1[t].mul_add(bt, s1);
                    s2 = a2[t].mul_add(bt, s2);
                    s3 = a3[t].mul_add(bt, s3);
                }
                out_block[j] = s0;
                out_block[n + j] = s1;
                out_block[2 * n + j] = s2;
                out_block[3 * n + j] = s3;
            }
        } else {
            for (local, out_row) in out_block.chunks_mut(n).enumerate() {
                let a_row = &a[(i0 + local) * k..(i0 + local + 1) * k];
                for (j, o) in out_row.iter_mut().enumerate() {
                    *o = dot(a_row, &b[j * k..(j + 1) * k]);
                }
            }
        }
    };
    if m * k * n >= PAR_FLOP_THRESHOLD && m > ROW_BLOCK {
        out.par_chunks_mut(ROW_BLOCK * n)
            .enumerate()
            .for_each(|(ci, out_block)| block_body(ci * ROW_BLOCK, out_block));
    } else {
        for (ci, out_block) in out.chunks_mut(ROW_BLOCK * n).enumerate() {
            block_body(ci * ROW_BLOCK, out_block);
        }
    }
}
