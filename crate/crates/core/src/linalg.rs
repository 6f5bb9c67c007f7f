//! Dense complex vectors and matrices, plus the three numerical kernels the
//! rest of the crate leans on: a null-space solve at a known eigenvalue, the
//! action of a matrix exponential, and the numerical rank of a set of vectors.
//!
//! Everything here is small and dense. Dimensions of interest stay below a
//! few hundred, so no attempt is made at blocking or sparsity.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative pivot tolerance used when callers have no better idea.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An ordered list of complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVec(Vec<Complex64>);

impl ComplexVec {
    pub fn new(entries: Vec<Complex64>) -> Self {
        ComplexVec(entries)
    }

    pub fn zeros(len: usize) -> Self {
        ComplexVec(vec![ZERO; len])
    }

    pub fn from_real(entries: &[f64]) -> Self {
        ComplexVec(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Unit vector along `index`.
    pub fn basis(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[index] = ONE;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`, conjugate-linear in the first slot.
    pub fn inner(&self, other: &ComplexVec) -> Complex64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, factor: Complex64) -> ComplexVec {
        ComplexVec(self.0.iter().map(|z| z * factor).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn normalized(&self) -> Result<ComplexVec> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        if !n.is_finite() {
            return Err(Error::NonFinite("vector norm".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    /// Rotates the global phase so the first nonzero entry is real and positive.
    pub fn with_fixed_phase(&self) -> ComplexVec {
        match self.0.iter().find(|z| z.norm_sqr() > 0.0) {
            Some(first) => {
                let phase = first.conj() / first.norm();
                self.scale(phase)
            }
            None => self.clone(),
        }
    }

    /// `|<self|other>|` for two normalized vectors.
    pub fn fidelity(&self, other: &ComplexVec) -> f64 {
        self.inner(other).norm()
    }

    pub fn max_abs_diff(&self, other: &ComplexVec) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for ComplexVec {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ComplexVec {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Sub for &ComplexVec {
    type Output = ComplexVec;
    fn sub(self, rhs: &ComplexVec) -> ComplexVec {
        ComplexVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for &ComplexVec {
    type Output = ComplexVec;
    fn add(self, rhs: &ComplexVec) -> ComplexVec {
        ComplexVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl FromIterator<Complex64> for ComplexVec {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        ComplexVec(iter.into_iter().collect())
    }
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMat {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(ComplexMat { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMat {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMat {
        ComplexMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn adjoint(&self) -> ComplexMat {
        ComplexMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (largest absolute column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, v: &ComplexVec) -> Result<ComplexVec> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
            })
            .collect())
    }

    pub fn matmul(&self, other: &ComplexMat) -> Result<ComplexMat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = ComplexMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &ComplexMat) -> Result<ComplexMat> {
        Ok(&self.matmul(other)? - &other.matmul(self)?)
    }

    pub fn kron(&self, other: &ComplexMat) -> ComplexMat {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        ComplexMat::from_fn(rows, cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn pow(&self, exponent: u32) -> Result<ComplexMat> {
        let n = self.require_square()?;
        let mut out = ComplexMat::identity(n);
        for _ in 0..exponent {
            out = out.matmul(self)?;
        }
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMat {
    type Output = ComplexMat;
    fn add(self, rhs: &ComplexMat) -> ComplexMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMat {
    type Output = ComplexMat;
    fn sub(self, rhs: &ComplexMat) -> ComplexMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<Complex64> for &ComplexMat {
    type Output = ComplexMat;
    fn mul(self, rhs: Complex64) -> ComplexMat {
        self.scale(rhs)
    }
}

/// Unit vector spanning the null space of `m - lambda * I`.
///
/// Gaussian elimination with partial pivoting; a candidate pivot counts as
/// zero when its magnitude is at most `tol` times the largest column norm of
/// `m - lambda * I`. Exactly one free column is required. The returned vector
/// has its first nonzero entry real and positive and satisfies
/// `|(m - lambda I) v| <= tol * |m|_F`.
pub fn null_space_vector(m: &ComplexMat, lambda: Complex64, tol: f64) -> Result<ComplexVec> {
    let n = m.require_square()?;
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= lambda;
    }
    let shifted = a.clone();
    let scale = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let threshold = tol * scale;

    let mut pivot_cols = Vec::with_capacity(n);
    let mut row = 0;
    for col in 0..n {
        if row == n {
            break;
        }
        let (p, mag) = (row..n)
            .map(|r| (r, a[(r, col)].norm()))
            .fold((row, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag <= threshold {
            continue;
        }
        if p != row {
            for j in 0..n {
                let tmp = a[(p, j)];
                a[(p, j)] = a[(row, j)];
                a[(row, j)] = tmp;
            }
        }
        let pivot = a[(row, col)];
        for r in row + 1..n {
            let factor = a[(r, col)] / pivot;
            if factor == ZERO {
                continue;
            }
            a[(r, col)] = ZERO;
            for j in col + 1..n {
                let upd = factor * a[(row, j)];
                a[(r, j)] -= upd;
            }
        }
        pivot_cols.push(col);
        row += 1;
    }

    let dimension = n - pivot_cols.len();
    if dimension != 1 {
        return Err(Error::NullSpaceDimension { dimension });
    }
    let free = (0..n).find(|c| !pivot_cols.contains(c)).expect("one free column");

    let mut x = vec![ZERO; n];
    x[free] = ONE;
    for (i, &col) in pivot_cols.iter().enumerate().rev() {
        let s: Complex64 = (col + 1..n).map(|j| a[(i, j)] * x[j]).sum();
        x[col] = -s / a[(i, col)];
    }
    let v = ComplexVec::new(x).normalized()?.with_fixed_phase();
    if !v.is_finite() {
        return Err(Error::NonFinite("null-space vector".into()));
    }

    let residual = shifted.matvec(&v)?.norm();
    let bound = tol * m.frobenius_norm();
    if residual > bound && residual > f64::EPSILON {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance: bound,
        });
    }
    Ok(v)
}

/// `exp(m) v` by scaling and squaring a truncated Taylor series.
pub fn expm_action(m: &ComplexMat, v: &ComplexVec) -> Result<ComplexVec> {
    let n = m.require_square()?;
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    let norm = m.norm_one();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m.scale(Complex64::new(0.5f64.powi(squarings), 0.0));

    let mut expo = ComplexMat::identity(n);
    let mut term = ComplexMat::identity(n);
    for k in 1..=40 {
        term = term.matmul(&scaled)?.scale(Complex64::new(1.0 / k as f64, 0.0));
        expo = &expo + &term;
        if term.max_abs() <= 1e-18 * expo.max_abs().max(1.0) {
            break;
        }
    }
    for _ in 0..squarings {
        expo = expo.matmul(&expo)?;
    }
    let out = expo.matvec(v)?;
    if !out.is_finite() {
        return Err(Error::NonFinite("matrix exponential".into()));
    }
    Ok(out)
}

/// Numerical rank of the Gram matrix `G_ij = <v_i|v_j>`.
///
/// Pivoted Cholesky: pivots are taken in decreasing order of the remaining
/// diagonal, and counted while they exceed `tol` times the largest initial
/// diagonal entry.
pub fn gram_rank(vectors: &[ComplexVec], tol: f64) -> Result<usize> {
    let first = vectors.first().ok_or(Error::EmptyInput)?;
    let dim = first.len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    let k = vectors.len();
    let mut g = ComplexMat::from_fn(k, k, |i, j| vectors[i].inner(&vectors[j]));
    let largest = (0..k).map(|i| g[(i, i)].re).fold(0.0, f64::max);
    if largest <= 0.0 {
        return Ok(0);
    }
    let mut remaining: Vec<usize> = (0..k).collect();
    let mut rank = 0;
    while !remaining.is_empty() {
        let (pos, &p) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| g[(*a.1, *a.1)].re.total_cmp(&g[(*b.1, *b.1)].re))
            .expect("non-empty");
        let pivot = g[(p, p)].re;
        if pivot <= tol * largest {
            break;
        }
        rank += 1;
        remaining.swap_remove(pos);
        for &i in &remaining {
            for &j in &remaining {
                let upd = g[(i, p)] * g[(p, j)] / pivot;
                g[(i, j)] -= upd;
            }
        }
    }
    Ok(rank)
}
