//! Real/complex scalar abstraction and a small column-major matrix.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::rng::RandomStream;

/// Selects the orthogonal/GOE (`Real`) or unitary/GUE (`Complex`) conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Real,
    Complex,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Real => "real",
            FieldKind::Complex => "complex",
        }
    }
}

impl std::fmt::Display for FieldKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scalar field the Gaussian columns live in.
///
/// Method names avoid clashing with `nalgebra::ComplexField`, which is also
/// implemented for both scalar types.
pub trait FieldScalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const FIELD: FieldKind;
    const ZERO: Self;
    const ONE: Self;

    fn from_re(x: f64) -> Self;
    fn real_part(self) -> f64;
    fn conjugate_value(self) -> Self;
    fn abs_sqr(self) -> f64;
    fn rescale(self, s: f64) -> Self;
    /// `z / |z|`, or one for `z = 0`.
    fn unit_phase(self) -> Self;
    /// One standard field Gaussian: variance one for `Real`, `E|z|² = 1`
    /// (each component variance ½) for `Complex`.
    fn standard_gaussian(stream: &mut RandomStream) -> Self;

    fn abs_value(self) -> f64 {
        self.abs_sqr().sqrt()
    }
}

impl FieldScalar for f64 {
    const FIELD: FieldKind = FieldKind::Real;
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    #[inline]
    fn from_re(x: f64) -> Self {
        x
    }
    #[inline]
    fn real_part(self) -> f64 {
        self
    }
    #[inline]
    fn conjugate_value(self) -> Self {
        self
    }
    #[inline]
    fn abs_sqr(self) -> f64 {
        self * self
    }
    #[inline]
    fn rescale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn unit_phase(self) -> Self {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
    #[inline]
    fn standard_gaussian(stream: &mut RandomStream) -> Self {
        stream.next_gaussian()
    }
    #[inline]
    fn abs_value(self) -> f64 {
        self.abs()
    }
}

impl FieldScalar for Complex64 {
    const FIELD: FieldKind = FieldKind::Complex;
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);

    #[inline]
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn real_part(self) -> f64 {
        self.re
    }
    #[inline]
    fn conjugate_value(self) -> Self {
        self.conj()
    }
    #[inline]
    fn abs_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    #[inline]
    fn rescale(self, s: f64) -> Self {
        Complex64::new(self.re * s, self.im * s)
    }
    #[inline]
    fn unit_phase(self) -> Self {
        let r = self.abs_value();
        if r == 0.0 {
            Self::ONE
        } else {
            self.rescale(1.0 / r)
        }
    }
    #[inline]
    fn standard_gaussian(stream: &mut RandomStream) -> Self {
        let (a, b) = stream.next_gaussian_pair();
        Complex64::new(a * std::f64::consts::FRAC_1_SQRT_2, b * std::f64::consts::FRAC_1_SQRT_2)
    }
}

/// `⟨x, y⟩ = Σ conj(x_j) y_j`.
#[inline]
pub fn inner<T: FieldScalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .fold(T::ZERO, |acc, (&a, &b)| acc + a.conjugate_value() * b)
}

#[inline]
pub fn norm_sqr<T: FieldScalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.abs_sqr()).sum()
}

/// Dense column-major matrix. Columns are the vectors of interest throughout
/// the crate (Gaussian columns `y_i`, Gram–Schmidt columns `γ_i`).
#[derive(Debug, Clone, PartialEq)]
pub struct ColMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: FieldScalar> ColMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::ZERO; rows * cols],
        }
    }

    /// Builds from column-major data; `data.len()` must equal `rows * cols`.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> crate::Result<Self> {
        if data.len() != rows * cols {
            return Err(crate::Error::arg(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_columns(columns: &[Vec<T>]) -> crate::Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(crate::Error::arg("columns have unequal lengths"));
        }
        let data = columns.iter().flatten().copied().collect();
        Ok(Self { rows, cols, data })
    }

    /// First `k` columns of the `n×n` identity.
    pub fn identity_columns(n: usize, k: usize) -> Self {
        let mut m = Self::zeros(n, k);
        for j in 0..k.min(n) {
            m.set(j, j, T::ONE);
        }
        m
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
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[col * self.rows + row] = value;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// The first `k` rows, returned as the columns of an `cols × k` matrix.
    pub fn leading_rows_as_columns(&self, k: usize) -> Self {
        let mut out = Self::zeros(self.cols, k);
        for i in 0..k {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Columns reordered by `perm` (column `j` of the result is column
    /// `perm[j]` of `self`).
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, perm.len());
        for (dst, &src) in perm.iter().enumerate() {
            out.col_mut(dst).copy_from_slice(self.col(src));
        }
        out
    }

    /// `max |(A^† A − I)_{ij}|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.cols {
            for b in 0..self.cols {
                let g = inner(self.col(a), self.col(b));
                let target = if a == b { T::ONE } else { T::ZERO };
                worst = worst.max((g - target).abs_value());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_is_conjugate_linear_in_first_slot() {
        let x = [Complex64::new(0.0, 1.0)];
        let y = [Complex64::new(1.0, 0.0)];
        assert_eq!(inner(&x, &y), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn leading_rows_transpose() {
        let m = ColMatrix::<f64>::from_columns(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let t = m.leading_rows_as_columns(2);
        assert_eq!(t.rows(), 2);
        assert_eq!(t.col(0), &[1.0, 4.0]);
        assert_eq!(t.col(1), &[2.0, 5.0]);
    }

    #[test]
    fn identity_columns_are_orthonormal() {
        let m = ColMatrix::<Complex64>::identity_columns(5, 3);
        assert_eq!(m.orthonormality_defect(), 0.0);
    }

    #[test]
    fn unit_phase_of_zero_is_one() {
        assert_eq!(0.0f64.unit_phase(), 1.0);
        assert_eq!(Complex64::ZERO.unit_phase(), Complex64::ONE);
        let z = Complex64::new(3.0, -4.0).unit_phase();
        assert!((z - Complex64::new(0.6, -0.8)).norm() < 1e-15);
    }
}
