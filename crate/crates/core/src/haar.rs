//! Gram–Schmidt coupling of Gaussian columns with Haar columns, the coupling
//! error variables, and a full Haar matrix by phase-corrected QR.

use nalgebra::{ComplexField, DMatrix};
use serde::{Deserialize, Serialize};

use crate::field::{inner, norm_sqr, ColMatrix, FieldKind, FieldScalar};
use crate::rng::{gaussian_block, GaussianBlock, RandomStream};
use crate::{Error, Result};

/// Above this many columns modified Gram–Schmidt runs a second pass.
pub const REORTHOGONALIZE_ABOVE: usize = 32;

/// Degeneracy threshold relative to `√n`.
pub const DEGENERACY_FACTOR: f64 = 1e-12;

/// Gaussian block `Y`, its orthogonalized columns `W` and the orthonormal
/// columns `Γ = W / ‖W‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSample<T> {
    y: GaussianBlock<T>,
    w: ColMatrix<T>,
    gamma: ColMatrix<T>,
}

impl<T: FieldScalar> CoupledSample<T> {
    pub fn y(&self) -> &GaussianBlock<T> {
        &self.y
    }

    pub fn w(&self) -> &ColMatrix<T> {
        &self.w
    }

    pub fn gamma(&self) -> &ColMatrix<T> {
        &self.gamma
    }

    pub fn field(&self) -> FieldKind {
        T::FIELD
    }

    pub fn n(&self) -> usize {
        self.y.n()
    }

    pub fn k(&self) -> usize {
        self.y.k()
    }
}

fn axpy<T: FieldScalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

/// Orthonormalizes the columns of `y` in order.
pub fn gram_schmidt_partial<T: FieldScalar>(y: &GaussianBlock<T>) -> Result<CoupledSample<T>> {
    let (n, k) = (y.n(), y.k());
    if k > n {
        return Err(Error::arg(format!("cannot orthonormalize {k} columns of length {n}")));
    }
    let threshold = DEGENERACY_FACTOR * (n as f64).sqrt();
    let passes = if k > REORTHOGONALIZE_ABOVE { 2 } else { 1 };
    let mut w = y.entries().clone();
    let mut gamma = ColMatrix::<T>::zeros(n, k);
    let mut col = vec![T::ZERO; n];
    for i in 0..k {
        col.copy_from_slice(w.col(i));
        for _ in 0..passes {
            for l in 0..i {
                let g = gamma.col(l);
                let coef = inner(g, &col);
                axpy(-coef, g, &mut col);
            }
        }
        let norm = norm_sqr(&col).sqrt();
        if !(norm >= threshold) {
            return Err(Error::Degenerate {
                column: i,
                norm,
                threshold,
            });
        }
        w.col_mut(i).copy_from_slice(&col);
        let inv = 1.0 / norm;
        for (g, &c) in gamma.col_mut(i).iter_mut().zip(&col) {
            *g = c.rescale(inv);
        }
    }
    Ok(CoupledSample { y: y.clone(), w, gamma })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingDiagnostics {
    /// `max_{i,j} |√N γ_ij − y_ij|`
    pub eps_n_k: f64,
    /// `max |Δ_ij|`, `Δ_i = Σ_{ℓ<i} ⟨γ_ℓ, y_i⟩ γ_ℓ`
    pub max_delta: f64,
    /// `max |Δ_ij − Δ̃_ij|`, `Δ̃_i = N⁻¹ Σ_{ℓ<i} ⟨y_ℓ, y_i⟩ y_ℓ`
    pub max_delta_gap: f64,
    /// `max_i |√(N/‖w_i‖²) − 1|`
    pub max_l: f64,
    /// `max_{a≠b} |⟨y_a, y_b⟩| / √N`
    pub max_inner: f64,
}

impl CouplingDiagnostics {
    pub const FIELD_NAMES: [&'static str; 5] = ["eps_n_k", "max_delta", "max_delta_gap", "max_l", "max_inner"];

    pub fn values(&self) -> [f64; 5] {
        [
            self.eps_n_k,
            self.max_delta,
            self.max_delta_gap,
            self.max_l,
            self.max_inner,
        ]
    }
}

/// Error variables evaluated from their defining sums, not from the
/// Gram–Schmidt intermediates. Cost `O(k² N)`.
pub fn coupling_diagnostics<T: FieldScalar>(sample: &CoupledSample<T>) -> CouplingDiagnostics {
    let (n, k) = (sample.n(), sample.k());
    let nf = n as f64;
    let sqrt_n = nf.sqrt();
    let y = sample.y.entries();
    let gamma = &sample.gamma;

    let mut eps: f64 = 0.0;
    for i in 0..k {
        for (g, yv) in gamma.col(i).iter().zip(y.col(i)) {
            eps = eps.max((g.rescale(sqrt_n) - *yv).abs_value());
        }
    }

    let mut max_l: f64 = 0.0;
    for i in 0..k {
        max_l = max_l.max(((nf / norm_sqr(sample.w.col(i))).sqrt() - 1.0).abs());
    }

    let mut max_inner: f64 = 0.0;
    let mut gram = vec![T::ZERO; k * k];
    for a in 0..k {
        for b in 0..a {
            let ip = inner(y.col(b), y.col(a));
            gram[a * k + b] = ip;
            max_inner = max_inner.max(ip.abs_value() / sqrt_n);
        }
    }

    let mut max_delta: f64 = 0.0;
    let mut max_gap: f64 = 0.0;
    let mut delta = vec![T::ZERO; n];
    let mut delta_tilde = vec![T::ZERO; n];
    for i in 1..k {
        delta.fill(T::ZERO);
        delta_tilde.fill(T::ZERO);
        for l in 0..i {
            axpy(inner(gamma.col(l), y.col(i)), gamma.col(l), &mut delta);
            axpy(gram[i * k + l].rescale(1.0 / nf), y.col(l), &mut delta_tilde);
        }
        for (d, dt) in delta.iter().zip(&delta_tilde) {
            max_delta = max_delta.max(d.abs_value());
            max_gap = max_gap.max((*d - *dt).abs_value());
        }
    }

    CouplingDiagnostics {
        eps_n_k: eps,
        max_delta,
        max_delta_gap: max_gap,
        max_l,
        max_inner,
    }
}

/// Scalars for which the nalgebra QR route is available.
pub trait QrScalar: FieldScalar + ComplexField<RealField = f64> {}

impl<T: FieldScalar + ComplexField<RealField = f64>> QrScalar for T {}

/// Q factor of the thin QR of `m` (`n×k`, `k <= n`), with the phase of each
/// diagonal entry of R folded into Q so R has a positive real diagonal.
pub fn thin_q_positive<T: QrScalar>(m: &ColMatrix<T>) -> Result<ColMatrix<T>> {
    let (n, k) = (m.rows(), m.cols());
    if k > n || k == 0 {
        return Err(Error::arg(format!("thin QR needs 1 <= k <= n (n={n}, k={k})")));
    }
    let threshold = DEGENERACY_FACTOR * (n as f64).sqrt();
    let qr = DMatrix::from_column_slice(n, k, m.as_slice()).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        let d = r[(j, j)];
        let size = FieldScalar::abs_value(d);
        if !(size >= threshold) {
            return Err(Error::Degenerate {
                column: j,
                norm: size,
                threshold,
            });
        }
        let phase = d.unit_phase();
        for v in q.column_mut(j).iter_mut() {
            *v *= phase;
        }
    }
    ColMatrix::from_col_major(n, k, q.as_slice().to_vec())
}

/// Haar-distributed `n×n` orthogonal (real) or unitary (complex) matrix.
pub fn haar_matrix_qr<T: QrScalar>(n: usize, stream: &mut RandomStream) -> Result<ColMatrix<T>> {
    if n == 0 {
        return Err(Error::arg("Haar matrix needs n >= 1"));
    }
    let g = gaussian_block::<T>(n, n, stream)?;
    thin_q_positive(g.entries())
}
