//! Thin complex-matrix helpers over nalgebra.
//!
//! The rest of the crate works with dynamically sized complex matrices. This
//! module centralizes the few numerically delicate conventions everything
//! else relies on:
//!
//! * Hermitian eigendecompositions are returned with eigenvalues sorted in
//!   **decreasing** order and eigenvector columns phase-normalized so that
//!   each column's largest-modulus entry is real and positive. That makes
//!   eigenbases (and therefore emitted precoders) deterministic up to
//!   degenerate eigenvalues.
//! * Positive-semidefinite square roots are principal roots computed through
//!   the eigendecomposition, with tiny negative round-off eigenvalues clamped
//!   to zero.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Round-off floor for eigenvalues of matrices that are PSD by construction.
/// Values in [FLOOR, 0) are treated as zero; anything below is an error.
pub const PSD_FLOOR: f64 = -1e-10;

/// Tolerance used when checking that a matrix is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest entrywise deviation between `a` and its conjugate transpose.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// (A + A^H) / 2 — used to scrub round-off before eigendecomposition.
pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Checks squareness, finiteness and Hermitian symmetry of `a`.
pub fn require_hermitian(a: &CMatrix, context: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            context: context.to_string(),
            expected: "square matrix".to_string(),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    require_finite(a, context)?;
    if hermitian_defect(a) > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            context: context.to_string(),
            tol: HERMITIAN_TOL,
        });
    }
    Ok(())
}

pub fn require_finite(a: &CMatrix, context: &str) -> Result<()> {
    if a.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite(context.to_string()));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix with deterministic conventions.
pub struct HermitianEigen {
    /// Eigenvalues in decreasing order.
    pub values: DVector<f64>,
    /// Matching eigenvector columns, phase-normalized.
    pub vectors: CMatrix,
}

/// Full Hermitian eigendecomposition (see module docs for the conventions).
///
/// The input is validated Hermitian, symmetrized to scrub round-off, and the
/// returned basis is checked orthonormal to 1e-10.
pub fn hermitian_eigen(a: &CMatrix, context: &str) -> Result<HermitianEigen> {
    require_hermitian(a, context)?;
    let n = a.nrows();
    let sym = hermitize(a);
    let decomp = sym.symmetric_eigen();

    // Stable decreasing sort of the eigenpairs.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        decomp.eigenvalues[j]
            .partial_cmp(&decomp.eigenvalues[i])
            .expect("eigenvalues of a finite Hermitian matrix are finite")
    });

    let mut values = DVector::zeros(n);
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = decomp.eigenvalues[src];
        let mut col = decomp.eigenvectors.column(src).clone_owned();
        // Rotate the column so its largest-modulus entry is real positive.
        let mut pivot = 0;
        let mut best = 0.0;
        for (k, v) in col.iter().enumerate() {
            if v.norm() > best {
                best = v.norm();
                pivot = k;
            }
        }
        if best > 0.0 {
            let phase = col[pivot] / Complex64::new(best, 0.0);
            col *= phase.conj();
        }
        vectors.set_column(dst, &col);
    }

    let gram = vectors.adjoint() * &vectors;
    let defect = (&gram - CMatrix::identity(n, n))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::NoConvergence {
            context: format!("{context}: eigenbasis orthonormality"),
            iterations: 0,
            residual: defect,
        });
    }

    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only (ascending order as returned), for spectra where the
/// basis is not needed. The input is symmetrized first.
pub fn hermitian_eigenvalues(a: &CMatrix, context: &str) -> Result<Vec<f64>> {
    require_hermitian(a, context)?;
    let sym = hermitize(a);
    let mut vals: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{context}: eigenvalues")));
    }
    vals.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    Ok(vals)
}

/// Principal PSD square root via the eigendecomposition.
pub fn psd_sqrt(a: &CMatrix, context: &str) -> Result<CMatrix> {
    let eig = hermitian_eigen(a, context)?;
    let n = a.nrows();
    let mut root_diag = DVector::<Complex64>::zeros(n);
    for (k, &v) in eig.values.iter().enumerate() {
        if v < PSD_FLOOR {
            return Err(Error::NotPsd {
                context: context.to_string(),
                value: v,
            });
        }
        root_diag[k] = Complex64::new(v.max(0.0).sqrt(), 0.0);
    }
    let scaled = {
        let mut m = eig.vectors.clone();
        for (k, mut col) in m.column_iter_mut().enumerate() {
            col *= root_diag[k];
        }
        m
    };
    Ok(&scaled * eig.vectors.adjoint())
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    frobenius_norm(&(a - b))
}

/// One standard complex Gaussian sample with E|x|^2 = `variance`
/// (independent real and imaginary parts, each N(0, variance/2)).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sigma = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(sigma * re, sigma * im)
}

/// Matrix with iid complex Gaussian entries of per-entry variance `variance`.
pub fn gaussian_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    variance: f64,
    rng: &mut R,
) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, variance))
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the R
/// diagonal's phases folded into Q so the result is drawn uniformly.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(n, n, 1.0, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / Complex64::new(d.norm(), 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        col *= phase;
    }
    q
}

/// Real diagonal embedded as a complex matrix.
pub fn diag_real(entries: &[f64]) -> CMatrix {
    CMatrix::from_fn(entries.len(), entries.len(), |i, j| {
        if i == j {
            Complex64::new(entries[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Real matrix data lifted to complex.
pub fn real_to_complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(|v| Complex64::new(v, 0.0))
}
