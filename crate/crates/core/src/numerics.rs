//! Dense complex-matrix kernel.
//!
//! Everything here works on small dense matrices (side at most a few tens).
//! Matrix functions of Hermitian arguments (exponential, logarithm) are
//! evaluated through the Hermitian eigendecomposition so the results are
//! exactly unitary or Hermitian up to roundoff.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::states::BipartiteDims;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance for accepting a matrix as Hermitian (max elementwise defect).
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Tolerance for accepting a matrix as unitary (Frobenius defect).
pub const UNITARY_TOL: f64 = 1e-10;

/// Default eigenvalue floor for [`support_log2`].
pub const DEFAULT_LOG_FLOOR: f64 = 1e-14;

/// Eigenvalues above this (negative) bound are clamped to zero before a
/// logarithm or entropy is taken.
pub const NEGATIVE_EIG_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Subsystem label for partial traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Eigenvalues in descending order with the matching column eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    /// Rebuilds `V f(diag(lambda)) V^dagger` for a spectral function `f`.
    pub fn rebuild_with<F>(&self, f: F) -> CMatrix
    where
        F: Fn(f64) -> Complex64,
    {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let fk = f(lambda);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= fk;
            }
        }
        &scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.rebuild_with(|x| Complex64::new(x, 0.0))
    }

    /// `exp(i * alpha * H)` where `self` is the eigensystem of `H`.
    pub fn exp_i(&self, alpha: f64) -> CMatrix {
        self.rebuild_with(|x| Complex64::from_polar(1.0, alpha * x))
    }
}

pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn ensure_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

/// Largest elementwise modulus of `M - M^dagger`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// `||U U^dagger - I||_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u * u.adjoint() - CMatrix::identity(n, n)).norm()
}

pub fn ensure_hermitian(m: &CMatrix) -> Result<()> {
    ensure_square(m)?;
    ensure_finite(m)?;
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

pub fn ensure_unitary(u: &CMatrix) -> Result<()> {
    ensure_square(u)?;
    ensure_finite(u)?;
    let defect = unitarity_defect(u);
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary { defect });
    }
    Ok(())
}

/// `(M + M^dagger) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
///
/// Each eigenvector is phase-fixed so that its first component of modulus
/// above `1e-6` is real and positive. Equal eigenvalues keep the order the
/// underlying solver produced them in.
pub fn hermitian_eig(m: &CMatrix) -> Result<EigenSystem> {
    ensure_hermitian(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(EigenSystem {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let sym = hermitian_part(m);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let phase = col
            .iter()
            .find(|z| z.norm() > 1e-6)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(ONE);
        for r in 0..n {
            vectors[(r, dst)] = col[r] * phase;
        }
    }
    Ok(EigenSystem {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

/// `U = exp(iH)` for Hermitian `H`.
pub fn unitary_from_generator(h: &CMatrix) -> Result<CMatrix> {
    Ok(hermitian_eig(h)?.exp_i(1.0))
}

/// Base-2 logarithm restricted to the support of a positive semidefinite
/// matrix. Eigenvalues at or below `floor` contribute nothing, so the result
/// vanishes on the numerical null space.
pub fn support_log2(rho: &CMatrix, floor: f64) -> Result<CMatrix> {
    let eig = hermitian_eig(rho)?;
    Ok(eig.rebuild_with(|x| {
        if x > floor {
            Complex64::new(x.log2(), 0.0)
        } else {
            ZERO
        }
    }))
}

/// Von Neumann entropy in bits from a list of eigenvalues. Small negative
/// eigenvalues are clamped and terms at or below `floor` are dropped.
pub fn entropy_bits(eigenvalues: &[f64], floor: f64) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&x| x > floor)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Partial trace of an operator on `A (x) B` with composite index
/// `a * dB + b`.
pub fn partial_trace(m: &CMatrix, dims: BipartiteDims, keep: Subsystem) -> Result<CMatrix> {
    let (da, db) = (dims.da(), dims.db());
    let side = da * db;
    if m.nrows() != side || m.ncols() != side {
        return Err(Error::DimensionMismatch {
            expected: format!("{side}x{side}"),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |a, ap| {
            (0..db).map(|b| m[(a * db + b, ap * db + b)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(db, db, |b, bp| {
            (0..da).map(|a| m[(a * db + b, a * db + bp)]).sum()
        }),
    })
}

/// Reshapes a vector on `A (x) B` into the `dA x dB` coefficient matrix
/// `C[a, b] = psi[a * dB + b]`.
pub fn coefficient_matrix(psi: impl Iterator<Item = Complex64>, dims: BipartiteDims) -> CMatrix {
    let db = dims.db();
    let mut c = CMatrix::zeros(dims.da(), db);
    for (k, z) in psi.enumerate() {
        c[(k / db, k % db)] = z;
    }
    c
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let mut acc = ZERO;
    for r in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(r, k)] * b[(k, r)];
        }
    }
    acc
}

/// Matrix with independent standard complex Gaussian entries
/// (real and imaginary parts each `N(0, 1)`).
pub fn random_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Random Hermitian matrix scaled to unit Frobenius norm.
pub fn random_unit_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let h = hermitian_part(&random_gaussian_matrix(rng, n, n));
    let norm = h.norm();
    if norm > 0.0 {
        h.unscale(norm)
    } else {
        h
    }
}
