//! Closed-form entanglement of formation for two special families: arbitrary
//! two-qubit states (via the concurrence) and isotropic two-qudit states.

use nalgebra::linalg::{Schur, SVD};
use num_complex::Complex64;

use crate::channels::psi_plus;
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, CMatrix};
use crate::states::{BipartiteDims, DensityMatrix};

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |y: f64| if y <= 0.0 { 0.0 } else { -y * y.log2() };
    term(x) + term(1.0 - x)
}

fn ensure_two_qubits(rho: &DensityMatrix) -> Result<()> {
    let dims = rho.dims();
    if dims.da() != 2 || dims.db() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2x2 bipartite state".into(),
            found: format!("{}x{}", dims.da(), dims.db()),
        });
    }
    Ok(())
}

/// `sigma_y (x) sigma_y` in the computational product basis.
fn spin_flip_operator() -> CMatrix {
    let mut y = CMatrix::zeros(4, 4);
    // sigma_y (x) sigma_y = antidiag(-1, 1, 1, -1)
    y[(0, 3)] = Complex64::new(-1.0, 0.0);
    y[(1, 2)] = Complex64::new(1.0, 0.0);
    y[(2, 1)] = Complex64::new(1.0, 0.0);
    y[(3, 0)] = Complex64::new(-1.0, 0.0);
    y
}

/// `(sigma_y (x) sigma_y) rho* (sigma_y (x) sigma_y)`, conjugating in the
/// computational basis.
pub fn spin_flipped(rho: &DensityMatrix) -> Result<CMatrix> {
    ensure_two_qubits(rho)?;
    let y = spin_flip_operator();
    Ok(&y * rho.matrix().map(|z| z.conj()) * &y)
}

fn concurrence_from_roots(mut roots: Vec<f64>) -> f64 {
    roots.sort_by(|a, b| b.total_cmp(a));
    (roots[0] - roots[1] - roots[2] - roots[3]).max(0.0)
}

/// Two-qubit concurrence.
///
/// With `rho = W W^dagger` (`W` the eigenvectors scaled by the square roots
/// of the eigenvalues), the square roots of the eigenvalues of `rho rho~` are
/// the singular values of the symmetric matrix `W^T (sigma_y (x) sigma_y) W`.
/// Taking singular values directly keeps vanishing roots at roundoff level
/// instead of at the square root of it.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    ensure_two_qubits(rho)?;
    let eig = hermitian_eig(rho.matrix())?;
    let mut w = eig.eigenvectors.clone();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let amp = lambda.max(0.0).sqrt();
        for z in w.column_mut(k).iter_mut() {
            *z *= amp;
        }
    }
    let tau = w.transpose() * spin_flip_operator() * &w;
    let roots = SVD::new(tau, false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    Ok(concurrence_from_roots(roots))
}

/// Concurrence from the eigenvalues of the non-Hermitian product `rho rho~`
/// (complex Schur form; real parts with tiny negatives clamped).
pub fn concurrence_product_route(rho: &DensityMatrix) -> Result<f64> {
    let product = rho.matrix() * spin_flipped(rho)?;
    let schur = Schur::try_new(product, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let (_, t) = schur.unpack();
    let roots = (0..4).map(|k| t[(k, k)].re.max(0.0).sqrt()).collect();
    Ok(concurrence_from_roots(roots))
}

/// Same quantity through the Hermitian matrix `sqrt(rho) rho~ sqrt(rho)`,
/// which has the same spectrum as `rho rho~`.
pub fn concurrence_hermitian_route(rho: &DensityMatrix) -> Result<f64> {
    let eig = hermitian_eig(rho.matrix())?;
    let sqrt_rho = eig.rebuild_with(|x| Complex64::new(x.max(0.0).sqrt(), 0.0));
    let m = &sqrt_rho * spin_flipped(rho)? * &sqrt_rho;
    let inner = hermitian_eig(&crate::numerics::hermitian_part(&m))?;
    let roots = inner
        .eigenvalues
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .collect();
    Ok(concurrence_from_roots(roots))
}

/// Entanglement of formation as a function of the concurrence.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt()))
}

/// Closed-form entanglement of formation of a two-qubit state, in ebits.
pub fn wootters_eof(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

/// `rho(F) = (1-F)/(d^2-1) (I - |Psi+><Psi+|) + F |Psi+><Psi+|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicState {
    d: usize,
    fidelity: f64,
}

impl IsotropicState {
    pub fn new(d: usize, fidelity: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::OutOfRange(format!("dimension {d} < 2")));
        }
        if !(0.0..=1.0).contains(&fidelity) {
            return Err(Error::OutOfRange(format!(
                "fidelity {fidelity} not in [0, 1]"
            )));
        }
        Ok(Self { d, fidelity })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        let d = self.d;
        let n = d * d;
        let f = self.fidelity;
        let psi = psi_plus(d)?;
        let bell = &psi * psi.adjoint();
        let background = (1.0 - f) / (n as f64 - 1.0);
        let rho = (CMatrix::identity(n, n) - &bell).scale(background) + bell.scale(f);
        DensityMatrix::new(BipartiteDims::square(d)?, rho)
    }

    /// Entanglement of formation in ebits.
    ///
    /// Zero up to `F = 1/d`; then `H2(gamma) + (1 - gamma) log2(d - 1)` with
    /// `gamma = (sqrt(F) + sqrt((d-1)(1-F)))^2 / d` up to `F = 4(d-1)/d^2`;
    /// beyond that (only for `d >= 3`) the straight line
    /// `d log2(d-1)/(d-2) (F - 1) + log2 d`.
    pub fn eof(&self) -> f64 {
        let d = self.d as f64;
        let f = self.fidelity;
        if f <= 1.0 / d {
            return 0.0;
        }
        let knee = 4.0 * (d - 1.0) / (d * d);
        if f <= knee || self.d == 2 {
            let gamma = (f.sqrt() + ((d - 1.0) * (1.0 - f)).max(0.0).sqrt()).powi(2) / d;
            binary_entropy(gamma.min(1.0)) + (1.0 - gamma) * (d - 1.0).log2()
        } else {
            d * (d - 1.0).log2() / (d - 2.0) * (f - 1.0) + d.log2()
        }
    }
}

pub fn isotropic_state(d: usize, fidelity: f64) -> Result<DensityMatrix> {
    IsotropicState::new(d, fidelity)?.density_matrix()
}

pub fn isotropic_eof(d: usize, fidelity: f64) -> Result<f64> {
    Ok(IsotropicState::new(d, fidelity)?.eof())
}

/// `<Psi+| rho |Psi+>`.
pub fn bell_fidelity(rho: &DensityMatrix) -> Result<f64> {
    let dims = rho.dims();
    if dims.da() != dims.db() {
        return Err(Error::DimensionMismatch {
            expected: "equal local dimensions".into(),
            found: format!("{}x{}", dims.da(), dims.db()),
        });
    }
    let psi = psi_plus(dims.da())?;
    let value = (psi.adjoint() * rho.matrix() * &psi)[(0, 0)];
    debug_assert!(value.im.abs() < 1e-12);
    Ok(value.re)
}
