//! Density matrices, pure-state decompositions and their entanglement.

use nalgebra::DVectorView;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{
    self, coefficient_matrix, entropy_bits, hermitian_eig, CMatrix, CVector, DEFAULT_LOG_FLOOR,
    NEGATIVE_EIG_TOL,
};

/// States whose squared norm is at or below this are treated as zero-weight
/// padding. Their entanglement contribution is defined to be 0.
pub const ZERO_STATE_TOL: f64 = 1e-14;

/// Eigenvalues above `RANK_TOL * lambda_max` count towards the numerical rank.
pub const RANK_TOL: f64 = 1e-12;

const TRACE_TOL: f64 = 1e-10;

/// Local dimensions of a bipartite system `A (x) B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteDims {
    da: usize,
    db: usize,
}

impl BipartiteDims {
    pub fn new(da: usize, db: usize) -> Result<Self> {
        if da < 2 || db < 2 {
            return Err(Error::OutOfRange(format!(
                "local dimensions must be at least 2, got {da}x{db}"
            )));
        }
        Ok(Self { da, db })
    }

    /// Two subsystems of equal dimension `d`.
    pub fn square(d: usize) -> Result<Self> {
        Self::new(d, d)
    }

    pub fn da(&self) -> usize {
        self.da
    }

    pub fn db(&self) -> usize {
        self.db
    }

    /// Dimension of the joint space, `dA * dB`.
    pub fn total(&self) -> usize {
        self.da * self.db
    }

    /// Entanglement of a maximally entangled state, `log2(min(dA, dB))`.
    pub fn max_entanglement(&self) -> f64 {
        (self.da.min(self.db) as f64).log2()
    }
}

/// A validated density matrix on a bipartite space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dims: BipartiteDims,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace (all within `1e-10`).
    /// The stored matrix is the exact Hermitian part of the input.
    pub fn new(dims: BipartiteDims, matrix: CMatrix) -> Result<Self> {
        let n = dims.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        let eig = hermitian_eig(&matrix).map_err(|e| match e {
            Error::NotHermitian { defect } => {
                Error::InvalidDensityMatrix(format!("not Hermitian (defect {defect:.3e})"))
            }
            other => other,
        })?;
        let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -NEGATIVE_EIG_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {} is not 1",
                trace
            )));
        }
        Ok(Self {
            dims,
            matrix: numerics::hermitian_part(&matrix),
        })
    }

    /// `|psi><psi|` for a normalized vector.
    pub fn pure(dims: BipartiteDims, psi: &CVector) -> Result<Self> {
        Self::new(dims, psi * psi.adjoint())
    }

    /// `I / (dA dB)`.
    pub fn maximally_mixed(dims: BipartiteDims) -> Self {
        let n = dims.total();
        Self {
            dims,
            matrix: CMatrix::identity(n, n).unscale(n as f64),
        }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Number of eigenvalues above `RANK_TOL * lambda_max`.
    pub fn numerical_rank(&self) -> usize {
        let eig = hermitian_eig(&self.matrix).expect("validated density matrix");
        let top = eig.eigenvalues[0];
        eig.eigenvalues
            .iter()
            .filter(|&&x| x > RANK_TOL * top)
            .count()
    }
}

/// A pure-state decomposition held as subnormalized vectors
/// `|psi~_i> = sqrt(p_i) |psi_i>`, one per column.
///
/// The columns always sum (as outer products) to the density matrix the
/// decomposition was built from; every transformation applied here is a
/// unitary mixing of the columns, which leaves that sum unchanged.
#[derive(Debug, Clone)]
pub struct Decomposition {
    dims: BipartiteDims,
    states: CMatrix,
}

impl Decomposition {
    /// Wraps a `(dA dB) x n` matrix of subnormalized column states. The total
    /// weight must be 1 within `1e-10`.
    pub fn new(dims: BipartiteDims, states: CMatrix) -> Result<Self> {
        if states.nrows() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows", dims.total()),
                found: format!("{} rows", states.nrows()),
            });
        }
        if states.ncols() == 0 {
            return Err(Error::InvalidDecomposition("no states".into()));
        }
        numerics::ensure_finite(&states)?;
        let total: f64 = states.iter().map(|z| z.norm_sqr()).sum();
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDecomposition(format!(
                "total weight {total} is not 1"
            )));
        }
        Ok(Self { dims, states })
    }

    pub(crate) fn from_parts_unchecked(dims: BipartiteDims, states: CMatrix) -> Self {
        Self { dims, states }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    /// Number of states, including zero-weight padding.
    pub fn len(&self) -> usize {
        self.states.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.states.ncols() == 0
    }

    /// Column matrix of subnormalized states.
    pub fn states(&self) -> &CMatrix {
        &self.states
    }

    pub fn state(&self, i: usize) -> DVectorView<'_, Complex64> {
        self.states.column(i)
    }

    /// `p_i = <psi~_i|psi~_i>`.
    pub fn weights(&self) -> Vec<f64> {
        self.states
            .column_iter()
            .map(|c| c.norm_squared())
            .collect()
    }

    /// `sum_i |psi~_i><psi~_i|`.
    pub fn density_matrix(&self) -> CMatrix {
        &self.states * self.states.adjoint()
    }

    /// Frobenius distance between the decomposition's sum and `rho`.
    pub fn reconstruction_error(&self, rho: &CMatrix) -> f64 {
        (self.density_matrix() - rho).norm()
    }

    /// Appends `k` zero-norm states.
    pub fn padded(&self, k: usize) -> Self {
        let n = self.len();
        let states = self
            .states
            .clone()
            .resize_horizontally(n + k, numerics::ZERO);
        Self {
            dims: self.dims,
            states,
        }
    }

    /// Reduced state `Tr_B(|psi~_j><psi~_i|)` (the off-diagonal blocks used by
    /// the gradient), computed from coefficient matrices as `C_j C_i^dagger`.
    pub fn reduced_cross(&self, j: usize, i: usize) -> CMatrix {
        let cj = coefficient_matrix(self.state(j).iter().copied(), self.dims);
        let ci = coefficient_matrix(self.state(i).iter().copied(), self.dims);
        cj * ci.adjoint()
    }
}

/// Decomposition into `sqrt(lambda) * eigenvector` for the largest
/// eigenvalues of `rho`. With `n_states = None` the size is the numerical
/// rank; a larger size pads with zero vectors.
pub fn eigenstate_decomposition(
    rho: &DensityMatrix,
    n_states: Option<usize>,
) -> Result<Decomposition> {
    let eig = hermitian_eig(rho.matrix())?;
    let top = eig.eigenvalues[0];
    let rank = eig
        .eigenvalues
        .iter()
        .filter(|&&x| x > RANK_TOL * top)
        .count();
    let n = n_states.unwrap_or(rank);
    if n < rank {
        return Err(Error::TooFewStates { requested: n, rank });
    }
    let dim = rho.dims().total();
    let mut states = CMatrix::zeros(dim, n);
    for k in 0..rank {
        let amp = eig.eigenvalues[k].sqrt();
        for r in 0..dim {
            states[(r, k)] = eig.eigenvectors[(r, k)] * amp;
        }
    }
    Ok(Decomposition::from_parts_unchecked(rho.dims(), states))
}

/// Entanglement (ebits) of the normalized version of a subnormalized state:
/// the entropy of `Tr_B(|psi~><psi~|) / p`.
pub fn pure_state_entanglement(psi: &[Complex64], dims: BipartiteDims) -> Result<f64> {
    if psi.len() != dims.total() {
        return Err(Error::DimensionMismatch {
            expected: format!("vector of length {}", dims.total()),
            found: format!("length {}", psi.len()),
        });
    }
    let weight: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if weight <= ZERO_STATE_TOL {
        return Err(Error::ZeroWeightState { weight });
    }
    Ok(entanglement_of_column(psi.iter().copied(), weight, dims))
}

pub(crate) fn reduced_state_a(
    psi: impl Iterator<Item = Complex64>,
    weight: f64,
    dims: BipartiteDims,
) -> CMatrix {
    let c = coefficient_matrix(psi, dims);
    let red = &c * c.adjoint();
    numerics::hermitian_part(&red).unscale(weight)
}

fn entanglement_of_column(
    psi: impl Iterator<Item = Complex64>,
    weight: f64,
    dims: BipartiteDims,
) -> f64 {
    let red = reduced_state_a(psi, weight, dims);
    let eig = hermitian_eig(&red).expect("reduced state is Hermitian by construction");
    entropy_bits(&eig.eigenvalues, DEFAULT_LOG_FLOOR)
}

/// `E_av = sum_i p_i E_i` in ebits; zero-weight states contribute nothing.
pub fn average_entanglement(dec: &Decomposition) -> f64 {
    let dims = dec.dims();
    dec.states
        .column_iter()
        .map(|col| {
            let p = col.norm_squared();
            if p <= ZERO_STATE_TOL {
                0.0
            } else {
                p * entanglement_of_column(col.iter().copied(), p, dims)
            }
        })
        .sum()
}

/// `|psi~_i'> = sum_j U_ij |psi~_j>`.
pub fn apply_unitary(dec: &Decomposition, u: &CMatrix) -> Result<Decomposition> {
    if u.nrows() != dec.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n} unitary", n = dec.len()),
            found: format!("{}x{}", u.nrows(), u.ncols()),
        });
    }
    numerics::ensure_unitary(u)?;
    Ok(apply_unitary_unchecked(dec, u))
}

pub(crate) fn apply_unitary_unchecked(dec: &Decomposition, u: &CMatrix) -> Decomposition {
    Decomposition::from_parts_unchecked(dec.dims, &dec.states * u.transpose())
}

/// Seeded random density matrix `G G^dagger / Tr(G G^dagger)` with `G` a
/// `(dA dB) x rank` matrix of standard complex Gaussians.
pub fn random_density_matrix(dims: BipartiteDims, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if rank == 0 || rank > dims.total() {
        return Err(Error::OutOfRange(format!(
            "rank must lie in 1..={}, got {rank}",
            dims.total()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = numerics::random_gaussian_matrix(&mut rng, dims.total(), rank);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    DensityMatrix::new(dims, rho.unscale(tr))
}
