//! Analytic gradient of the average entanglement with respect to the
//! Hermitian generators of the unitary mixing of decomposition states.
//!
//! For a move `U = exp(i eps theta)` about the current decomposition,
//!
//! ```text
//! dE_av/deps = sum_ij theta_ij g_ji,
//! g_ji = -i Tr_A[(log2 rho_i^A - log2 rho_j^A) Tr_B(|psi~_j><psi~_i|)]
//! ```
//!
//! where `rho_i^A` is the normalized reduced state of `|psi~_i>`. The matrix
//! `g` is Hermitian with zero diagonal, so only the `n(n-1)` real parameters
//! of the strictly upper triangle of `theta` matter.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    coefficient_matrix, ensure_hermitian, support_log2, trace_of_product, CMatrix,
    DEFAULT_LOG_FLOOR, I, ZERO,
};
use crate::states::{reduced_state_a, Decomposition, ZERO_STATE_TOL};

/// Hermitian `n x n` matrix of first derivatives of `E_av`.
#[derive(Debug, Clone)]
pub struct GradientMatrix {
    g: CMatrix,
}

impl GradientMatrix {
    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.g
    }

    /// Largest modulus over all entries.
    pub fn max_abs(&self) -> f64 {
        self.g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Gradient flattened to the real parameters of the strictly upper
/// triangle: for each pair `a < b` (lexicographic), `2 Re g_ab` then
/// `2 Im g_ab`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatGradient {
    pub components: Vec<f64>,
}

impl FlatGradient {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.components.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.components.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Number of real generator parameters for `n` states.
pub fn parameter_count(n: usize) -> usize {
    n * n.saturating_sub(1)
}

fn upper_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b)))
}

/// Gradient matrix of `E_av` at `dec`.
///
/// Reduced-state logarithms are taken on the support only, and every entry
/// that involves a state of weight at most [`ZERO_STATE_TOL`] is exactly 0.
pub fn gradient_matrix(dec: &Decomposition) -> Result<GradientMatrix> {
    let n = dec.len();
    let dims = dec.dims();
    let weights = dec.weights();
    let total: f64 = weights.iter().sum();
    if !total.is_finite() || (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDecomposition(format!(
            "total weight {total} is not 1"
        )));
    }

    let coeffs: Vec<CMatrix> = (0..n)
        .map(|i| coefficient_matrix(dec.state(i).iter().copied(), dims))
        .collect();
    let logs: Vec<Option<CMatrix>> = (0..n)
        .map(|i| {
            if weights[i] <= ZERO_STATE_TOL {
                return Ok(None);
            }
            let red = reduced_state_a(dec.state(i).iter().copied(), weights[i], dims);
            support_log2(&red, DEFAULT_LOG_FLOOR).map(Some)
        })
        .collect::<Result<_>>()?;

    let mut g = CMatrix::zeros(n, n);
    for (a, b) in upper_pairs(n) {
        let (Some(la), Some(lb)) = (&logs[a], &logs[b]) else {
            continue;
        };
        // g_ab = -i Tr[(L_b - L_a) Tr_B(|psi~_a><psi~_b|)]
        let cross = &coeffs[a] * coeffs[b].adjoint();
        let value = -I * trace_of_product(&(lb - la), &cross);
        g[(a, b)] = value;
        g[(b, a)] = value.conj();
    }
    Ok(GradientMatrix { g })
}

/// `dE_av/deps = sum_ij theta_ij g_ji = Tr(theta g)` along the generator
/// `theta`.
pub fn directional_derivative(g: &GradientMatrix, theta: &CMatrix) -> Result<f64> {
    if theta.nrows() != g.n() || theta.ncols() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n} generator", n = g.n()),
            found: format!("{}x{}", theta.nrows(), theta.ncols()),
        });
    }
    ensure_hermitian(theta)?;
    let value = trace_of_product(theta, &g.g);
    debug_assert!(
        value.im.abs() <= 1e-12 * (1.0 + theta.norm() * g.g.norm()),
        "imaginary residue {}",
        value.im
    );
    Ok(value.re)
}

pub fn flatten(g: &GradientMatrix) -> FlatGradient {
    let n = g.n();
    let mut components = Vec::with_capacity(parameter_count(n));
    for (a, b) in upper_pairs(n) {
        let z = g.g[(a, b)];
        components.push(2.0 * z.re);
        components.push(2.0 * z.im);
    }
    FlatGradient { components }
}

/// Hermitian generator with `theta_ab = v[2k] + i v[2k+1]` on the k-th
/// upper pair and zero diagonal.
pub fn unflatten(v: &[f64], n: usize) -> Result<CMatrix> {
    if v.len() != parameter_count(n) {
        return Err(Error::DimensionMismatch {
            expected: format!("{} parameters", parameter_count(n)),
            found: format!("{}", v.len()),
        });
    }
    let mut theta = CMatrix::from_element(n, n, ZERO);
    for (k, (a, b)) in upper_pairs(n).enumerate() {
        let z = Complex64::new(v[2 * k], v[2 * k + 1]);
        theta[(a, b)] = z;
        theta[(b, a)] = z.conj();
    }
    Ok(theta)
}

/// Upper-triangle parameters of a Hermitian generator; the inverse of
/// [`unflatten`] on its off-diagonal part.
pub fn flatten_params(theta: &CMatrix) -> Vec<f64> {
    let n = theta.nrows();
    let mut v = Vec::with_capacity(parameter_count(n));
    for (a, b) in upper_pairs(n) {
        v.push(theta[(a, b)].re);
        v.push(theta[(a, b)].im);
    }
    v
}
