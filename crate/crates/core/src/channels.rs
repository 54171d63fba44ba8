//! Local decoherence channels acting on one half of a maximally entangled
//! pair of qudits.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{kron, CMatrix, CVector, Subsystem, ZERO};
use crate::optimizer::{derive_seed, minimize_average_entanglement, MinimizerConfig};
use crate::oracles::wootters_eof;
use crate::states::{BipartiteDims, DensityMatrix};

/// Completeness tolerance for Kraus sets.
pub const COMPLETENESS_TOL: f64 = 1e-12;

/// `|Psi+> = (1/sqrt(d)) sum_i |ii>`.
pub fn psi_plus(d: usize) -> Result<CVector> {
    if d < 2 {
        return Err(Error::OutOfRange(format!("dimension {d} < 2")));
    }
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut psi = CVector::zeros(d * d);
    for i in 0..d {
        psi[i * d + i] = amp;
    }
    Ok(psi)
}

/// Cyclic raising operator `sum_i |i+1 mod d><i|`.
pub fn raise_operator(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| {
        if r == (c + 1) % d {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        }
    })
}

/// Clock operator `diag(1, w, ..., w^(d-1))` with `w = exp(2 pi i / d)`.
pub fn clock_operator(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| {
        if r == c {
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r as f64 / d as f64)
        } else {
            ZERO
        }
    })
}

/// A channel in operator-sum form, `rho -> sum_m K_m rho K_m^dagger`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    d: usize,
    operators: Vec<CMatrix>,
}

impl KrausChannel {
    /// Checks shapes and completeness `sum_m K_m^dagger K_m = I`.
    pub fn new(d: usize, operators: Vec<CMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::OutOfRange(
                "channel needs at least one operator".into(),
            ));
        }
        if let Some(bad) = operators.iter().find(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::DimensionMismatch {
                expected: format!("{d}x{d} operators"),
                found: format!("{}x{}", bad.nrows(), bad.ncols()),
            });
        }
        let channel = Self { d, operators };
        let defect = channel.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(Error::OutOfRange(format!(
                "Kraus operators are not complete (defect {defect:.3e})"
            )));
        }
        Ok(channel)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            d,
            operators: vec![CMatrix::identity(d, d)],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    /// `||sum_m K_m^dagger K_m - I||_F`.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .operators
            .iter()
            .fold(CMatrix::zeros(self.d, self.d), |acc, k| {
                acc + k.adjoint() * k
            });
        (sum - CMatrix::identity(self.d, self.d)).norm()
    }

    /// Action on a `d x d` operator.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.d || rho.ncols() != self.d {
            return Err(Error::DimensionMismatch {
                expected: format!("{d}x{d}", d = self.d),
                found: format!("{}x{}", rho.nrows(), rho.ncols()),
            });
        }
        Ok(self
            .operators
            .iter()
            .fold(CMatrix::zeros(self.d, self.d), |acc, k| {
                acc + k * rho * k.adjoint()
            }))
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("probability {p} not in [0, 1]")));
    }
    Ok(())
}

/// `{sqrt(1-p) I, sqrt(p/2) X_up, sqrt(p/2) X_down}` with cyclic raising and
/// lowering. For `d = 2` both shifts equal `X`, so this acts as the usual
/// qubit bit flip.
pub fn bitflip_channel(d: usize, p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    let up = raise_operator(d);
    let down = up.adjoint();
    let half = (p / 2.0).sqrt();
    KrausChannel::new(
        d,
        vec![
            CMatrix::identity(d, d).scale((1.0 - p).sqrt()),
            up.scale(half),
            down.scale(half),
        ],
    )
}

/// Depolarizing channel `rho -> (1-p) rho + p I/d`, represented with the
/// Weyl operators `W_ab = X_up^a Z^b`: `sqrt(1 - p(d^2-1)/d^2) I` plus
/// `(sqrt(p)/d) W_ab` for every `(a, b) != (0, 0)`.
pub fn depolarizing_channel(d: usize, p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    let x = raise_operator(d);
    let z = clock_operator(d);
    let df = d as f64;
    let mut ops =
        vec![CMatrix::identity(d, d).scale((1.0 - p * (df * df - 1.0) / (df * df)).sqrt())];
    let weight = p.sqrt() / df;
    let mut xa = CMatrix::identity(d, d);
    for a in 0..d {
        let mut w = xa.clone();
        for b in 0..d {
            if a != 0 || b != 0 {
                ops.push(w.scale(weight));
            }
            w = &w * &z;
        }
        xa = &x * xa;
    }
    KrausChannel::new(d, ops)
}

/// `ch1` followed by `ch2`: operators `K2_m K1_k`.
pub fn compose(first: &KrausChannel, second: &KrausChannel) -> Result<KrausChannel> {
    if first.d != second.d {
        return Err(Error::DimensionMismatch {
            expected: format!("dimension {}", first.d),
            found: format!("dimension {}", second.d),
        });
    }
    let ops = second
        .operators
        .iter()
        .flat_map(|k2| first.operators.iter().map(move |k1| k2 * k1))
        .collect();
    KrausChannel::new(first.d, ops)
}

/// `sum_m (K_m (x) I) rho (K_m (x) I)^dagger` (or `I (x) K_m` for `B`).
pub fn apply_local_channel(
    rho: &DensityMatrix,
    channel: &KrausChannel,
    target: Subsystem,
) -> Result<DensityMatrix> {
    let dims = rho.dims();
    let (local, other) = match target {
        Subsystem::A => (dims.da(), dims.db()),
        Subsystem::B => (dims.db(), dims.da()),
    };
    if channel.d != local {
        return Err(Error::DimensionMismatch {
            expected: format!("channel on dimension {local}"),
            found: format!("dimension {}", channel.d),
        });
    }
    let id = CMatrix::identity(other, other);
    let n = dims.total();
    let out = channel
        .operators
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, k| {
            let full = match target {
                Subsystem::A => kron(k, &id),
                Subsystem::B => kron(&id, k),
            };
            acc + &full * rho.matrix() * full.adjoint()
        });
    DensityMatrix::new(dims, out)
}

/// Which decoherence process a sweep applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Bitflip,
    Depolarizing,
    /// Bit flip followed by depolarization with the same probability.
    Both,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [
        ChannelKind::Bitflip,
        ChannelKind::Depolarizing,
        ChannelKind::Both,
    ];

    pub fn channel(self, d: usize, p: f64) -> Result<KrausChannel> {
        match self {
            ChannelKind::Bitflip => bitflip_channel(d, p),
            ChannelKind::Depolarizing => depolarizing_channel(d, p),
            ChannelKind::Both => compose(&bitflip_channel(d, p)?, &depolarizing_channel(d, p)?),
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Bitflip => "bitflip",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::Both => "both",
        })
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bitflip" => Ok(ChannelKind::Bitflip),
            "depolarizing" => Ok(ChannelKind::Depolarizing),
            "both" => Ok(ChannelKind::Both),
            other => Err(Error::OutOfRange(format!("unknown channel kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub eof_ebits: f64,
    /// `eof_ebits / log2 d` (etrits for qutrits).
    pub eof_normalized: f64,
    pub certified: bool,
}

/// `|Psi+><Psi+|` of two qudits after `kind` acts on subsystem A with
/// probability `p`.
pub fn decohered_bell_state(d: usize, kind: ChannelKind, p: f64) -> Result<DensityMatrix> {
    let psi = psi_plus(d)?;
    let rho = DensityMatrix::pure(BipartiteDims::square(d)?, &psi)?;
    apply_local_channel(&rho, &kind.channel(d, p)?, Subsystem::A)
}

/// Entanglement of formation of the decohered Bell state at every `p`.
///
/// Qubits use the closed form; larger dimensions run the minimizer with a
/// seed derived from `(engine.seed, grid index)`. Points run in parallel and
/// come back in grid order.
pub fn channel_sweep(
    d: usize,
    kind: ChannelKind,
    p_grid: &[f64],
    engine: &MinimizerConfig,
) -> Result<Vec<SweepRow>> {
    for &p in p_grid {
        check_probability(p)?;
    }
    let norm = (d as f64).log2();
    p_grid
        .par_iter()
        .enumerate()
        .map(|(k, &p)| {
            let rho = decohered_bell_state(d, kind, p)?;
            let (eof, certified) = if d == 2 {
                (wootters_eof(&rho)?, true)
            } else {
                let config = engine.clone().with_seed(derive_seed(engine.seed, k as u64));
                let result = minimize_average_entanglement(&rho, &config)?;
                (result.e_f, result.certified)
            };
            Ok(SweepRow {
                p,
                eof_ebits: eof,
                eof_normalized: eof / norm,
                certified,
            })
        })
        .collect()
}
