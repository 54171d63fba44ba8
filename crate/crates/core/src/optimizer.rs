//! Conjugate-gradient minimization of the average entanglement over the
//! unitary freedom of a decomposition.
//!
//! The search always moves about the current decomposition: a step along a
//! Hermitian direction `D` is the exact unitary `exp(i alpha D)`, after which
//! the moved decomposition becomes the new base point. Along a fixed
//! direction these unitaries form a one-parameter group, so the analytic
//! gradient gives the exact derivative `dE/dalpha = Tr(D g(alpha))` at every
//! trial point of a line search. Directions are combined with the
//! Polak-Ribiere rule (clamped at zero), and a converged point is checked by
//! Monte Carlo sampling of random unitary moves over an exponentially wide
//! range of step sizes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gradient::{flatten, gradient_matrix, parameter_count, unflatten, FlatGradient};
use crate::numerics::{hermitian_eig, random_unit_hermitian, CMatrix, EigenSystem};
use crate::states::{
    apply_unitary_unchecked, average_entanglement, eigenstate_decomposition, Decomposition,
    DensityMatrix,
};

/// Golden-ratio growth factor for bracketing.
const GOLD: f64 = 1.618_033_988_749_895;
const MAX_BRACKET_STEPS: usize = 60;
const MAX_ZOOM_STEPS: usize = 100;
/// Line search stops once `|dE/dalpha|` falls to this.
const LINE_DERIVATIVE_TOL: f64 = 1e-10;
/// ... or once the bracket is narrower than this (relative to `1 + alpha`).
const LINE_WIDTH_TOL: f64 = 1e-12;
/// `E_av` is non-negative, so a run at or below this is at the global minimum.
const ZERO_EOF_TOL: f64 = 1e-13;
/// Improvement an escape round must deliver to count as progress.
const ESCAPE_GAIN: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MinimizerConfig {
    /// Relative improvement below which an iteration counts as stalled.
    pub tol_ftol: f64,
    /// Stop when the sup-norm of the flattened gradient reaches this.
    pub tol_grad: f64,
    pub max_iters: usize,
    /// Conjugate-gradient reset period; `None` means `n(n-1)`.
    pub restart_interval: Option<usize>,
    /// Consecutive stalled iterations that end a run.
    pub stall_window: usize,
    pub perturb_on_stall: bool,
    /// Frobenius norm of the generator of each random kick.
    pub perturb_magnitude: f64,
    pub perturb_count: usize,
    pub max_restart_rounds: usize,
    /// Consecutive non-improving escape rounds that end the search. Each
    /// round restarts from the best point after a random unitary of
    /// generator norm `escape_magnitude`.
    pub escape_rounds: usize,
    pub escape_magnitude: f64,
    /// Kick the eigenstate decomposition before the first iteration.
    pub initial_perturbation: bool,
    /// Decomposition size; `None` means the numerical rank of the state.
    pub n_states: Option<usize>,
    /// Zero-norm states appended to the starting decomposition.
    pub pad_states: usize,
    pub mc_trials: usize,
    pub mc_step_min: f64,
    pub mc_step_max: f64,
    /// Largest tolerated decrease found by certification.
    pub cert_tol: f64,
    pub seed: u64,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        Self {
            tol_ftol: 1e-12,
            tol_grad: 1e-10,
            max_iters: 20_000,
            restart_interval: None,
            stall_window: 10,
            perturb_on_stall: true,
            perturb_magnitude: 1e-2,
            perturb_count: 5,
            max_restart_rounds: 10,
            escape_rounds: 3,
            escape_magnitude: 2.0,
            initial_perturbation: false,
            n_states: None,
            pad_states: 0,
            mc_trials: 2000,
            mc_step_min: 1e-8,
            mc_step_max: 1.0,
            cert_tol: 1e-10,
            seed: 0,
        }
    }
}

impl MinimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_ftol", self.tol_ftol),
            ("tol_grad", self.tol_grad),
            ("perturb_magnitude", self.perturb_magnitude),
            ("escape_magnitude", self.escape_magnitude),
            ("mc_step_min", self.mc_step_min),
            ("mc_step_max", self.mc_step_max),
            ("cert_tol", self.cert_tol),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.mc_step_min >= self.mc_step_max {
            return Err(Error::InvalidConfig(format!(
                "mc_step_min {} must be below mc_step_max {}",
                self.mc_step_min, self.mc_step_max
            )));
        }
        if self.restart_interval == Some(0) {
            return Err(Error::InvalidConfig(
                "restart_interval must be positive".into(),
            ));
        }
        if self.stall_window == 0 {
            return Err(Error::InvalidConfig("stall_window must be positive".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Deterministic sub-seed for stream `index` of a master seed (splitmix64).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Initial,
    LineSearch,
    /// Random kicks or a certification move; may raise `E_av`.
    Perturbation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub e_av: f64,
    /// Sup-norm of the flattened gradient after the step.
    pub grad_norm: f64,
    pub step_alpha: f64,
    pub kind: StepKind,
}

#[derive(Debug, Clone, Default)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    /// True if every line-search step lowered `E_av` (within `slack`)
    /// relative to the record before it.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].kind != StepKind::LineSearch || w[1].e_av <= w[0].e_av + slack)
    }

    pub fn line_search_records(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records
            .iter()
            .filter(|r| r.kind == StepKind::LineSearch)
    }
}

#[derive(Debug, Clone)]
pub struct MinimizationResult {
    /// Entanglement of formation estimate in ebits.
    pub e_f: f64,
    pub decomposition: Decomposition,
    /// Unitary taking the initial eigenstate decomposition to `decomposition`.
    pub cumulative_unitary: CMatrix,
    pub trace: ConvergenceTrace,
    pub certified: bool,
    pub restarts_used: usize,
    /// Line-search iterations performed.
    pub iterations: usize,
    /// Average entanglement of the starting eigenstate decomposition.
    pub initial_e_av: f64,
}

/// Outcome of [`line_minimize`].
#[derive(Debug, Clone)]
pub struct LineMinimum {
    pub alpha: f64,
    pub decomposition: Decomposition,
    pub e_av: f64,
    /// `exp(i alpha D)`.
    pub step_unitary: CMatrix,
    /// `dE/dalpha` at `alpha`.
    pub slope: f64,
    pub evaluations: usize,
}

#[derive(Clone)]
struct LinePoint {
    alpha: f64,
    e: f64,
    slope: f64,
    dec: Decomposition,
    unitary: CMatrix,
}

struct Line<'a> {
    base: &'a Decomposition,
    direction: &'a CMatrix,
    eig: EigenSystem,
    evaluations: usize,
}

impl<'a> Line<'a> {
    fn new(base: &'a Decomposition, direction: &'a CMatrix) -> Result<Self> {
        Ok(Self {
            base,
            direction,
            eig: hermitian_eig(direction)?,
            evaluations: 0,
        })
    }

    fn at(&mut self, alpha: f64) -> Result<LinePoint> {
        self.evaluations += 1;
        let unitary = self.eig.exp_i(alpha);
        let dec = apply_unitary_unchecked(self.base, &unitary);
        let e = average_entanglement(&dec);
        let g = gradient_matrix(&dec)?;
        let slope = crate::numerics::trace_of_product(self.direction, g.matrix()).re;
        Ok(LinePoint {
            alpha,
            e,
            slope,
            dec,
            unitary,
        })
    }
}

/// Minimizer of a cubic Hermite interpolant through two points with
/// derivatives, if it has one.
fn cubic_minimizer(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> Option<f64> {
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    if disc < 0.0 {
        return None;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = db - da + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let t = b - (b - a) * (db + d2 - d1) / denom;
    t.is_finite().then_some(t)
}

/// Minimizes `E(alpha) = E_av(exp(i alpha D) dec)` for `alpha >= 0`.
///
/// Expands a bracket by golden-ratio steps from `1 / ||D||_F`, then shrinks
/// it with safeguarded cubic interpolation on values and exact derivatives,
/// falling back to bisection whenever an interpolated step does not at least
/// halve the step taken two iterations earlier.
pub fn line_minimize(dec: &Decomposition, direction: &CMatrix) -> Result<LineMinimum> {
    let norm = direction.norm();
    if norm == 0.0 {
        return Err(Error::NotDescentDirection { slope: 0.0 });
    }
    let mut line = Line::new(dec, direction)?;
    let origin = line.at(0.0)?;
    if origin.slope >= 0.0 {
        return Err(Error::NotDescentDirection {
            slope: origin.slope,
        });
    }

    // bracket: lo has negative slope and the lowest value seen; the minimum
    // lies between lo and hi
    let mut lo = origin;
    let mut step = 1.0 / norm;
    let mut hi = None;
    for _ in 0..MAX_BRACKET_STEPS {
        let trial = line.at(lo.alpha + step)?;
        if trial.e > lo.e || trial.slope >= 0.0 {
            hi = Some(trial);
            break;
        }
        lo = trial;
        step *= GOLD;
    }
    let Some(mut hi) = hi else {
        return Ok(finish(lo, line.evaluations));
    };

    let mut last_step = (hi.alpha - lo.alpha).abs();
    let mut step_before = last_step;
    for _ in 0..MAX_ZOOM_STEPS {
        if lo.slope.abs() <= LINE_DERIVATIVE_TOL {
            break;
        }
        let width = (hi.alpha - lo.alpha).abs();
        if width <= LINE_WIDTH_TOL * (1.0 + lo.alpha.abs()) {
            break;
        }
        let (left, right) = if lo.alpha < hi.alpha {
            (lo.alpha, hi.alpha)
        } else {
            (hi.alpha, lo.alpha)
        };
        let margin = 0.01 * width;
        let bisect = 0.5 * (lo.alpha + hi.alpha);
        let mut t = cubic_minimizer(lo.alpha, lo.e, lo.slope, hi.alpha, hi.e, hi.slope)
            .filter(|&t| t > left + margin && t < right - margin)
            .unwrap_or(bisect);
        if (t - lo.alpha).abs() > 0.5 * step_before {
            t = bisect;
        }
        step_before = last_step;
        last_step = (t - lo.alpha).abs();

        let trial = line.at(t)?;
        if trial.e > lo.e {
            hi = trial;
        } else {
            if trial.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = trial;
        }
    }
    Ok(finish(lo, line.evaluations))
}

fn finish(point: LinePoint, evaluations: usize) -> LineMinimum {
    LineMinimum {
        alpha: point.alpha,
        decomposition: point.dec,
        e_av: point.e,
        step_unitary: point.unitary,
        slope: point.slope,
        evaluations,
    }
}

/// Result of Monte Carlo certification.
#[derive(Debug, Clone)]
pub struct Certification {
    pub passed: bool,
    /// Largest decrease of `E_av` found by any sampled move (may be negative).
    pub best_decrease: f64,
    /// Generator `H` of the best move `exp(iH)` when certification failed.
    pub witness: Option<CMatrix>,
}

/// Samples `mc_trials` random unit-norm Hermitian directions, with step
/// sizes spaced logarithmically over `[mc_step_min, mc_step_max]`, and tries
/// each step in both signs. Passes when no move lowers `E_av` by more than
/// `cert_tol`.
pub fn certify_minimum(dec: &Decomposition, config: &MinimizerConfig) -> Result<Certification> {
    config.validate()?;
    let n = dec.len();
    let e0 = average_entanglement(dec);
    if n < 2 || config.mc_trials == 0 {
        return Ok(Certification {
            passed: true,
            best_decrease: 0.0,
            witness: None,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let trials = config.mc_trials;
    let ratio = config.mc_step_max / config.mc_step_min;
    let moves: Vec<CMatrix> = (0..trials)
        .map(|k| {
            let frac = if trials > 1 {
                k as f64 / (trials - 1) as f64
            } else {
                0.0
            };
            let step = config.mc_step_min * ratio.powf(frac);
            random_unit_hermitian(&mut rng, n).scale(step)
        })
        .collect();

    let best = moves
        .par_iter()
        .enumerate()
        .map(|(k, h)| -> Result<(f64, usize, f64)> {
            let eig = hermitian_eig(h)?;
            let mut best = (f64::NEG_INFINITY, k, 1.0);
            for sign in [1.0, -1.0] {
                let moved = apply_unitary_unchecked(dec, &eig.exp_i(sign));
                let decrease = e0 - average_entanglement(&moved);
                if decrease > best.0 {
                    best = (decrease, k, sign);
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((f64::NEG_INFINITY, 0, 1.0), |acc, x| {
            if x.0 > acc.0 {
                x
            } else {
                acc
            }
        });

    let passed = best.0 <= config.cert_tol;
    Ok(Certification {
        passed,
        best_decrease: best.0,
        witness: (!passed).then(|| moves[best.1].scale(best.2)),
    })
}

/// Applies `exp(iH)` with `H` a random Hermitian matrix of Frobenius norm
/// `magnitude`.
pub fn perturb_random(dec: &Decomposition, magnitude: f64, seed: u64) -> Result<Decomposition> {
    Ok(random_kick(dec, magnitude, seed)?.0)
}

fn random_kick(dec: &Decomposition, magnitude: f64, seed: u64) -> Result<(Decomposition, CMatrix)> {
    if magnitude.is_nan() || magnitude <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "perturbation magnitude {magnitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random_unit_hermitian(&mut rng, dec.len()).scale(magnitude);
    let u = hermitian_eig(&h)?.exp_i(1.0);
    Ok((apply_unitary_unchecked(dec, &u), u))
}

/// Mutable state of one minimization run.
struct Search<'a> {
    config: &'a MinimizerConfig,
    dec: Decomposition,
    e: f64,
    unitary: CMatrix,
    trace: ConvergenceTrace,
    iterations: usize,
    seed_counter: u64,
}

enum RunEnd {
    Converged,
    OutOfIterations,
}

impl Search<'_> {
    fn next_seed(&mut self) -> u64 {
        self.seed_counter += 1;
        derive_seed(self.config.seed, self.seed_counter)
    }

    fn flat_gradient(&self) -> Result<FlatGradient> {
        Ok(flatten(&gradient_matrix(&self.dec)?))
    }

    fn apply(&mut self, dec: Decomposition, e: f64, step: &CMatrix) {
        self.dec = dec;
        self.e = e;
        self.unitary = step * &self.unitary;
    }

    fn record(&mut self, grad_norm: f64, alpha: f64, kind: StepKind) {
        self.trace.push(TraceRecord {
            iteration: self.iterations,
            e_av: self.e,
            grad_norm,
            step_alpha: alpha,
            kind,
        });
    }

    fn kick(&mut self) -> Result<()> {
        for _ in 0..self.config.perturb_count {
            let seed = self.next_seed();
            let (dec, u) = random_kick(&self.dec, self.config.perturb_magnitude, seed)?;
            let e = average_entanglement(&dec);
            self.apply(dec, e, &u);
        }
        let g = self.flat_gradient()?.sup_norm();
        self.record(g, 0.0, StepKind::Perturbation);
        Ok(())
    }

    /// Conjugate-gradient iterations until the gradient vanishes, progress
    /// stalls, or the iteration budget runs out.
    fn run(&mut self) -> Result<RunEnd> {
        let n = self.dec.len();
        let restart_interval = self
            .config
            .restart_interval
            .unwrap_or_else(|| parameter_count(n).max(1));
        let mut grad = self.flat_gradient()?;
        let mut dir: Vec<f64> = grad.components.iter().map(|x| -x).collect();
        let mut steepest = true;
        let mut since_restart = 0;
        let mut stalled = 0;

        loop {
            if grad.sup_norm() <= self.config.tol_grad || self.e <= ZERO_EOF_TOL {
                return Ok(RunEnd::Converged);
            }
            if self.iterations >= self.config.max_iters {
                return Ok(RunEnd::OutOfIterations);
            }
            let direction = unflatten(&dir, n)?;
            let found = match line_minimize(&self.dec, &direction) {
                Ok(found) => found,
                Err(Error::NotDescentDirection { .. }) if !steepest => {
                    dir = grad.components.iter().map(|x| -x).collect();
                    steepest = true;
                    since_restart = 0;
                    continue;
                }
                Err(Error::NotDescentDirection { .. }) => return Ok(RunEnd::Converged),
                Err(e) => return Err(e),
            };
            self.iterations += 1;
            let previous = self.e;
            self.apply(found.decomposition, found.e_av, &found.step_unitary);

            let new_grad = self.flat_gradient()?;
            self.record(new_grad.sup_norm(), found.alpha, StepKind::LineSearch);

            let improvement = previous - self.e;
            if improvement <= self.config.tol_ftol * previous.abs().max(1e-4) {
                stalled += 1;
                if stalled >= self.config.stall_window {
                    return Ok(RunEnd::Converged);
                }
            } else {
                stalled = 0;
            }

            since_restart += 1;
            let old_sq = grad.dot(&grad.components);
            let beta = if since_restart >= restart_interval || old_sq == 0.0 {
                since_restart = 0;
                0.0
            } else {
                let num: f64 = new_grad
                    .components
                    .iter()
                    .zip(&grad.components)
                    .map(|(g1, g0)| g1 * (g1 - g0))
                    .sum();
                (num / old_sq).max(0.0)
            };
            dir = new_grad
                .components
                .iter()
                .zip(&dir)
                .map(|(g, d)| -g + beta * d)
                .collect();
            steepest = beta == 0.0;
            if new_grad.dot(&dir) >= 0.0 {
                dir = new_grad.components.iter().map(|x| -x).collect();
                steepest = true;
                since_restart = 0;
            }
            grad = new_grad;
        }
    }
}

struct Best {
    e: f64,
    dec: Decomposition,
    unitary: CMatrix,
    certified: bool,
}

impl Search<'_> {
    /// Runs and certifies, applying witness moves and kicks while
    /// certification finds descent. Returns the certification outcome of the
    /// final point and the number of restarts used.
    fn descend(&mut self, budget: &mut usize) -> Result<bool> {
        loop {
            let end = self.run()?;
            let cert_config = MinimizerConfig {
                seed: self.next_seed(),
                ..self.config.clone()
            };
            let cert = certify_minimum(&self.dec, &cert_config)?;
            if cert.passed {
                return Ok(true);
            }
            if matches!(end, RunEnd::OutOfIterations)
                || !self.config.perturb_on_stall
                || *budget == 0
            {
                return Ok(false);
            }
            *budget -= 1;
            if let Some(h) = cert.witness {
                let u = hermitian_eig(&h)?.exp_i(1.0);
                let dec = apply_unitary_unchecked(&self.dec, &u);
                let e = average_entanglement(&dec);
                self.apply(dec, e, &u);
            }
            self.kick()?;
        }
    }

    fn snapshot(&self, certified: bool) -> Best {
        Best {
            e: self.e,
            dec: self.dec.clone(),
            unitary: self.unitary.clone(),
            certified,
        }
    }
}

/// Entanglement of formation by minimizing `E_av` over unitary mixings of
/// the eigenstate decomposition of `rho`.
///
/// Each descent is a conjugate-gradient run followed by [`certify_minimum`].
/// If certification finds a lower point and `perturb_on_stall` is set, the
/// witness move and `perturb_count` random kicks are applied and the descent
/// resumes, for at most `max_restart_rounds` rounds in total.
///
/// The landscape has stationary points that random local moves do not
/// escape, typically where some states are exact product states. After the
/// first descent, escape rounds restart from the best point under a large
/// random unitary until `escape_rounds` consecutive rounds fail to improve.
/// The best decomposition seen is returned.
pub fn minimize_average_entanglement(
    rho: &DensityMatrix,
    config: &MinimizerConfig,
) -> Result<MinimizationResult> {
    config.validate()?;
    let start = eigenstate_decomposition(rho, config.n_states)?.padded(config.pad_states);
    minimize_from_decomposition(start, config)
}

/// As [`minimize_average_entanglement`], starting from `start` instead of
/// the eigenstate decomposition. `config.n_states` and `config.pad_states` are
/// ignored and the
/// cumulative unitary is relative to `start`.
pub fn minimize_from_decomposition(
    start: Decomposition,
    config: &MinimizerConfig,
) -> Result<MinimizationResult> {
    config.validate()?;
    let n = start.len();
    let initial_e_av = average_entanglement(&start);
    let mut search = Search {
        config,
        e: initial_e_av,
        dec: start,
        unitary: CMatrix::identity(n, n),
        trace: ConvergenceTrace::default(),
        iterations: 0,
        seed_counter: 0,
    };
    let g0 = search.flat_gradient()?.sup_norm();
    search.record(g0, 0.0, StepKind::Initial);
    if config.initial_perturbation && n > 1 {
        search.kick()?;
    }

    let mut budget = config.max_restart_rounds;
    let certified = search.descend(&mut budget)?;
    let mut best = search.snapshot(certified);
    let mut escapes = 0;
    let mut failures = 0;
    while n > 1 && failures < config.escape_rounds && best.e > ZERO_EOF_TOL {
        if search.iterations >= config.max_iters {
            break;
        }
        escapes += 1;
        search.dec = best.dec.clone();
        search.e = best.e;
        search.unitary = best.unitary.clone();
        let seed = search.next_seed();
        let (dec, u) = random_kick(&search.dec, config.escape_magnitude, seed)?;
        let e = average_entanglement(&dec);
        search.apply(dec, e, &u);
        let g = search.flat_gradient()?.sup_norm();
        search.record(g, 0.0, StepKind::Perturbation);
        let certified = search.descend(&mut budget)?;
        if search.e < best.e - ESCAPE_GAIN {
            best = search.snapshot(certified);
            failures = 0;
        } else {
            failures += 1;
        }
    }

    Ok(MinimizationResult {
        e_f: best.e,
        decomposition: best.dec,
        cumulative_unitary: best.unitary,
        trace: search.trace,
        certified: best.certified,
        restarts_used: config.max_restart_rounds - budget + escapes,
        iterations: search.iterations,
        initial_e_av,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::psi_plus;
    use crate::numerics::test_util::*;
    use crate::numerics::{unitarity_defect, ONE, ZERO};
    use crate::oracles::{isotropic_eof, isotropic_state, wootters_eof};
    use crate::states::{
        apply_unitary, pure_state_entanglement, random_density_matrix, BipartiteDims,
    };
    use num_complex::Complex64;
    use std::f64::consts::FRAC_PI_4;

    fn quick() -> MinimizerConfig {
        MinimizerConfig {
            mc_trials: 500,
            ..MinimizerConfig::default()
        }
    }

    /// Equal mixture of two Bell states: separable, with the product
    /// decomposition a rotation by pi/4 away from the Bell one.
    fn bell_mixture_rotated(offset: f64) -> Decomposition {
        let dims = BipartiteDims::square(2).unwrap();
        let s = 0.5f64.sqrt();
        let phi = [s, 0.0, 0.0, s];
        let psi = [0.0, s, s, 0.0];
        let states = CMatrix::from_fn(4, 2, |r, c| {
            let v = if c == 0 {
                offset.cos() * phi[r] + offset.sin() * psi[r]
            } else {
                -offset.sin() * phi[r] + offset.cos() * psi[r]
            };
            Complex64::new(s * v, 0.0)
        });
        Decomposition::new(dims, states).unwrap()
    }

    fn real_rotation_generator() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, -crate::numerics::I, crate::numerics::I, ZERO])
    }

    #[test]
    fn line_search_matches_grid_scan() {
        let offset = 0.1;
        let dec = bell_mixture_rotated(offset);
        let d = real_rotation_generator();
        let found = line_minimize(&dec, &d).unwrap();
        assert!(
            (found.alpha - (FRAC_PI_4 - offset)).abs() <= 1e-6,
            "alpha {}",
            found.alpha
        );

        let end = std::f64::consts::FRAC_PI_2 - offset;
        let steps = 10_000;
        let eig = hermitian_eig(&d).unwrap();
        let (grid_alpha, grid_e) = (0..=steps)
            .map(|k| {
                let a = end * k as f64 / steps as f64;
                (
                    a,
                    average_entanglement(&apply_unitary_unchecked(&dec, &eig.exp_i(a))),
                )
            })
            .fold(
                (0.0, f64::MAX),
                |best, x| if x.1 < best.1 { x } else { best },
            );
        assert!((found.alpha - grid_alpha).abs() <= end / steps as f64);
        assert!(found.e_av <= grid_e + 1e-12);
        assert!(found.e_av < 1e-12);
    }

    #[test]
    fn line_search_ends_stationary() {
        let dims = BipartiteDims::square(3).unwrap();
        let rho = random_density_matrix(dims, 5, 3).unwrap();
        let dec = eigenstate_decomposition(&rho, None).unwrap();
        let e0 = average_entanglement(&dec);
        let g = gradient_matrix(&dec).unwrap();
        let mut r = rng(4);
        for _ in 0..5 {
            let mut d = random_hermitian(&mut r, dec.len());
            if crate::gradient::directional_derivative(&g, &d).unwrap() > 0.0 {
                d = -d;
            }
            let found = line_minimize(&dec, &d).unwrap();
            assert!(found.e_av < e0);
            assert!(found.slope.abs() <= 1e-8, "slope {}", found.slope);
            assert!(found.decomposition.reconstruction_error(rho.matrix()) <= 1e-12);
        }
    }

    #[test]
    fn line_search_rejects_ascent_and_zero_directions() {
        let dec = bell_mixture_rotated(0.1);
        let d = real_rotation_generator();
        assert!(matches!(
            line_minimize(&dec, &-d),
            Err(Error::NotDescentDirection { .. })
        ));
        assert!(matches!(
            line_minimize(&dec, &CMatrix::zeros(2, 2)),
            Err(Error::NotDescentDirection { .. })
        ));
    }

    #[test]
    fn cubic_step_finds_quadratic_minimum() {
        // f = (x - 2)^2
        let t = cubic_minimizer(0.0, 4.0, -4.0, 3.0, 1.0, 2.0).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn certification_of_pure_state_passes() {
        let dims = BipartiteDims::square(2).unwrap();
        let rho = random_density_matrix(dims, 1, 9).unwrap();
        let dec = eigenstate_decomposition(&rho, Some(3)).unwrap();
        let cert = certify_minimum(&dec, &quick()).unwrap();
        assert!(cert.passed && cert.witness.is_none());
    }

    #[test]
    fn certification_rejects_isotropic_qubit_eigenbasis() {
        let rho = isotropic_state(2, 0.9).unwrap();
        let dec = eigenstate_decomposition(&rho, None).unwrap();
        assert!(average_entanglement(&dec) > isotropic_eof(2, 0.9).unwrap());
        let cert = certify_minimum(&dec, &quick()).unwrap();
        assert!(!cert.passed);
        let h = cert.witness.unwrap();
        let moved = apply_unitary_unchecked(&dec, &hermitian_eig(&h).unwrap().exp_i(1.0));
        let drop = average_entanglement(&dec) - average_entanglement(&moved);
        assert!((drop - cert.best_decrease).abs() < 1e-12);
    }

    #[test]
    fn perturbation_is_small_deterministic_and_valid() {
        let dims = BipartiteDims::new(2, 3).unwrap();
        let rho = random_density_matrix(dims, 4, 5).unwrap();
        let dec = eigenstate_decomposition(&rho, None).unwrap();
        let a = perturb_random(&dec, 1e-8, 1).unwrap();
        let b = perturb_random(&dec, 1e-8, 1).unwrap();
        assert_eq!(a.states(), b.states());
        assert!((a.states() - dec.states()).norm() <= 1e-8);
        assert!(a.reconstruction_error(rho.matrix()) <= 1e-12);
        assert_ne!(perturb_random(&dec, 1e-8, 2).unwrap().states(), a.states());
        assert!(perturb_random(&dec, 0.0, 1).is_err());
    }

    #[test]
    fn perturbation_leaves_stationary_point() {
        let rho = isotropic_state(2, 0.9).unwrap();
        let dec = eigenstate_decomposition(&rho, None).unwrap();
        assert!(gradient_matrix(&dec).unwrap().max_abs() < 1e-12);
        let kicked = perturb_random(&dec, 1e-2, 3).unwrap();
        assert!(gradient_matrix(&kicked).unwrap().max_abs() > 1e-6);
    }

    #[test]
    fn pure_state_needs_no_iterations() {
        let dims = BipartiteDims::square(3).unwrap();
        let rho = random_density_matrix(dims, 1, 21).unwrap();
        let r = minimize_average_entanglement(&rho, &quick()).unwrap();
        let psi: Vec<Complex64> = r.decomposition.state(0).iter().copied().collect();
        assert!((r.e_f - pure_state_entanglement(&psi, dims).unwrap()).abs() <= 1e-12);
        assert_eq!(r.iterations, 0);
        assert!(r.certified);
    }

    #[test]
    fn maximally_mixed_state_is_separable() {
        let rho = DensityMatrix::maximally_mixed(BipartiteDims::square(2).unwrap());
        let r = minimize_average_entanglement(&rho, &quick()).unwrap();
        assert!(r.e_f.abs() <= 1e-12);
        assert!(r.certified);
    }

    #[test]
    fn bell_state_has_one_ebit() {
        let dims = BipartiteDims::square(2).unwrap();
        let rho = DensityMatrix::pure(dims, &psi_plus(2).unwrap()).unwrap();
        let r = minimize_average_entanglement(&rho, &quick()).unwrap();
        assert!((r.e_f - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn result_invariants_hold() {
        let dims = BipartiteDims::new(2, 3).unwrap();
        let rho = random_density_matrix(dims, 4, 17).unwrap();
        let start = eigenstate_decomposition(&rho, None).unwrap();
        let r = minimize_average_entanglement(&rho, &quick()).unwrap();
        assert!(r.decomposition.reconstruction_error(rho.matrix()) <= 1e-10);
        assert!(unitarity_defect(&r.cumulative_unitary) <= 1e-10);
        assert!((r.e_f - average_entanglement(&r.decomposition)).abs() <= 1e-12);
        let mapped = apply_unitary(&start, &r.cumulative_unitary).unwrap();
        assert!((mapped.states() - r.decomposition.states()).norm() <= 1e-10);
        assert!(r.trace.is_monotone(1e-14));
        assert!(r.e_f <= r.initial_e_av);
        assert_eq!(r.trace.records[0].kind, StepKind::Initial);
    }

    #[test]
    fn two_qubit_states_match_wootters() {
        let dims = BipartiteDims::square(2).unwrap();
        for seed in 0..4u64 {
            let rho = random_density_matrix(dims, 2 + (seed as usize % 3), 500 + seed).unwrap();
            let config = MinimizerConfig {
                n_states: Some(4),
                ..quick()
            };
            let r = minimize_average_entanglement(&rho, &config).unwrap();
            let w = wootters_eof(&rho).unwrap();
            assert!((r.e_f - w).abs() <= 1e-8, "seed {seed}: {} vs {w}", r.e_f);
        }
    }

    #[test]
    fn isotropic_qubit_escapes_eigenbasis() {
        let rho = isotropic_state(2, 0.9).unwrap();
        let config = MinimizerConfig {
            initial_perturbation: true,
            ..quick()
        };
        let r = minimize_average_entanglement(&rho, &config).unwrap();
        assert!((r.e_f - isotropic_eof(2, 0.9).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn different_seeds_agree() {
        let dims = BipartiteDims::square(3).unwrap();
        let rho = random_density_matrix(dims, 4, 33).unwrap();
        let a = minimize_average_entanglement(&rho, &quick().with_seed(1)).unwrap();
        let b = minimize_average_entanglement(&rho, &quick().with_seed(2)).unwrap();
        assert!((a.e_f - b.e_f).abs() <= 1e-7, "{} vs {}", a.e_f, b.e_f);
    }

    #[test]
    fn same_seed_is_reproducible() {
        let dims = BipartiteDims::square(2).unwrap();
        let rho = random_density_matrix(dims, 3, 8).unwrap();
        let a = minimize_average_entanglement(&rho, &quick().with_seed(5)).unwrap();
        let b = minimize_average_entanglement(&rho, &quick().with_seed(5)).unwrap();
        assert_eq!(a.e_f, b.e_f);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn padding_is_accepted() {
        let dims = BipartiteDims::square(2).unwrap();
        let rho = random_density_matrix(dims, 2, 12).unwrap();
        let config = MinimizerConfig {
            pad_states: 2,
            ..quick()
        };
        let r = minimize_average_entanglement(&rho, &config).unwrap();
        assert_eq!(r.decomposition.len(), 4);
        assert!(r.decomposition.reconstruction_error(rho.matrix()) <= 1e-10);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            MinimizerConfig {
                tol_grad: 0.0,
                ..MinimizerConfig::default()
            },
            MinimizerConfig {
                mc_step_min: 2.0,
                ..MinimizerConfig::default()
            },
            MinimizerConfig {
                restart_interval: Some(0),
                ..MinimizerConfig::default()
            },
            MinimizerConfig {
                stall_window: 0,
                ..MinimizerConfig::default()
            },
            MinimizerConfig {
                escape_magnitude: f64::NAN,
                ..MinimizerConfig::default()
            },
        ];
        for config in bad {
            assert!(matches!(config.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..100).map(|k| derive_seed(7, k)).collect();
        assert_eq!(seeds.len(), 100);
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        assert_ne!(derive_seed(7, 3), derive_seed(8, 3));
    }

    #[test]
    fn unit_generator_gives_identity_at_zero() {
        let eig = hermitian_eig(&real_rotation_generator()).unwrap();
        let u = eig.exp_i(0.0);
        assert!((u - CMatrix::from_diagonal_element(2, 2, ONE)).norm() < 1e-15);
    }
}
