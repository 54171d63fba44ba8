//! Command-line front end: state files, experiment commands and CSV output.
//!
//! State file format: the first non-comment line holds `dA dB`; it is
//! followed by `dA*dB` rows of `dA*dB` complex entries written as `re im`
//! pairs. Lines starting with `#` are ignored. Entries are written with 17
//! significant digits so that a file parses back to the identical matrix.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::channels::{channel_sweep, ChannelKind, SweepRow};
use crate::error::{Error, Result};
use crate::numerics::CMatrix;
use crate::optimizer::{
    minimize_average_entanglement, ConvergenceTrace, MinimizerConfig, StepKind,
};
use crate::oracles::{isotropic_eof, isotropic_state, wootters_eof};
use crate::states::{random_density_matrix, BipartiteDims, DensityMatrix};

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    InputError,
    Uncertified,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::InputError => 1,
            Status::Uncertified => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "eof",
    version,
    about = "Entanglement of formation by conjugate-gradient minimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entanglement of formation of a state file.
    Compute(ComputeArgs),
    /// Decohere one half of a Bell state and tabulate its entanglement.
    Sweep(SweepArgs),
    /// Compare the isotropic-state formula with the minimizer.
    Isotropic(IsotropicArgs),
    /// Write a seeded random density matrix.
    Random(RandomArgs),
}

/// Minimizer settings shared by the commands that run it.
#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Master seed; falls back to EOF_SOLVER_SEED, then 0.
    #[arg(long, env = "EOF_SOLVER_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_grad: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol_ftol: f64,
    /// Monte Carlo moves used to certify a minimum.
    #[arg(long, default_value_t = 2000)]
    pub mc_trials: usize,
    /// Decomposition size (default: rank of the state).
    #[arg(long)]
    pub n_states: Option<usize>,
    /// Zero-norm states appended to the starting decomposition.
    #[arg(long, default_value_t = 0)]
    pub pad_states: usize,
    /// Kick the eigenstate decomposition before the first iteration.
    #[arg(long)]
    pub initial_perturbation: bool,
}

impl EngineArgs {
    pub fn config(&self) -> MinimizerConfig {
        MinimizerConfig {
            seed: self.seed,
            max_iters: self.max_iters,
            tol_grad: self.tol_grad,
            tol_ftol: self.tol_ftol,
            mc_trials: self.mc_trials,
            n_states: self.n_states,
            pad_states: self.pad_states,
            initial_perturbation: self.initial_perturbation,
            ..MinimizerConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Oracle {
    Wootters,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    pub state: PathBuf,
    /// Write the convergence trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also evaluate a closed-form oracle (two qubits only).
    #[arg(long, value_enum)]
    pub oracle: Option<Oracle>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = ChannelKind::Depolarizing)]
    pub channel: ChannelKind,
    #[arg(long, default_value_t = 0.0)]
    pub p_start: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p_end: f64,
    #[arg(long, default_value_t = 11)]
    pub p_steps: usize,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct IsotropicArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Comma-separated fidelities (default: nine points spanning (1/d, 1)).
    #[arg(long = "F-grid", value_delimiter = ',')]
    pub f_grid: Vec<f64>,
    /// Add the minimizer's value and its distance from the formula.
    #[arg(long)]
    pub compare_engine: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct RandomArgs {
    #[arg(long = "dA")]
    pub da: usize,
    #[arg(long = "dB")]
    pub db: usize,
    #[arg(long)]
    pub rank: usize,
    #[arg(long, env = "EOF_SOLVER_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and maps the outcome
/// to an exit code. Errors go to stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                Status::InputError.code()
            } else {
                0
            });
        }
    };
    let stdout = io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Status::InputError.code())
        }
    }
}

/// Runs a parsed command, writing reports and stdout CSV to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<Status> {
    match &cli.command {
        Command::Compute(args) => cmd_compute(args, out),
        Command::Sweep(args) => cmd_sweep(args, out),
        Command::Isotropic(args) => cmd_isotropic(args, out),
        Command::Random(args) => cmd_random(args),
    }
}

pub fn cmd_compute(args: &ComputeArgs, out: &mut dyn Write) -> Result<Status> {
    let rho = read_state_file(&args.state)?;
    let dims = rho.dims();
    if args.oracle.is_some() && (dims.da(), dims.db()) != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: "2x2 for the Wootters oracle".into(),
            found: format!("{}x{}", dims.da(), dims.db()),
        });
    }
    let result = minimize_average_entanglement(&rho, &args.engine.config())?;
    writeln!(out, "E_F = {} ebits", format_significant(result.e_f, 15))?;
    writeln!(out, "certified: {}", result.certified)?;
    writeln!(out, "iterations: {}", result.iterations)?;
    writeln!(out, "restarts: {}", result.restarts_used)?;
    if args.oracle == Some(Oracle::Wootters) {
        let w = wootters_eof(&rho)?;
        writeln!(out, "wootters = {} ebits", format_significant(w, 15))?;
        writeln!(out, "abs_diff = {:.3e}", (result.e_f - w).abs())?;
    }
    if let Some(path) = &args.trace {
        fs::write(path, trace_csv(&result.trace))?;
    }
    Ok(if result.certified {
        Status::Success
    } else {
        Status::Uncertified
    })
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<Status> {
    let grid = probability_grid(args.p_start, args.p_end, args.p_steps)?;
    let rows = channel_sweep(args.d, args.channel, &grid, &args.engine.config())?;
    emit(args.out.as_deref(), &sweep_csv(&rows), out)?;
    Ok(if rows.iter().all(|r| r.certified) {
        Status::Success
    } else {
        Status::Uncertified
    })
}

pub fn cmd_isotropic(args: &IsotropicArgs, out: &mut dyn Write) -> Result<Status> {
    let d = args.d;
    if d < 2 {
        return Err(Error::OutOfRange(format!("d = {d} must be at least 2")));
    }
    let grid = if args.f_grid.is_empty() {
        default_fidelity_grid(d)
    } else {
        args.f_grid.clone()
    };
    let formula = grid
        .iter()
        .map(|&f| isotropic_eof(d, f))
        .collect::<Result<Vec<_>>>()?;

    let mut csv = String::new();
    let mut status = Status::Success;
    if args.compare_engine {
        let mut config = args.engine.config();
        // the eigenstate decomposition of a two-qubit isotropic state is a
        // stationary point that is not the minimum
        config.initial_perturbation |= d == 2;
        let engine = grid
            .par_iter()
            .enumerate()
            .map(|(k, &f)| {
                let config = config
                    .clone()
                    .with_seed(crate::optimizer::derive_seed(config.seed, k as u64));
                minimize_average_entanglement(&isotropic_state(d, f)?, &config)
            })
            .collect::<Result<Vec<_>>>()?;
        csv.push_str("F,eof_formula,eof_engine,abs_diff\n");
        for ((f, exact), result) in grid.iter().zip(&formula).zip(&engine) {
            if !result.certified {
                status = Status::Uncertified;
            }
            csv.push_str(&format!(
                "{},{},{},{}\n",
                format_significant(*f, 12),
                format_significant(*exact, 12),
                format_significant(result.e_f, 12),
                format_significant((result.e_f - exact).abs(), 12),
            ));
        }
    } else {
        csv.push_str("F,eof_formula\n");
        for (f, exact) in grid.iter().zip(&formula) {
            csv.push_str(&format!(
                "{},{}\n",
                format_significant(*f, 12),
                format_significant(*exact, 12)
            ));
        }
    }
    emit(args.out.as_deref(), &csv, out)?;
    Ok(status)
}

pub fn cmd_random(args: &RandomArgs) -> Result<Status> {
    let dims = BipartiteDims::new(args.da, args.db)?;
    let rho = random_density_matrix(dims, args.rank, args.seed)?;
    write_state_file(&args.out, &rho)?;
    Ok(Status::Success)
}

/// `steps` evenly spaced probabilities from `start` to `end` inclusive.
pub fn probability_grid(start: f64, end: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::OutOfRange("p-steps must be positive".into()));
    }
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) || start > end {
        return Err(Error::OutOfRange(format!(
            "need 0 <= p-start <= p-end <= 1, got {start}, {end}"
        )));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let h = (end - start) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| {
            if k + 1 == steps {
                end
            } else {
                start + h * k as f64
            }
        })
        .collect())
}

/// Nine fidelities evenly spaced strictly inside `(1/d, 1)`.
pub fn default_fidelity_grid(d: usize) -> Vec<f64> {
    let lo = 1.0 / d as f64;
    (1..10).map(|k| lo + (1.0 - lo) * k as f64 / 10.0).collect()
}

/// `x` in decimal notation with `digits` significant digits; scientific
/// notation outside `[1e-5, 1e15)`.
pub fn format_significant(x: f64, digits: usize) -> String {
    assert!(digits > 0);
    if x == 0.0 || !x.is_finite() {
        return format!("{:.*}", digits - 1, x);
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exponent) {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can carry into a new leading digit
        let rounded: f64 = s.parse().unwrap_or(x);
        let carried = rounded.abs().log10().floor() as i32;
        if carried != exponent {
            let decimals = (digits as i32 - 1 - carried).max(0) as usize;
            return format!("{x:.decimals$}");
        }
        s
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut csv = String::from("p,eof_ebits,eof_normalized,certified\n");
    for row in rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            format_significant(row.p, 12),
            format_significant(row.eof_ebits, 12),
            format_significant(row.eof_normalized, 12),
            row.certified
        ));
    }
    csv
}

pub fn trace_csv(trace: &ConvergenceTrace) -> String {
    let mut csv = String::from("iteration,e_av,grad_norm,step_alpha,kind\n");
    for r in &trace.records {
        let kind = match r.kind {
            StepKind::Initial => "initial",
            StepKind::LineSearch => "line_search",
            StepKind::Perturbation => "perturbation",
        };
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{}\n",
            r.iteration, r.e_av, r.grad_norm, r.step_alpha, kind
        ));
    }
    csv
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn format_state(rho: &DensityMatrix) -> String {
    let dims = rho.dims();
    let m = rho.matrix();
    let mut text = format!("{} {}\n", dims.da(), dims.db());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|c| format!("{:.16e} {:.16e}", m[(r, c)].re, m[(r, c)].im))
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    text
}

pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, line)| (k + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'));
    let (header_line, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "empty state file".into(),
    })?;
    let header: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: header_line,
            msg: format!("bad dimension: {e}"),
        })?;
    let [da, db] = header[..] else {
        return Err(Error::Parse {
            line: header_line,
            msg: format!("expected `dA dB`, found {} values", header.len()),
        });
    };
    let dims = BipartiteDims::new(da, db)?;
    let n = dims.total();

    let mut m = CMatrix::zeros(n, n);
    let mut rows = 0;
    for (line_no, line) in lines {
        if rows == n {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("more than {n} matrix rows"),
            });
        }
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad number: {e}"),
            })?;
        if values.len() != 2 * n {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "expected {} numbers ({n} re/im pairs), found {}",
                    2 * n,
                    values.len()
                ),
            });
        }
        for c in 0..n {
            m[(rows, c)] = Complex64::new(values[2 * c], values[2 * c + 1]);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {n} matrix rows, found {rows}"),
        });
    }
    DensityMatrix::new(dims, m)
}

pub fn read_state_file(path: &Path) -> Result<DensityMatrix> {
    parse_state(&fs::read_to_string(path)?)
}

pub fn write_state_file(path: &Path, rho: &DensityMatrix) -> Result<()> {
    fs::write(path, format_state(rho))?;
    Ok(())
}
