//! Convergence of the average entanglement for a random two-qutrit state.

use eof_core::optimizer::StepKind;
use eof_core::states::random_density_matrix;
use eof_core::{minimize_average_entanglement, BipartiteDims, MinimizerConfig};

fn main() -> eof_core::Result<()> {
    let rho = random_density_matrix(BipartiteDims::square(3)?, 9, 7)?;
    let result = minimize_average_entanglement(&rho, &MinimizerConfig::default())?;
    println!(
        "E_F = {:.12} after {} iterations, {} restarts, certified {}",
        result.e_f, result.iterations, result.restarts_used, result.certified
    );
    println!(
        "{:>6} {:>16} {:>12} {:>12}",
        "iter", "E_av", "log10 gap", "kind"
    );
    let records = &result.trace.records;
    let stride = (records.len() / 40).max(1);
    for r in records.iter().step_by(stride).chain(records.last()) {
        let gap = (r.e_av - result.e_f).max(1e-16).log10();
        let kind = match r.kind {
            StepKind::Initial => "initial",
            StepKind::LineSearch => "line",
            StepKind::Perturbation => "restart",
        };
        println!(
            "{:>6} {:>16.12} {:>12.2} {:>12}",
            r.iteration, r.e_av, gap, kind
        );
    }
    Ok(())
}
