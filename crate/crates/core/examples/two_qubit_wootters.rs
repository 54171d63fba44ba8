//! Minimizer against the Wootters formula on random two-qubit states.

use eof_core::oracles::{concurrence, wootters_eof};
use eof_core::states::random_density_matrix;
use eof_core::{minimize_average_entanglement, BipartiteDims, MinimizerConfig};

fn main() -> eof_core::Result<()> {
    let dims = BipartiteDims::square(2)?;
    println!(
        "{:>4} {:>4} {:>10} {:>16} {:>16} {:>9} {:>6}",
        "seed", "rank", "C", "E_F engine", "E_F Wootters", "|diff|", "iters"
    );
    for seed in 0..10u64 {
        let rank = 2 + (seed as usize % 3);
        let rho = random_density_matrix(dims, rank, seed)?;
        // four states suffice for every two-qubit state
        let config = MinimizerConfig {
            n_states: Some(4),
            seed,
            ..MinimizerConfig::default()
        };
        let result = minimize_average_entanglement(&rho, &config)?;
        let exact = wootters_eof(&rho)?;
        println!(
            "{seed:>4} {rank:>4} {:>10.6} {:>16.12} {:>16.12} {:>9.1e} {:>6}",
            concurrence(&rho)?,
            result.e_f,
            exact,
            (result.e_f - exact).abs(),
            result.iterations
        );
    }
    Ok(())
}
