//! Minimum average entanglement as zero-norm states are added to the
//! decomposition. Rank-size decompositions are not always optimal.

use eof_core::oracles::wootters_eof;
use eof_core::states::random_density_matrix;
use eof_core::{minimize_average_entanglement, BipartiteDims, MinimizerConfig};

fn main() -> eof_core::Result<()> {
    let qubits = random_density_matrix(BipartiteDims::square(2)?, 3, 1001)?;
    println!(
        "separable rank-3 qubit pair, Wootters E_F = {:.3e}",
        wootters_eof(&qubits)?
    );
    for pad in 0..2 {
        let config = MinimizerConfig {
            pad_states: pad,
            ..MinimizerConfig::default()
        };
        println!(
            "  {} states: {:.12}",
            3 + pad,
            minimize_average_entanglement(&qubits, &config)?.e_f
        );
    }

    let qutrits = random_density_matrix(BipartiteDims::square(3)?, 4, 19)?;
    println!("rank-4 qutrit pair");
    for pad in [0, 1, 2, 5] {
        let config = MinimizerConfig {
            pad_states: pad,
            ..MinimizerConfig::default()
        };
        println!(
            "  {} states: {:.12}",
            4 + pad,
            minimize_average_entanglement(&qutrits, &config)?.e_f
        );
    }
    Ok(())
}
