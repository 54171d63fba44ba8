//! Two-qutrit isotropic states: minimizer against the closed form.

use eof_core::oracles::{isotropic_eof, isotropic_state};
use eof_core::{minimize_average_entanglement, MinimizerConfig};

fn main() -> eof_core::Result<()> {
    let d = 3;
    // above F = 8/9 the optimum needs more states than the rank
    let config = MinimizerConfig {
        pad_states: 3,
        ..MinimizerConfig::default()
    };
    println!(
        "{:>8} {:>14} {:>14} {:>9} {:>9}",
        "F", "formula", "engine", "|diff|", "certified"
    );
    for k in 1..10 {
        let f = 1.0 / 3.0 + (2.0 / 3.0) * k as f64 / 10.0;
        let exact = isotropic_eof(d, f)?;
        let result =
            minimize_average_entanglement(&isotropic_state(d, f)?, &config.clone().with_seed(k))?;
        println!(
            "{f:>8.5} {exact:>14.10} {:>14.10} {:>9.1e} {:>9}",
            result.e_f,
            (result.e_f - exact).abs(),
            result.certified
        );
    }
    Ok(())
}
