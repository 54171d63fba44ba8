//! A Bell pair with one half sent through a noisy channel: normalized
//! entanglement of qubits and qutrits side by side.

use eof_core::channels::{channel_sweep, ChannelKind};
use eof_core::MinimizerConfig;

fn main() -> eof_core::Result<()> {
    let grid: Vec<f64> = (0..=10).map(|k| 0.05 * k as f64).collect();
    let config = MinimizerConfig {
        pad_states: 3,
        ..MinimizerConfig::default()
    };
    for kind in ChannelKind::ALL {
        let qubit = channel_sweep(2, kind, &grid, &config)?;
        let qutrit = channel_sweep(3, kind, &grid, &config)?;
        println!("{kind}");
        println!("{:>6} {:>12} {:>12}", "p", "qubit", "qutrit");
        for (a, b) in qubit.iter().zip(&qutrit) {
            println!(
                "{:>6.2} {:>12.8} {:>12.8}",
                a.p, a.eof_normalized, b.eof_normalized
            );
        }
        println!();
    }
    Ok(())
}
