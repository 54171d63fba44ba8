//! Writing, reading and minimizing a state file.

use eof_core::cli::{format_state, read_state_file, write_state_file};
use eof_core::states::random_density_matrix;
use eof_core::{minimize_average_entanglement, BipartiteDims, MinimizerConfig};

fn main() -> eof_core::Result<()> {
    let rho = random_density_matrix(BipartiteDims::new(2, 3)?, 3, 12)?;
    let path = std::env::temp_dir().join("eof_example_state.txt");
    write_state_file(&path, &rho)?;
    let text = format_state(&rho);
    println!("{}", text.lines().next().unwrap_or_default());
    let back = read_state_file(&path)?;
    println!("exact round trip: {}", back.matrix() == rho.matrix());
    let result = minimize_average_entanglement(&back, &MinimizerConfig::default())?;
    println!(
        "E_F = {:.15} ebits, certified {}",
        result.e_f, result.certified
    );
    std::fs::remove_file(&path)?;
    Ok(())
}
