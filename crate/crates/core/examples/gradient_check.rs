//! Analytic directional derivatives against central differences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use eof_core::gradient::{directional_derivative, gradient_matrix};
use eof_core::numerics::{random_gaussian_matrix, unitary_from_generator};
use eof_core::states::{apply_unitary, average_entanglement};
use eof_core::{BipartiteDims, Decomposition};

fn main() -> eof_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dims = BipartiteDims::new(2, 3)?;
    let states = random_gaussian_matrix(&mut rng, dims.total(), 4);
    let norm = states.norm();
    let dec = Decomposition::new(dims, states.unscale(norm))?;
    let g = gradient_matrix(&dec)?;
    let h = 1e-5;
    println!("{:>16} {:>16} {:>10}", "analytic", "finite diff", "rel err");
    for _ in 0..8 {
        let a = random_gaussian_matrix(&mut rng, 4, 4);
        let theta = (&a + a.adjoint()).scale(0.5);
        let along = |t: f64| -> eof_core::Result<f64> {
            Ok(average_entanglement(&apply_unitary(
                &dec,
                &unitary_from_generator(&theta.scale(t))?,
            )?))
        };
        let analytic = directional_derivative(&g, &theta)?;
        let numeric = (along(h)? - along(-h)?) / (2.0 * h);
        println!(
            "{analytic:>16.10} {numeric:>16.10} {:>10.1e}",
            ((analytic - numeric) / analytic).abs()
        );
    }
    Ok(())
}
