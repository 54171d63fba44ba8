//! Bitflip and depolarizing channels on a qutrit.

use eof_core::channels::{
    bitflip_channel, compose, decohered_bell_state, depolarizing_channel, ChannelKind,
};
use eof_core::numerics::CMatrix;
use eof_core::oracles::{bell_fidelity, isotropic_eof};
use eof_core::states::random_density_matrix;
use eof_core::BipartiteDims;

fn main() -> eof_core::Result<()> {
    let (d, p) = (3, 0.3);
    let flip = bitflip_channel(d, p)?;
    let depol = depolarizing_channel(d, p)?;
    println!(
        "bitflip: {} Kraus operators, completeness defect {:.1e}",
        flip.operators().len(),
        flip.completeness_defect()
    );
    println!(
        "depolarizing: {} Kraus operators, completeness defect {:.1e}",
        depol.operators().len(),
        depol.completeness_defect()
    );

    let dims = BipartiteDims::new(3, 2)?;
    let rho = random_density_matrix(dims, 6, 4)?;
    let local =
        eof_core::numerics::partial_trace(rho.matrix(), dims, eof_core::numerics::Subsystem::A)?;
    let expected = local.scale(1.0 - p) + CMatrix::identity(d, d).scale(p / d as f64);
    println!(
        "depolarizing action vs (1-p) rho + p I/d: {:.1e}",
        (depol.apply(&local)? - expected).norm()
    );

    let ab = compose(&flip, &depol)?.apply(&local)?;
    let ba = compose(&depol, &flip)?.apply(&local)?;
    println!(
        "bitflip and depolarizing commute to {:.1e}",
        (ab - ba).norm()
    );

    let noisy = decohered_bell_state(d, ChannelKind::Depolarizing, p)?;
    let f = bell_fidelity(&noisy)?;
    println!(
        "depolarized Bell state: F = {f:.12} (1 - p + p/9 = {:.12}), E_F = {:.12}",
        1.0 - p + p / 9.0,
        isotropic_eof(d, f)?
    );
    Ok(())
}
