//! Draws one block-fading realization in the default geometry and shows
//! how much the RIS cascade adds to the direct link.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_idd::channel::{
    assemble_effective_channel, build_channel_set, path_loss_db, Geometry, PathLossModel,
    PhaseVector, Point2,
};
use ris_idd::sim::{dbm_to_watts, effective_symbol_energy};

fn main() -> ris_idd::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ap = Point2::new(0.0, -60.0);
    let ris = Point2::new(300.0, 10.0);
    let geometry = Geometry::sample(&mut rng, ap, ris, 4, 300.0, 5.0)?;

    println!(
        "AP-RIS: {:.1} m, {:.1} dB",
        ap.distance(&ris),
        path_loss_db(ap.distance(&ris), PathLossModel::Strong)?
    );
    for (k, u) in geometry.user_positions().iter().enumerate() {
        println!(
            "user {k} at ({:.1}, {:.1}): direct {:.1} dB, to RIS {:.1} dB",
            u.x,
            u.y,
            path_loss_db(u.distance(&ap), PathLossModel::Weak)?,
            path_loss_db(u.distance(&ris), PathLossModel::Strong)?,
        );
    }

    let cs = build_channel_set(
        &geometry,
        8,
        16,
        dbm_to_watts(-100.0),
        effective_symbol_energy(10.0, 0.5),
        &mut rng,
    )?;
    let direct = cs.h.norm_squared();
    let h_eff = assemble_effective_channel(&cs, &PhaseVector::random(&mut rng, 16));
    println!("||H||^2       = {direct:.3e}");
    println!(
        "||H_eff||^2   = {:.3e} (random phases)",
        h_eff.norm_squared()
    );
    println!(
        "receive SNR per antenna and user: {:.1} dB",
        10.0 * (direct * cs.e_x / (8.0 * 4.0 * cs.sigma_n2)).log10()
    );
    Ok(())
}
