//! One frame through the iterative receiver, with and without the RIS.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_idd::channel::{build_channel_set, Geometry, Point2};
use ris_idd::coding::construct_code;
use ris_idd::idd::{run_idd_frame, FrameContext, RisMode};
use ris_idd::sim::{dbm_to_watts, effective_symbol_energy};

fn main() -> ris_idd::Result<()> {
    let code = construct_code(512, 0.5, 3, 6, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let geometry = Geometry::sample(
        &mut rng,
        Point2::new(0.0, -60.0),
        Point2::new(300.0, 10.0),
        4,
        300.0,
        5.0,
    )?;
    let cs = build_channel_set(
        &geometry,
        8,
        16,
        dbm_to_watts(-100.0),
        effective_symbol_energy(9.0, code.rate()),
        &mut rng,
    )?;

    let modes = [
        ("no RIS", RisMode::Off),
        (
            "RIS",
            RisMode::Optimized {
                max_rounds: 20,
                tol: 1e-4,
            },
        ),
    ];
    for (label, mode) in modes {
        // same messages and noise for both runs
        let mut data = ChaCha8Rng::seed_from_u64(99);
        let mut init = ChaCha8Rng::seed_from_u64(1);
        let (ctx, _) = FrameContext::prepare(cs.clone(), mode, &code, &mut data, &mut init)?;
        let result = run_idd_frame(&ctx, &code, 3, 20)?;
        println!("{label}:");
        for s in &result.stats {
            println!(
                "  pass {}: errors per user {:?}, sum-rate {:.2} bit/s/Hz, decoder converged {:?}",
                s.iteration, s.bit_errors, s.sum_rate, s.decoder_converged
            );
        }
    }
    Ok(())
}
