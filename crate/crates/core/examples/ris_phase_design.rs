//! Alternating MSE minimisation of the RIS phases against random and
//! all-ones reflections.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_idd::channel::assemble_effective_channel;
use ris_idd::channel::{sample_rayleigh, ChannelSet, PhaseVector};
use ris_idd::detection::mmse_matrix;
use ris_idd::ris_optim::{alternate_optimize, mse_objective, DEFAULT_MAX_ROUNDS, DEFAULT_TOL};
use ris_idd::Complex64;

fn mse_with_matched_filter(cs: &ChannelSet, phi: &PhaseVector) -> f64 {
    let w = mmse_matrix(&assemble_effective_channel(cs, phi), cs.noise_ratio());
    mse_objective(&w, phi.as_vector(), cs)
}

fn main() -> ris_idd::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (m, n, k) = (4, 8, 4);
    let cs = ChannelSet::new(
        sample_rayleigh(&mut rng, m, k) * Complex64::from(0.3),
        sample_rayleigh(&mut rng, m, n),
        sample_rayleigh(&mut rng, n, k),
        0.1,
        1.0,
    )?;

    let out = alternate_optimize(&cs, DEFAULT_MAX_ROUNDS, DEFAULT_TOL, &mut rng)?;
    println!("relaxed rounds: {}", out.trace.iteration_count);
    for (i, f) in out.trace.mse_history.iter().enumerate() {
        println!("  round {:>2}: relaxed mse {f:.5}", i + 1);
    }
    for (i, f) in out.trace.truncated_history.iter().enumerate() {
        println!("  refine {:>2}: unit-modulus mse {f:.5}", i + 1);
    }

    println!(
        "optimised      : {:.5}",
        mse_objective(&out.w, out.phi.as_vector(), &cs)
    );
    println!(
        "all ones       : {:.5}",
        mse_with_matched_filter(&cs, &PhaseVector::ones(n))
    );
    let random: f64 = (0..100)
        .map(|_| mse_with_matched_filter(&cs, &PhaseVector::random(&mut rng, n)))
        .sum::<f64>()
        / 100.0;
    println!("random (mean)  : {random:.5}");
    Ok(())
}
