//! One received slot through the soft-interference-cancelling MMSE
//! detector, first without and then with decoder feedback.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_idd::channel::{sample_cn, sample_rayleigh};
use ris_idd::coding::map_bits_to_symbols;
use ris_idd::detection::detect_slot;
use ris_idd::{CVector, LLR_MAX};

fn main() -> ris_idd::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (m, k, e_x, sigma_n2) = (4, 3, 1.0, 0.4_f64);
    let h = sample_rayleigh(&mut rng, m, k);
    let bits: Vec<[u8; 2]> = vec![[0, 1], [1, 1], [0, 0]];
    let flat: Vec<u8> = bits.iter().flatten().copied().collect();
    let x = CVector::from_vec(map_bits_to_symbols(&flat, e_x));
    let noise = CVector::from_fn(m, |_, _| sample_cn(&mut rng) * sigma_n2.sqrt());
    let y = &h * &x + noise;

    let blind = vec![[0.0, 0.0]; k];
    // confident, correct priors for the interferers of user 0
    let mut informed: Vec<[f64; 2]> = bits
        .iter()
        .map(|b| b.map(|bit| if bit == 0 { LLR_MAX } else { -LLR_MAX }))
        .collect();
    informed[0] = [0.0, 0.0];

    for (label, priors) in [("no priors", &blind), ("interferers known", &informed)] {
        println!("{label}:");
        for (user, d) in detect_slot(&y, &h, priors, sigma_n2 / e_x, e_x)?
            .iter()
            .enumerate()
        {
            let sinr = d.mu * d.mu * e_x / d.eta2;
            println!(
                "  user {user}: bits {:?}  L_D = [{:+7.2}, {:+7.2}]  mu = {:.3}  SINR = {:.2} dB",
                bits[user],
                d.extrinsic[0],
                d.extrinsic[1],
                d.mu,
                10.0 * sinr.log10()
            );
        }
    }
    Ok(())
}
