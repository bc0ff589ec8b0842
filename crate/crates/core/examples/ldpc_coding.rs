//! Builds the (3,6)-regular code, checks encoding, and measures the frame
//! error rate of sum-product decoding on a BPSK AWGN channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use ris_idd::coding::{alist, bp_decode, construct_code};

fn main() -> ris_idd::Result<()> {
    let code = construct_code(512, 0.5, 3, 6, 1)?;
    println!(
        "n = {}, k = {}, checks = {}, 4-cycle free: {}",
        code.n(),
        code.k(),
        code.num_checks(),
        code.is_four_cycle_free()
    );
    let text = alist::to_alist(&code);
    println!("alist size: {} bytes", text.len());
    assert_eq!(alist::from_alist(&text)?.checks(), code.checks());

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let frames = 200;
    for ebn0_db in [1.0, 1.5, 2.0, 2.5, 3.0] {
        let ebn0 = 10f64.powf(ebn0_db / 10.0);
        let sigma2 = 1.0 / (2.0 * code.rate() * ebn0);
        let noise = Normal::new(0.0, sigma2.sqrt()).unwrap();
        let mut frame_errors = 0;
        for _ in 0..frames {
            let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let cw = code.encode(&msg);
            assert!(code.is_codeword(&cw));
            let llr: Vec<f64> = cw
                .iter()
                .map(|&b| {
                    let s = if b == 0 { 1.0 } else { -1.0 };
                    2.0 * (s + noise.sample(&mut rng)) / sigma2
                })
                .collect();
            let out = bp_decode(&code, &llr, 20);
            if code.extract_message(&out.hard_bits) != msg {
                frame_errors += 1;
            }
        }
        println!(
            "Eb/N0 {ebn0_db:.1} dB: FER {:.3}",
            frame_errors as f64 / frames as f64
        );
    }
    Ok(())
}
