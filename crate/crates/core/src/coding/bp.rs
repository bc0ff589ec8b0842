use super::LdpcCode;
use crate::LLR_MAX;

// keeps atanh finite when every incoming message is saturated
const TANH_LIMIT: f64 = 1.0 - 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct BpOutput {
    /// Channel input plus all check messages, unclamped.
    pub posterior: Vec<f64>,
    /// `posterior - input`, clamped to `+-LLR_MAX`.
    pub extrinsic: Vec<f64>,
    pub hard_bits: Vec<u8>,
    /// All checks satisfied and no posterior exactly zero.
    pub converged: bool,
    pub iterations: usize,
}

/// Flooding sum-product decoding with early exit once the hard decisions
/// form a codeword.
///
/// A posterior LLR of exactly zero carries no decision, so a word that
/// contains one is never reported as converged; this keeps an all-zero
/// input from passing as the all-zero codeword.
pub fn bp_decode(code: &LdpcCode, input: &[f64], max_iters: usize) -> BpOutput {
    assert!(max_iters >= 1, "at least one BP iteration is required");
    assert_eq!(input.len(), code.n());
    let input: Vec<f64> = input.iter().map(|l| l.clamp(-LLR_MAX, LLR_MAX)).collect();

    // edges are laid out check by check
    let checks = code.checks();
    let mut offsets = Vec::with_capacity(checks.len() + 1);
    let mut edge_var = Vec::new();
    offsets.push(0);
    for row in checks {
        edge_var.extend_from_slice(row);
        offsets.push(edge_var.len());
    }
    let mut v2c: Vec<f64> = edge_var.iter().map(|&v| input[v]).collect();
    let mut c2v = vec![0.0; edge_var.len()];
    let mut posterior = input.clone();
    let mut hard_bits = vec![0u8; code.n()];
    let mut tanhs = Vec::new();
    let mut suffix = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=max_iters {
        iterations = it;
        for w in offsets.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            tanhs.clear();
            tanhs.extend(v2c[lo..hi].iter().map(|m| (m / 2.0).tanh()));
            // product of all others via prefix and suffix products
            suffix.clear();
            suffix.resize(tanhs.len() + 1, 1.0);
            for i in (0..tanhs.len()).rev() {
                suffix[i] = suffix[i + 1] * tanhs[i];
            }
            let mut prefix = 1.0;
            for (i, t) in tanhs.iter().enumerate() {
                let p = (prefix * suffix[i + 1]).clamp(-TANH_LIMIT, TANH_LIMIT);
                c2v[lo + i] = (2.0 * p.atanh()).clamp(-LLR_MAX, LLR_MAX);
                prefix *= t;
            }
        }

        posterior.copy_from_slice(&input);
        for (e, &v) in edge_var.iter().enumerate() {
            posterior[v] += c2v[e];
        }
        for (e, &v) in edge_var.iter().enumerate() {
            v2c[e] = (posterior[v] - c2v[e]).clamp(-LLR_MAX, LLR_MAX);
        }
        for (b, &l) in hard_bits.iter_mut().zip(&posterior) {
            *b = u8::from(l < 0.0);
        }
        if posterior.iter().all(|&l| l != 0.0) && code.is_codeword(&hard_bits) {
            converged = true;
            break;
        }
    }

    let extrinsic = posterior
        .iter()
        .zip(&input)
        .map(|(p, l)| (p - l).clamp(-LLR_MAX, LLR_MAX))
        .collect();
    BpOutput {
        posterior,
        extrinsic,
        hard_bits,
        converged,
        iterations,
    }
}
