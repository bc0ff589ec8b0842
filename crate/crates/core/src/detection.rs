//! Soft MMSE detection with soft interference cancellation.
//!
//! Per user `k` and symbol slot the receiver
//!
//! 1. turns the decoder's extrinsic LLRs into soft symbols `(x~_j, var_j)`,
//! 2. cancels the soft interference `y_k = y - sum_{j != k} x~_j h_j`,
//! 3. filters with `w_k = (sigma_n^2/E_x I + H Delta_k H^H)^{-1} h_k`,
//! 4. models `x^_k = mu_k x_k + z_k`, `z_k ~ CN(0, eta_k^2)`, and
//! 5. emits extrinsic bit LLRs from that Gaussian likelihood.
//!
//! LLR sign convention: positive favours bit 0, i.e. the `+1` antipodal
//! value. All LLRs crossing module boundaries are clamped to `+-LLR_MAX`.

use nalgebra::Cholesky;

use crate::coding::qpsk;
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Complex64, LLR_MAX};

/// Relative floor on `eta^2` before it is used as a divisor.
pub const ETA2_FLOOR: f64 = 1e-12;

/// Per-user soft symbol means and variances for one symbol slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftState {
    pub x_tilde: CVector,
    pub var: Vec<f64>,
}

impl SoftState {
    /// The state without any prior information: `x~ = 0`, `var = E_x`.
    pub fn uninformed(k: usize, e_x: f64) -> Self {
        Self {
            x_tilde: CVector::zeros(k),
            var: vec![e_x; k],
        }
    }

    pub fn num_users(&self) -> usize {
        self.var.len()
    }
}

/// Mean and variance of one Gray-mapped QPSK symbol whose two bits carry
/// independent prior LLRs.
///
/// The bits ride on the in-phase and quadrature signs, so the mean factors
/// into `sqrt(E_x/2) (tanh(L1/2) + j tanh(L2/2))`.
pub fn soft_symbol(prior: [f64; 2], e_x: f64) -> (Complex64, f64) {
    let amp = (e_x / 2.0).sqrt();
    let mean = Complex64::new(amp * (prior[0] / 2.0).tanh(), amp * (prior[1] / 2.0).tanh());
    let var = (e_x - mean.norm_sqr()).clamp(0.0, e_x);
    (mean, var)
}

/// Soft symbols for every user in a slot; `priors[k]` holds user `k`'s two
/// bit LLRs.
pub fn soft_symbols(priors: &[[f64; 2]], e_x: f64) -> SoftState {
    let (means, var): (Vec<_>, Vec<_>) = priors.iter().map(|p| soft_symbol(*p, e_x)).unzip();
    SoftState {
        x_tilde: CVector::from_vec(means),
        var,
    }
}

/// `y - sum_{j != k} x~_j h_j^eff`.
pub fn sic_cancel(y: &CVector, h_eff: &CMatrix, soft: &SoftState, k: usize) -> CVector {
    assert_eq!(h_eff.ncols(), soft.num_users());
    assert_eq!(h_eff.nrows(), y.len());
    let mut out = y - h_eff * &soft.x_tilde;
    out.axpy(soft.x_tilde[k], &h_eff.column(k), Complex64::new(1.0, 0.0));
    out
}

/// Normalised interference covariance for the filter of one user: the
/// user's own entry is 1, every other user `i` contributes `var_i / E_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Delta {
    user: usize,
    diag: Vec<f64>,
}

impl Delta {
    /// `Delta = I`: every interferer still at full symbol energy.
    pub fn identity(num_users: usize, user: usize) -> Self {
        assert!(user < num_users);
        Self {
            user,
            diag: vec![1.0; num_users],
        }
    }

    pub fn for_user(soft: &SoftState, user: usize, e_x: f64) -> Self {
        assert!(user < soft.num_users());
        let diag = soft
            .var
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if i == user {
                    1.0
                } else {
                    (v / e_x).clamp(0.0, 1.0)
                }
            })
            .collect();
        Self { user, diag }
    }

    pub fn user(&self) -> usize {
        self.user
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }
}

fn assert_finite(a: &CMatrix, what: &str) {
    assert!(
        a.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        "non-finite entry in {what}"
    );
}

/// `noise_ratio I + H Delta H^H`.
fn loaded_covariance(h_eff: &CMatrix, diag: &[f64], noise_ratio: f64) -> CMatrix {
    let m = h_eff.nrows();
    let mut scaled = h_eff.clone();
    for (mut col, d) in scaled.column_iter_mut().zip(diag) {
        col *= Complex64::from(*d);
    }
    let mut a = scaled * h_eff.adjoint();
    for i in 0..m {
        a[(i, i)] += noise_ratio;
    }
    a
}

/// MMSE-SIC receive filter `w_k` for the user named in `delta`.
///
/// # Panics
///
/// On non-finite inputs or a non-positive `noise_ratio`; both make the
/// system indefinite.
pub fn mmse_filter(h_eff: &CMatrix, delta: &Delta, noise_ratio: f64) -> CVector {
    assert!(
        noise_ratio > 0.0 && noise_ratio.is_finite(),
        "noise ratio must be positive and finite"
    );
    assert_finite(h_eff, "effective channel");
    assert_eq!(delta.diag.len(), h_eff.ncols());
    let a = loaded_covariance(h_eff, &delta.diag, noise_ratio);
    let chol = Cholesky::new(a).expect("diagonally loaded covariance is positive definite");
    chol.solve(&h_eff.column(delta.user).into_owned())
}

/// Linear MMSE filter bank without priors as a `K x M` matrix `W`, row `k`
/// being `w_k^H`, so that `x^ = W y`.
pub fn mmse_matrix(h_eff: &CMatrix, noise_ratio: f64) -> CMatrix {
    assert!(noise_ratio > 0.0 && noise_ratio.is_finite());
    assert_finite(h_eff, "effective channel");
    let (m, k) = h_eff.shape();
    if k < m {
        // W = (nr I_K + H^H H)^{-1} H^H, the same bank from the smaller system
        let mut a = h_eff.adjoint() * h_eff;
        for i in 0..k {
            a[(i, i)] += noise_ratio;
        }
        let chol = Cholesky::new(a).expect("diagonally loaded Gram matrix is positive definite");
        return chol.solve(&h_eff.adjoint());
    }
    let a = loaded_covariance(h_eff, &vec![1.0; k], noise_ratio);
    let chol = Cholesky::new(a).expect("diagonally loaded covariance is positive definite");
    chol.solve(h_eff).adjoint()
}

/// `w^H y`.
pub fn estimate(w: &CVector, y: &CVector) -> Complex64 {
    w.dotc(y)
}

/// Equivalent amplitude `mu = w^H h` and residual variance
/// `eta^2 = E_x (mu - mu^2)` of the Gaussian output model.
pub fn bias_variance(w: &CVector, h_k_eff: &CVector, e_x: f64) -> Result<(f64, f64)> {
    let mu = w.dotc(h_k_eff);
    if mu.im.abs() > 1e-9 * mu.re.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NonMmseFilter {
            real: mu.re,
            imag: mu.im,
        });
    }
    let eta2 = (e_x * (mu.re - mu.re * mu.re)).max(0.0);
    Ok((mu.re, eta2))
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// `log Pr(bit takes antipodal value s)` for a bit with LLR `l`.
fn log_bit_prob(l: f64, s: f64) -> f64 {
    // -log(1 + exp(-s l)), computed without overflow
    let t = -s * l;
    if t > 0.0 {
        -(t + (-t).exp().ln_1p())
    } else {
        -t.exp().ln_1p()
    }
}

/// Extrinsic LLRs of the two bits carried by `x_hat` under the likelihood
/// `exp(-|x_hat - mu x|^2 / eta^2)`, excluding each bit's own prior.
pub fn extrinsic_llr(x_hat: Complex64, mu: f64, eta2: f64, prior: [f64; 2], e_x: f64) -> [f64; 2] {
    let eta2 = eta2.max(ETA2_FLOOR * e_x);
    let prior = prior.map(|l| l.clamp(-LLR_MAX, LLR_MAX));
    let points = qpsk::constellation(e_x);
    let metric: Vec<f64> = points
        .iter()
        .map(|(_, x)| -(x_hat - mu * x).norm_sqr() / eta2)
        .collect();

    let mut out = [0.0; 2];
    for (l, slot) in out.iter_mut().enumerate() {
        let other = 1 - l;
        let mut plus = f64::NEG_INFINITY;
        let mut minus = f64::NEG_INFINITY;
        for ((bits, _), m) in points.iter().zip(&metric) {
            let s_other = qpsk::antipodal(bits[other]);
            let term = m + log_bit_prob(prior[other], s_other);
            if bits[l] == 0 {
                plus = log_sum_exp(plus, term);
            } else {
                minus = log_sum_exp(minus, term);
            }
        }
        *slot = (plus - minus).clamp(-LLR_MAX, LLR_MAX);
    }
    out
}

/// SINR of user `k` for a linear filter bank without cancellation.
pub fn sinr_no_sic(w: &CMatrix, h_eff: &CMatrix, e_x: f64, sigma_n2: f64, k: usize) -> f64 {
    let row = w.row(k);
    let gains = row * h_eff;
    let signal = gains[k].norm_sqr() * e_x;
    let interference: f64 = gains
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, g)| g.norm_sqr() * e_x)
        .sum();
    signal / (interference + row.norm_squared() * sigma_n2)
}

/// Post-SIC SINR `mu^2 E_x / eta^2`; equal to `mu / (1 - mu)` for MMSE.
pub fn sinr_sic(mu: f64, eta2: f64, e_x: f64) -> f64 {
    mu * mu * e_x / eta2.max(ETA2_FLOOR * e_x)
}

/// `sum_k log2(1 + gamma_k)` in bits/s/Hz.
pub fn sum_rate(sinrs: &[f64]) -> f64 {
    sinrs.iter().map(|g| (1.0 + g).log2()).sum()
}

/// Detector output for one user in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserDetection {
    pub x_hat: Complex64,
    pub mu: f64,
    pub eta2: f64,
    pub extrinsic: [f64; 2],
}

/// Runs cancellation, filtering and LLR computation for every user of one
/// received slot. `priors[k]` are the decoder extrinsic LLRs of user `k`'s
/// two bits in this slot.
pub fn detect_slot(
    y: &CVector,
    h_eff: &CMatrix,
    priors: &[[f64; 2]],
    noise_ratio: f64,
    e_x: f64,
) -> Result<Vec<UserDetection>> {
    let soft = soft_symbols(priors, e_x);
    (0..h_eff.ncols())
        .map(|k| {
            let y_k = sic_cancel(y, h_eff, &soft, k);
            let w_k = mmse_filter(h_eff, &Delta::for_user(&soft, k, e_x), noise_ratio);
            detect_user(&w_k, &y_k, h_eff, k, priors[k], e_x)
        })
        .collect()
}

pub(crate) fn detect_user(
    w_k: &CVector,
    y_k: &CVector,
    h_eff: &CMatrix,
    k: usize,
    prior: [f64; 2],
    e_x: f64,
) -> Result<UserDetection> {
    let x_hat = estimate(w_k, y_k);
    let (mu, eta2) = bias_variance(w_k, &h_eff.column(k).into_owned(), e_x)?;
    Ok(UserDetection {
        x_hat,
        mu,
        eta2,
        extrinsic: extrinsic_llr(x_hat, mu, eta2, prior, e_x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_cn, sample_rayleigh};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // independent oracle: enumerate the four points with product bit priors
    fn brute_soft_symbol(prior: [f64; 2], e_x: f64) -> (Complex64, f64) {
        let amp = (e_x / 2.0).sqrt();
        let mut mean = Complex64::new(0.0, 0.0);
        let mut probs = vec![];
        for b1 in 0..2 {
            for b2 in 0..2 {
                let x = Complex64::new(
                    amp * if b1 == 0 { 1.0 } else { -1.0 },
                    amp * if b2 == 0 { 1.0 } else { -1.0 },
                );
                let p: f64 = [(b1, prior[0]), (b2, prior[1])]
                    .iter()
                    .map(|&(b, l)| {
                        let s = if b == 0 { 1.0 } else { -1.0 };
                        1.0 / (1.0 + (-s * l).exp())
                    })
                    .product();
                mean += x * p;
                probs.push((x, p));
            }
        }
        let var = probs.iter().map(|(x, p)| (x - mean).norm_sqr() * p).sum();
        (mean, var)
    }

    fn brute_extrinsic(
        x_hat: Complex64,
        mu: f64,
        eta2: f64,
        prior: [f64; 2],
        e_x: f64,
    ) -> [f64; 2] {
        let amp = (e_x / 2.0).sqrt();
        let mut out = [0.0; 2];
        for l in 0..2 {
            let (mut num, mut den) = (0.0, 0.0);
            for b1 in 0..2u8 {
                for b2 in 0..2u8 {
                    let bits = [b1, b2];
                    let x = Complex64::new(
                        amp * if b1 == 0 { 1.0 } else { -1.0 },
                        amp * if b2 == 0 { 1.0 } else { -1.0 },
                    );
                    let like =
                        (-(x_hat - mu * x).norm_sqr() / eta2).exp() / (std::f64::consts::PI * eta2);
                    let o = 1 - l;
                    let s = if bits[o] == 0 { 1.0 } else { -1.0 };
                    let pr = 1.0 / (1.0 + (-s * prior[o]).exp());
                    if bits[l] == 0 {
                        num += like * pr;
                    } else {
                        den += like * pr;
                    }
                }
            }
            out[l] = (num / den).ln();
        }
        out
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
        sample_rayleigh(rng, r, c)
    }

    #[test]
    fn soft_symbol_limits() {
        let (m, v) = soft_symbol([0.0, 0.0], 2.0);
        assert_eq!(m, Complex64::new(0.0, 0.0));
        assert_eq!(v, 2.0);
        let (m, v) = soft_symbol([f64::INFINITY, f64::INFINITY], 2.0);
        assert_relative_eq!(m.re, 1.0);
        assert_relative_eq!(m.im, 1.0);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn soft_symbol_matches_enumeration() {
        let (m, v) = soft_symbol([2.0, -1.0], 1.0);
        let (mb, vb) = brute_soft_symbol([2.0, -1.0], 1.0);
        assert!((m - mb).norm() < 1e-12);
        assert_relative_eq!(v, vb, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn soft_symbol_enumeration_prop(l1 in -30.0f64..30.0, l2 in -30.0f64..30.0, e_x in 1e-4f64..10.0) {
            let (m, v) = soft_symbol([l1, l2], e_x);
            let (mb, vb) = brute_soft_symbol([l1, l2], e_x);
            prop_assert!((m - mb).norm() <= 1e-9 * e_x.sqrt());
            prop_assert!((v - vb).abs() <= 1e-9 * e_x);
            prop_assert!(v >= 0.0 && v <= e_x + 1e-9);
        }

        #[test]
        fn extrinsic_matches_probability_domain(
            re in -1.5f64..1.5, im in -1.5f64..1.5,
            mu in 0.05f64..0.95, l1 in -6.0f64..6.0, l2 in -6.0f64..6.0,
        ) {
            let e_x = 1.0;
            let eta2 = e_x * (mu - mu * mu);
            let x_hat = Complex64::new(re, im);
            let got = extrinsic_llr(x_hat, mu, eta2, [l1, l2], e_x);
            let want = brute_extrinsic(x_hat, mu, eta2, [l1, l2], e_x);
            for l in 0..2 {
                if want[l].abs() < LLR_MAX {
                    prop_assert!((got[l] - want[l]).abs() <= 1e-9 * (1.0 + want[l].abs()));
                }
            }
        }
    }

    #[test]
    fn sic_with_zero_soft_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_matrix(&mut rng, 4, 3);
        let y = CVector::from_fn(4, |_, _| sample_cn(&mut rng));
        let soft = SoftState::uninformed(3, 1.0);
        assert_eq!(sic_cancel(&y, &h, &soft, 1), y);
    }

    #[test]
    fn sic_with_true_symbols_leaves_own_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_matrix(&mut rng, 4, 3);
        let x = CVector::from_fn(3, |_, _| sample_cn(&mut rng));
        let n = CVector::from_fn(4, |_, _| sample_cn(&mut rng) * 0.1);
        let y = &h * &x + &n;
        let soft = SoftState {
            x_tilde: x.clone(),
            var: vec![0.0; 3],
        };
        let y1 = sic_cancel(&y, &h, &soft, 1);
        let expected = h.column(1) * x[1] + &n;
        assert!((y1 - expected).norm() < 1e-12);
    }

    #[test]
    fn sic_matches_column_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let h = random_matrix(&mut rng, 5, 4);
            let y = CVector::from_fn(5, |_, _| sample_cn(&mut rng));
            let soft = SoftState {
                x_tilde: CVector::from_fn(4, |_, _| sample_cn(&mut rng)),
                var: vec![0.3; 4],
            };
            for k in 0..4 {
                let mut direct = y.clone();
                for j in (0..4).filter(|&j| j != k) {
                    direct -= h.column(j) * soft.x_tilde[j];
                }
                assert!((sic_cancel(&y, &h, &soft, k) - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn scalar_mmse_filter() {
        let h = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let w = mmse_filter(&h, &Delta::identity(1, 0), 1.0);
        assert_relative_eq!(w[0].re, 0.5, epsilon = 1e-15);
        assert_eq!(w[0].im, 0.0);
    }

    #[test]
    fn perfect_interferer_priors_give_single_user_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_matrix(&mut rng, 4, 3);
        let soft = SoftState {
            x_tilde: CVector::zeros(3),
            var: vec![0.0; 3],
        };
        let w = mmse_filter(&h, &Delta::for_user(&soft, 2, 1.0), 0.2);
        let hk = h.column(2).into_owned();
        let a = CMatrix::identity(4, 4) * Complex64::from(0.2) + &hk * hk.adjoint();
        let expected = a.try_inverse().unwrap() * &hk;
        assert!((w - expected).norm() < 1e-12);
    }

    #[test]
    fn mmse_filter_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let h = random_matrix(&mut rng, 8, 4);
            let soft = SoftState {
                x_tilde: CVector::zeros(4),
                var: (0..4).map(|_| rng.random::<f64>()).collect(),
            };
            let delta = Delta::for_user(&soft, 1, 1.0);
            let w = mmse_filter(&h, &delta, 0.05);
            let a = loaded_covariance(&h, delta.diag(), 0.05);
            assert!((a * &w - h.column(1)).norm() <= 1e-10);
        }
    }

    #[test]
    fn mmse_matrix_rows_match_filters() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = random_matrix(&mut rng, 6, 3);
        let w = mmse_matrix(&h, 0.3);
        for k in 0..3 {
            let wk = mmse_filter(&h, &Delta::identity(3, k), 0.3);
            assert!((w.row(k).adjoint() - wk).norm() < 1e-12);
        }
    }

    #[test]
    #[should_panic]
    fn mmse_filter_rejects_nan() {
        let h = CMatrix::from_element(2, 1, Complex64::new(f64::NAN, 0.0));
        mmse_filter(&h, &Delta::identity(1, 0), 1.0);
    }

    #[test]
    fn estimate_examples() {
        let mut w = CVector::zeros(3);
        w[0] = Complex64::new(1.0, 0.0);
        let y = CVector::from_vec(vec![
            Complex64::new(3.0, 1.0),
            Complex64::new(-2.0, 0.5),
            Complex64::new(7.0, 7.0),
        ]);
        assert_eq!(estimate(&w, &y), Complex64::new(3.0, 1.0));
        assert_eq!(estimate(&CVector::zeros(3), &y), Complex64::new(0.0, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = CVector::from_fn(5, |_, _| sample_cn(&mut rng));
        let y = CVector::from_fn(5, |_, _| sample_cn(&mut rng));
        let direct: Complex64 = w.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum();
        assert!((estimate(&w, &y) - direct).norm() < 1e-12);
    }

    #[test]
    fn bias_variance_scalar() {
        let w = CVector::from_vec(vec![Complex64::new(0.5, 0.0)]);
        let h = CVector::from_vec(vec![Complex64::new(1.0, 0.0)]);
        let (mu, eta2) = bias_variance(&w, &h, 1.0).unwrap();
        assert_relative_eq!(mu, 0.5);
        assert_relative_eq!(eta2, 0.25);
        // mu -> 1 drives eta^2 to zero
        let w = CVector::from_vec(vec![Complex64::new(1.0 - 1e-12, 0.0)]);
        let (_, eta2) = bias_variance(&w, &h, 1.0).unwrap();
        assert!(eta2 < 1e-11);
    }

    #[test]
    fn bias_variance_rejects_complex_gain() {
        let w = CVector::from_vec(vec![Complex64::new(0.0, 0.5)]);
        let h = CVector::from_vec(vec![Complex64::new(1.0, 0.0)]);
        assert!(matches!(
            bias_variance(&w, &h, 1.0),
            Err(Error::NonMmseFilter { .. })
        ));
    }

    #[test]
    fn bias_variance_over_random_mmse_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let h = random_matrix(&mut rng, 4, 3);
            let soft = SoftState {
                x_tilde: CVector::zeros(3),
                var: (0..3).map(|_| rng.random::<f64>()).collect(),
            };
            let nr = 10f64.powf(rng.random_range(-2.0..1.0));
            let w = mmse_filter(&h, &Delta::for_user(&soft, 0, 1.0), nr);
            let (mu, eta2) = bias_variance(&w, &h.column(0).into_owned(), 1.0).unwrap();
            assert!(mu > 0.0 && mu < 1.0);
            assert!(eta2 >= 0.0);
        }
    }

    #[test]
    fn extrinsic_zero_observation_is_zero() {
        let l = extrinsic_llr(Complex64::new(0.0, 0.0), 0.5, 0.25, [0.0, 0.0], 1.0);
        assert_eq!(l, [0.0, 0.0]);
    }

    #[test]
    fn extrinsic_symmetric_point() {
        let mu = 0.6;
        let x = Complex64::new(1.0, 1.0) * (0.5f64).sqrt();
        let l = extrinsic_llr(x * mu, mu, mu - mu * mu, [0.0, 0.0], 1.0);
        assert!(l[0] > 0.0 && l[1] > 0.0);
        assert_relative_eq!(l[0], l[1], epsilon = 1e-12);
    }

    #[test]
    fn extrinsic_saturates_when_eta_vanishes() {
        let x = Complex64::new(1.0, -1.0) * (0.5f64).sqrt();
        let l = extrinsic_llr(x, 1.0, 0.0, [0.0, 0.0], 1.0);
        assert_eq!(l, [LLR_MAX, -LLR_MAX]);
    }

    #[test]
    fn extrinsic_ignores_own_prior() {
        let x = Complex64::new(0.3, -0.2);
        let a = extrinsic_llr(x, 0.5, 0.25, [5.0, 1.0], 1.0);
        let b = extrinsic_llr(x, 0.5, 0.25, [-5.0, 1.0], 1.0);
        assert_relative_eq!(a[0], b[0], epsilon = 1e-12);
    }

    #[test]
    fn sinr_no_sic_single_user() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = random_matrix(&mut rng, 3, 1);
        let w = random_matrix(&mut rng, 1, 3);
        let g = (w.row(0) * &h)[0];
        let expected = g.norm_sqr() * 2.0 / (w.norm_squared() * 0.1);
        assert_relative_eq!(
            sinr_no_sic(&w, &h, 2.0, 0.1, 0),
            expected,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sinr_no_sic_two_user_hand_value() {
        // H = [[1, 1], [1, -1]], w_1^H = [1, 0]: signal 1, interference 1, noise 0.5
        let c = |v: f64| Complex64::new(v, 0.0);
        let h = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(-1.0)]);
        let w = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.5), c(-0.5)]);
        assert_relative_eq!(sinr_no_sic(&w, &h, 1.0, 0.5, 0), 1.0 / 1.5);
        // orthogonal combiner for user 0: signal |1|^2, no interference, noise 0.5 * 0.5
        assert_relative_eq!(sinr_no_sic(&w, &h, 1.0, 0.5, 1), 1.0 / 0.25);
    }

    #[test]
    fn sinr_no_sic_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = random_matrix(&mut rng, 4, 3);
        let w = mmse_matrix(&h, 0.1);
        let mut w2 = w.clone();
        w2.row_mut(1).scale_mut(-3.7);
        assert_relative_eq!(
            sinr_no_sic(&w, &h, 1.0, 0.1, 1),
            sinr_no_sic(&w2, &h, 1.0, 0.1, 1),
            max_relative = 1e-12
        );
    }

    #[test]
    fn sinr_sic_examples() {
        assert_relative_eq!(sinr_sic(0.5, 0.25, 1.0), 1.0);
        assert_relative_eq!(sinr_sic(0.9, 0.9 - 0.81, 1.0), 9.0, max_relative = 1e-12);
        assert!(sinr_sic(1e-9, 1e-9, 1.0) < 1e-8);
    }

    #[test]
    fn sum_rate_examples() {
        assert_relative_eq!(sum_rate(&[1.0, 1.0]), 2.0);
        assert_relative_eq!(sum_rate(&[3.0]), 2.0);
        assert_eq!(sum_rate(&[0.0; 5]), 0.0);
    }

    #[test]
    fn mmse_sic_sinr_matches_linear_sinr_without_priors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_matrix(&mut rng, 6, 3);
        let w = mmse_matrix(&h, 0.2);
        for k in 0..3 {
            let wk = mmse_filter(&h, &Delta::identity(3, k), 0.2);
            let (mu, eta2) = bias_variance(&wk, &h.column(k).into_owned(), 1.0).unwrap();
            assert_relative_eq!(
                sinr_sic(mu, eta2, 1.0),
                sinr_no_sic(&w, &h, 1.0, 0.2, k),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn sic_dominance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let h = random_matrix(&mut rng, 4, 4);
            let nr = 10f64.powf(rng.random_range(-2.0..1.0));
            let perfect = SoftState {
                x_tilde: CVector::zeros(4),
                var: vec![0.0; 4],
            };
            for k in 0..4 {
                let hk = h.column(k).into_owned();
                let w0 = mmse_filter(&h, &Delta::identity(4, k), nr);
                let w1 = mmse_filter(&h, &Delta::for_user(&perfect, k, 1.0), nr);
                let (m0, e0) = bias_variance(&w0, &hk, 1.0).unwrap();
                let (m1, e1) = bias_variance(&w1, &hk, 1.0).unwrap();
                assert!(sinr_sic(m1, e1, 1.0) >= sinr_sic(m0, e0, 1.0) * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn mmse_error_orthogonal_to_observation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (m, k, nr) = (4, 3, 0.5);
        let h = random_matrix(&mut rng, m, k);
        let w = mmse_filter(&h, &Delta::identity(k, 0), nr);
        let trials = 20_000;
        let mut acc = CVector::zeros(m);
        let mut acc2 = vec![0.0; m];
        for _ in 0..trials {
            let x = CVector::from_fn(k, |_, _| sample_cn(&mut rng));
            let n = CVector::from_fn(m, |_, _| sample_cn(&mut rng) * nr.sqrt());
            let y = &h * &x + n;
            let e = x[0] - estimate(&w, &y);
            for i in 0..m {
                let t = e * y[i].conj();
                acc[i] += t;
                acc2[i] += t.norm_sqr();
            }
        }
        let n = trials as f64;
        for i in 0..m {
            let mean = acc[i] / n;
            let sd = (acc2[i] / n / n).sqrt();
            assert!(
                mean.norm() <= 3.0 * sd,
                "component {i}: {mean} vs 3 sigma {sd}"
            );
        }
    }

    #[test]
    fn llr_combination_reduces_variance_on_average() {
        // Law of total variance: averaging the posterior variance over
        // observations drawn from the model cannot exceed the prior variance.
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let e_x = 1.0;
        for _ in 0..1000 {
            let prior = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
            let mu: f64 = rng.random_range(0.05..0.95);
            let eta2 = e_x * (mu - mu * mu);
            let (_, var_prior) = soft_symbol(prior, e_x);
            let mut var_post = 0.0;
            let draws = 400;
            for _ in 0..draws {
                let bits: [u8; 2] = std::array::from_fn(|l| {
                    let p0 = 1.0 / (1.0 + (-prior[l]).exp());
                    u8::from(rng.random::<f64>() >= p0)
                });
                let x = qpsk::map_pair(bits, e_x);
                let x_hat = x * mu + sample_cn(&mut rng) * eta2.sqrt();
                let ext = extrinsic_llr(x_hat, mu, eta2, prior, e_x);
                let (_, v) = soft_symbol([prior[0] + ext[0], prior[1] + ext[1]], e_x);
                var_post += v / draws as f64;
            }
            assert!(var_post <= var_prior + 0.02 * e_x);
        }
    }

    #[test]
    fn gaussian_output_model_concentrates_on_mu() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let (m, k, nr, e_x) = (8, 4, 0.1, 1.0);
        let h = random_matrix(&mut rng, m, k);
        let w = mmse_filter(&h, &Delta::identity(k, 2), nr);
        let (mu, _) = bias_variance(&w, &h.column(2).into_owned(), e_x).unwrap();
        let trials = 10_000;
        let mut ratio = Complex64::new(0.0, 0.0);
        for _ in 0..trials {
            let bits: Vec<[u8; 2]> = (0..k)
                .map(|_| [rng.random_range(0..2), rng.random_range(0..2)])
                .collect();
            let x = CVector::from_iterator(k, bits.iter().map(|b| qpsk::map_pair(*b, e_x)));
            let n = CVector::from_fn(m, |_, _| sample_cn(&mut rng) * (nr * e_x).sqrt());
            let y = &h * &x + n;
            ratio += estimate(&w, &y) / x[2];
        }
        let mean = ratio / trials as f64;
        assert!((mean.re - mu).abs() <= 0.05 * mu);
        assert!(mean.im.abs() <= 0.05 * mu);
    }

    #[test]
    fn detect_slot_without_priors_matches_linear_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let h = random_matrix(&mut rng, 6, 3);
        let y = CVector::from_fn(6, |_, _| sample_cn(&mut rng));
        let out = detect_slot(&y, &h, &[[0.0; 2]; 3], 0.2, 1.0).unwrap();
        let w = mmse_matrix(&h, 0.2);
        let x_lin = &w * &y;
        for k in 0..3 {
            assert!((out[k].x_hat - x_lin[k]).norm() <= 1e-10);
        }
    }
}
