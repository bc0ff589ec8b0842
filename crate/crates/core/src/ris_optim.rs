//! Reflection design for the RIS by minimising the linear-estimate MSE
//!
//! ```text
//! E ||x - W (H_eff(phi) x + n)||^2
//!     = sigma_x^2 ||I - W H_eff(phi)||_F^2 + sigma_n^2 ||W||_F^2
//! ```
//!
//! With `W` fixed the objective is a convex quadratic in the unconstrained
//! coefficient vector `phi`, minimised by `beta phi = psi` where
//!
//! ```text
//! beta = sum_i (W G A_i)^H (W G A_i),   psi = sum_i (W G A_i)^H (e_i - W h_i),
//! ```
//!
//! `A_i = Diag(f_i)` and `h_i` is the direct link of user `i`. With `phi`
//! fixed the minimiser over `W` is the MMSE filter bank. Alternating the two
//! steps never increases the relaxed objective. The unit-modulus constraint
//! is restored by projecting each coefficient onto the unit circle, followed
//! by a few projected rounds that keep the best unit-modulus iterate.

use nalgebra::{Cholesky, SymmetricEigen};
use rand::Rng;

use crate::channel::{effective_channel_relaxed, ChannelSet, PhaseVector};
use crate::detection::mmse_matrix;
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Complex64};

/// Relative Tikhonov loading, and the eigenvalue ratio below which `beta`
/// counts as rank deficient.
pub const BETA_REGULARIZATION: f64 = 1e-10;
pub const DEFAULT_MAX_ROUNDS: usize = 20;
pub const DEFAULT_TOL: f64 = 1e-4;

/// Relaxed optimum of the last round and its projection.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedSolution {
    pub phi_relaxed: CVector,
    pub phi_truncated: PhaseVector,
    pub relaxed_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AltOptTrace {
    /// Rounds of the relaxed alternation.
    pub iteration_count: usize,
    /// Relaxed objective after each coefficient update.
    pub mse_history: Vec<f64>,
    /// Objective of each unit-modulus iterate with its matched filter.
    pub truncated_history: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AltOptOutcome {
    /// MMSE filter bank (`K x M`, row `k` = `w_k^H`) for `phi`.
    pub w: CMatrix,
    pub phi: PhaseVector,
    pub relaxed: Option<RelaxedSolution>,
    pub trace: AltOptTrace,
}

/// Closed-form expected squared error of `x^ = W y` with `y = H_eff x + n`.
pub fn mse_objective(w: &CMatrix, phi: &CVector, cs: &ChannelSet) -> f64 {
    let h_eff = effective_channel_relaxed(cs, phi);
    let k = cs.num_users();
    let residual = CMatrix::identity(k, k) - w * h_eff;
    cs.e_x * residual.norm_squared() + cs.sigma_n2 * w.norm_squared()
}

/// `sum_i (W G A_i)^H (W G A_i)`.
///
/// Entry `(p, q)` of each term is `conj(f_pi) (B^H B)_pq f_qi` with
/// `B = W G`, so the sum is the Hadamard product `B^H B o conj(F F^H)`.
pub fn compute_beta(w: &CMatrix, g: &CMatrix, f: &CMatrix) -> CMatrix {
    let b = w * g;
    let gram = b.adjoint() * &b;
    let ff = (f * f.adjoint()).map(|z| z.conj());
    gram.component_mul(&ff)
}

/// `sum_i (W G A_i)^H (e_i - W h_i)` with `h_i` the direct link.
pub fn compute_psi(w: &CMatrix, g: &CMatrix, f: &CMatrix, h: &CMatrix) -> CVector {
    let k = w.nrows();
    let b = w * g;
    let residual = CMatrix::identity(k, k) - w * h;
    let projected = b.adjoint() * residual;
    let weighted = projected.component_mul(&f.map(|z| z.conj()));
    CVector::from_iterator(
        weighted.nrows(),
        weighted.row_iter().map(|r| r.iter().sum::<Complex64>()),
    )
}

fn finite(v: &CVector) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Solves `beta phi = psi` by Cholesky. When `beta` is numerically rank
/// deficient (smallest eigenvalue at most `BETA_REGULARIZATION` times the
/// largest) the diagonal is first loaded with
/// `BETA_REGULARIZATION * trace(beta) / N`.
pub fn solve_phase_relaxed(beta: &CMatrix, psi: &CVector) -> Result<CVector> {
    let n = psi.len();
    assert_eq!(beta.shape(), (n, n), "beta must be N x N");
    if n == 0 {
        return Ok(CVector::zeros(0));
    }
    if beta.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        if psi.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            return Ok(CVector::zeros(n));
        }
        return Err(Error::Singular(
            "beta vanishes while psi does not; the RIS has no influence on the estimate".into(),
        ));
    }
    let eig = SymmetricEigen::new(beta.clone()).eigenvalues;
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &l| {
            (lo.min(l), hi.max(l))
        });
    let mut a = beta.clone();
    if lo <= BETA_REGULARIZATION * hi {
        let load = BETA_REGULARIZATION * beta.trace().re / n as f64;
        for i in 0..n {
            a[(i, i)] += load;
        }
    }
    Cholesky::new(a)
        .map(|c| c.solve(psi))
        .filter(finite)
        .ok_or_else(|| Error::Singular("beta is not positive semidefinite".into()))
}

/// Elementwise projection onto the unit circle; zeros map to `1`.
pub fn truncate_unit_modulus(phi_relaxed: &CVector) -> PhaseVector {
    let projected = phi_relaxed.map(|z| {
        let r = z.norm();
        if r > 0.0 && r.is_finite() {
            Complex64::from_polar(1.0, z.arg())
        } else {
            Complex64::new(1.0, 0.0)
        }
    });
    PhaseVector::from_unit_vector_unchecked(projected)
}

/// One coefficient update for a fixed filter bank.
pub fn relaxed_step(w: &CMatrix, cs: &ChannelSet) -> Result<RelaxedSolution> {
    let beta = compute_beta(w, &cs.g, &cs.f);
    let psi = compute_psi(w, &cs.g, &cs.f, &cs.h);
    let phi_relaxed = solve_phase_relaxed(&beta, &psi)?;
    let relaxed_mse = mse_objective(w, &phi_relaxed, cs);
    Ok(RelaxedSolution {
        phi_truncated: truncate_unit_modulus(&phi_relaxed),
        phi_relaxed,
        relaxed_mse,
    })
}

/// Alternates coefficient and filter updates from random initial phases.
///
/// The first phase alternates the relaxed coefficient solve with the MMSE
/// filter for those relaxed coefficients; every step is an exact minimiser
/// of the relaxed objective, so `mse_history` never increases. It stops when
/// the relative change drops below `tol` or after `max_rounds`.
///
/// The second phase works on the unit circle: starting from the projection
/// of the relaxed solution it repeats (relaxed solve, truncation, MMSE filter
/// for the truncated phases) and keeps the truncated iterate with the lowest
/// objective, stopping once a round improves it by less than `tol`
/// (relative) or after `max_rounds`. The returned `W` matches the returned
/// phases.
pub fn alternate_optimize<R: Rng + ?Sized>(
    cs: &ChannelSet,
    max_rounds: usize,
    tol: f64,
    rng: &mut R,
) -> Result<AltOptOutcome> {
    assert!(max_rounds >= 1, "max_rounds must be at least 1");
    assert!(tol > 0.0, "tol must be positive");
    let nr = cs.noise_ratio();
    let n = cs.num_elements();

    if n == 0 {
        let phi = PhaseVector::ones(0);
        let w = mmse_matrix(&cs.h, nr);
        let mse = mse_objective(&w, phi.as_vector(), cs);
        return Ok(AltOptOutcome {
            w,
            phi,
            relaxed: None,
            trace: AltOptTrace {
                iteration_count: 1,
                mse_history: vec![mse],
                truncated_history: vec![mse],
                converged: true,
            },
        });
    }

    let matched = |phi: &PhaseVector| {
        let w = mmse_matrix(&effective_channel_relaxed(cs, phi.as_vector()), nr);
        let mse = mse_objective(&w, phi.as_vector(), cs);
        (w, mse)
    };
    let small_change =
        |prev: f64, cur: f64| (prev - cur).abs() <= tol * prev.abs().max(f64::MIN_POSITIVE);

    let phi0 = PhaseVector::random(rng, n);
    let mut w = matched(&phi0).0;
    let mut trace = AltOptTrace::default();
    let mut last: Option<RelaxedSolution> = None;

    for round in 1..=max_rounds {
        let step = relaxed_step(&w, cs)?;
        trace.iteration_count = round;
        trace.mse_history.push(step.relaxed_mse);
        w = mmse_matrix(&effective_channel_relaxed(cs, &step.phi_relaxed), nr);
        let prev = last.as_ref().map(|s| s.relaxed_mse);
        let cur = step.relaxed_mse;
        last = Some(step);
        if prev.is_some_and(|p| small_change(p, cur)) {
            trace.converged = true;
            break;
        }
    }
    let relaxed = last.expect("at least one round");

    let mut best_phi = relaxed.phi_truncated.clone();
    let (mut best_w, mut best_mse) = matched(&best_phi);
    trace.truncated_history.push(best_mse);
    let mut w = best_w.clone();
    for _ in 0..max_rounds {
        let step = relaxed_step(&w, cs)?;
        let (w_next, mse) = matched(&step.phi_truncated);
        trace.truncated_history.push(mse);
        w = w_next;
        let improved = mse < best_mse;
        let stalled = !improved || small_change(best_mse, mse);
        if improved {
            best_mse = mse;
            best_phi = step.phi_truncated;
            best_w = w.clone();
        }
        if stalled {
            break;
        }
    }

    Ok(AltOptOutcome {
        w: best_w,
        phi: best_phi,
        relaxed: Some(relaxed),
        trace,
    })
}
