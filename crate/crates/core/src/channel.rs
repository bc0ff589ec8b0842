//! Geometry, large-scale path loss and Rayleigh block fading for the three
//! links of an RIS-assisted uplink, plus assembly of the effective channel
//! `H + G Diag(phi) F`.
//!
//! Matrix conventions: `H` is `M x K` (users to AP), `G` is `M x N` (RIS to
//! AP) and `F` is `N x K` with column `k` holding the user-`k`-to-RIS link
//! `f_k`. Column `k` of the effective channel is the vector `h_k^eff` seen by
//! user `k` at the AP.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Complex64};

/// Distance below which the path-loss models are not valid (meters).
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

/// Which of the two 3GPP-style path-loss laws applies to a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathLossModel {
    /// Obstructed link, `41.2 + 28.7 log10(d)`.
    Weak,
    /// Unobstructed link, `37.3 + 22.0 log10(d)`.
    Strong,
}

/// Path loss in dB at distance `d` meters.
pub fn path_loss_db(d: f64, model: PathLossModel) -> Result<f64> {
    if d.is_nan() || d < REFERENCE_DISTANCE_M {
        return Err(Error::Domain(format!(
            "path loss requested at d = {d} m, below the {REFERENCE_DISTANCE_M} m reference distance"
        )));
    }
    let (intercept, slope) = match model {
        PathLossModel::Weak => (41.2, 28.7),
        PathLossModel::Strong => (37.3, 22.0),
    };
    Ok(intercept + slope * d.log10())
}

/// Linear amplitude gain `sqrt(10^(-PL/10))` for a link of length `d`.
pub fn amplitude_gain(d: f64, model: PathLossModel) -> Result<f64> {
    Ok(10f64.powf(-path_loss_db(d, model)? / 20.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Positions of the access point, the RIS and the `K` users.
///
/// Users live inside a disk of radius `user_circle_radius` centred at
/// `(user_circle_center_x, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    ap_position: Point2,
    ris_position: Point2,
    user_positions: Vec<Point2>,
    user_circle_center_x: f64,
    user_circle_radius: f64,
}

impl Geometry {
    pub fn new(
        ap_position: Point2,
        ris_position: Point2,
        user_positions: Vec<Point2>,
        user_circle_center_x: f64,
        user_circle_radius: f64,
    ) -> Result<Self> {
        if user_positions.is_empty() {
            return Err(Error::Domain("geometry needs at least one user".into()));
        }
        let finite = |p: &Point2| p.x.is_finite() && p.y.is_finite();
        if !finite(&ap_position)
            || !finite(&ris_position)
            || !user_positions.iter().all(finite)
            || !user_circle_center_x.is_finite()
            || !(user_circle_radius >= 0.0 && user_circle_radius.is_finite())
        {
            return Err(Error::Domain("geometry coordinates must be finite".into()));
        }
        let center = Point2::new(user_circle_center_x, 0.0);
        // slack for the rounding in the polar sampler
        let limit = user_circle_radius * (1.0 + 1e-12) + 1e-12;
        if let Some(p) = user_positions.iter().find(|p| p.distance(&center) > limit) {
            return Err(Error::Domain(format!(
                "user at ({}, {}) lies outside the {} m circle around ({}, 0)",
                p.x, p.y, user_circle_radius, user_circle_center_x
            )));
        }
        Ok(Self {
            ap_position,
            ris_position,
            user_positions,
            user_circle_center_x,
            user_circle_radius,
        })
    }

    /// Draws `k` users uniformly in the circle and builds the geometry.
    pub fn sample<R: Rng + ?Sized>(
        rng: &mut R,
        ap_position: Point2,
        ris_position: Point2,
        k: usize,
        user_circle_center_x: f64,
        user_circle_radius: f64,
    ) -> Result<Self> {
        let users = sample_user_positions(
            rng,
            k,
            Point2::new(user_circle_center_x, 0.0),
            user_circle_radius,
        );
        Self::new(
            ap_position,
            ris_position,
            users,
            user_circle_center_x,
            user_circle_radius,
        )
    }

    pub fn ap_position(&self) -> Point2 {
        self.ap_position
    }

    pub fn ris_position(&self) -> Point2 {
        self.ris_position
    }

    pub fn user_positions(&self) -> &[Point2] {
        &self.user_positions
    }

    pub fn num_users(&self) -> usize {
        self.user_positions.len()
    }

    pub fn user_circle_center_x(&self) -> f64 {
        self.user_circle_center_x
    }

    pub fn user_circle_radius(&self) -> f64 {
        self.user_circle_radius
    }
}

/// `k` points i.i.d. uniform over the disk of the given centre and radius.
pub fn sample_user_positions<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    center: Point2,
    radius: f64,
) -> Vec<Point2> {
    let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
    (0..k)
        .map(|_| {
            // sqrt on the radial draw gives uniform density over area
            let r = radius * unit.sample(rng).sqrt();
            let theta = 2.0 * PI * unit.sample(rng);
            Point2::new(center.x + r * theta.cos(), center.y + r * theta.sin())
        })
        .collect()
}

/// One circularly-symmetric `CN(0, 1)` sample.
pub fn sample_cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// `rows x cols` matrix of i.i.d. `CN(0, 1)` entries, drawn column-major.
pub fn sample_rayleigh<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| sample_cn(rng))
}

/// One block-fading realization of the direct, RIS-to-AP and user-to-RIS
/// links, with path loss folded into the entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Direct links, `M x K`.
    pub h: CMatrix,
    /// RIS to AP, `M x N`.
    pub g: CMatrix,
    /// Users to RIS, `N x K`; column `k` is `f_k`.
    pub f: CMatrix,
    /// Noise variance per receive antenna (W).
    pub sigma_n2: f64,
    /// Symbol energy per user (W).
    pub e_x: f64,
}

impl ChannelSet {
    /// Wraps raw link matrices after checking shapes and powers.
    pub fn new(h: CMatrix, g: CMatrix, f: CMatrix, sigma_n2: f64, e_x: f64) -> Result<Self> {
        let (m, k) = h.shape();
        if g.nrows() != m || f.ncols() != k || g.ncols() != f.nrows() {
            return Err(Error::Domain(format!(
                "inconsistent link shapes: H {:?}, G {:?}, F {:?}",
                h.shape(),
                g.shape(),
                f.shape()
            )));
        }
        if !(sigma_n2 > 0.0 && sigma_n2.is_finite()) || !(e_x > 0.0 && e_x.is_finite()) {
            return Err(Error::Domain(format!(
                "noise variance ({sigma_n2}) and symbol energy ({e_x}) must be positive"
            )));
        }
        let all_finite = |a: &CMatrix| a.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !(all_finite(&h) && all_finite(&g) && all_finite(&f)) {
            return Err(Error::Domain("non-finite channel entry".into()));
        }
        Ok(Self {
            h,
            g,
            f,
            sigma_n2,
            e_x,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.h.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.h.ncols()
    }

    pub fn num_elements(&self) -> usize {
        self.g.ncols()
    }

    /// `sigma_n^2 / E_x`, the diagonal loading of the MMSE filter.
    pub fn noise_ratio(&self) -> f64 {
        self.sigma_n2 / self.e_x
    }

    /// Same links with the RIS cascade removed (`G = 0`).
    pub fn without_ris(&self) -> Self {
        Self {
            g: CMatrix::zeros(self.g.nrows(), self.g.ncols()),
            ..self.clone()
        }
    }
}

/// Draws all three links for `geometry`: the weak law on the direct links,
/// the strong law on both RIS hops.
pub fn build_channel_set<R: Rng + ?Sized>(
    geometry: &Geometry,
    m: usize,
    n: usize,
    sigma_n2: f64,
    e_x: f64,
    rng: &mut R,
) -> Result<ChannelSet> {
    let k = geometry.num_users();
    let ap = geometry.ap_position();
    let ris = geometry.ris_position();

    let direct_gain = geometry
        .user_positions()
        .iter()
        .map(|u| amplitude_gain(u.distance(&ap), PathLossModel::Weak))
        .collect::<Result<Vec<_>>>()?;
    let ris_ap_gain = amplitude_gain(ris.distance(&ap), PathLossModel::Strong)?;
    let user_ris_gain = geometry
        .user_positions()
        .iter()
        .map(|u| amplitude_gain(u.distance(&ris), PathLossModel::Strong))
        .collect::<Result<Vec<_>>>()?;

    let mut h = sample_rayleigh(rng, m, k);
    let mut g = sample_rayleigh(rng, m, n);
    let mut f = sample_rayleigh(rng, n, k);
    for (mut col, gain) in h.column_iter_mut().zip(&direct_gain) {
        col *= Complex64::from(*gain);
    }
    g *= Complex64::from(ris_ap_gain);
    for (mut col, gain) in f.column_iter_mut().zip(&user_ris_gain) {
        col *= Complex64::from(*gain);
    }
    ChannelSet::new(h, g, f, sigma_n2, e_x)
}

/// RIS reflection coefficients, one per element, on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(CVector);

impl PhaseVector {
    pub const UNIT_MODULUS_TOL: f64 = 1e-12;

    pub fn new(phi: CVector) -> Result<Self> {
        if let Some((i, z)) = phi
            .iter()
            .enumerate()
            .find(|(_, z)| (z.norm() - 1.0).abs() > Self::UNIT_MODULUS_TOL)
        {
            return Err(Error::Domain(format!(
                "coefficient {i} has modulus {} (expected 1)",
                z.norm()
            )));
        }
        Ok(Self(phi))
    }

    /// All elements at phase zero, i.e. `Phi = I`.
    pub fn ones(n: usize) -> Self {
        Self(CVector::from_element(n, Complex64::new(1.0, 0.0)))
    }

    pub fn from_phases(theta: &[f64]) -> Self {
        Self(CVector::from_iterator(
            theta.len(),
            theta.iter().map(|&t| Complex64::from_polar(1.0, t)),
        ))
    }

    /// i.i.d. phases uniform on `[0, 2 pi)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let dist = Uniform::new(0.0, 2.0 * PI).expect("valid range");
        let theta: Vec<f64> = (0..n).map(|_| dist.sample(rng)).collect();
        Self::from_phases(&theta)
    }

    pub(crate) fn from_unit_vector_unchecked(phi: CVector) -> Self {
        Self(phi)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }
}

/// `H + G Diag(phi) F` for an arbitrary (not necessarily unit-modulus)
/// coefficient vector.
///
/// # Panics
///
/// If `phi` does not have one entry per RIS element.
pub fn effective_channel_relaxed(cs: &ChannelSet, phi: &CVector) -> CMatrix {
    assert_eq!(
        phi.len(),
        cs.num_elements(),
        "phase vector length does not match the number of RIS elements"
    );
    let mut g_phi = cs.g.clone();
    for (mut col, p) in g_phi.column_iter_mut().zip(phi.iter()) {
        col *= *p;
    }
    &cs.h + g_phi * &cs.f
}

/// Effective channel `H_eff = H + G Diag(phi) F`, `M x K`.
pub fn assemble_effective_channel(cs: &ChannelSet, phi: &PhaseVector) -> CMatrix {
    effective_channel_relaxed(cs, phi.as_vector())
}

/// Column `k` of the effective channel via the per-user form
/// `h_k + G A_k phi` with `A_k = Diag(f_k)`.
pub fn effective_column(cs: &ChannelSet, phi: &CVector, k: usize) -> CVector {
    assert_eq!(phi.len(), cs.num_elements());
    let a_k_phi = cs.f.column(k).component_mul(phi);
    cs.h.column(k) + &cs.g * a_k_phi
}
