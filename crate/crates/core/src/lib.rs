//! Link-level simulation of a multiuser uplink assisted by a passive
//! reconfigurable intelligent surface (RIS), with an iterative receiver that
//! exchanges soft information between an MMSE soft-interference-cancelling
//! detector and an LDPC belief-propagation decoder.
//!
//! The building blocks live in their own modules and can be used alone:
//!
//! * [`channel`]: geometry, path loss, Rayleigh block fading, `H + G Phi F`.
//! * [`ris_optim`]: MSE-driven reflection design by alternating minimisation.
//! * [`detection`]: soft symbols, SIC, MMSE filters, extrinsic LLRs, SINR.
//! * [`coding`]: regular LDPC construction, encoding, sum-product decoding
//!   and Gray QPSK.
//! * [`idd`]: one frame of the iterative receiver and the uncoded baselines.
//! * [`sim`]: configuration, seeded parallel sweeps and CSV/JSON output.

pub mod channel;
pub mod coding;
pub mod detection;
pub mod error;
pub mod idd;
pub mod ris_optim;
pub mod sim;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;

/// Saturation magnitude of every LLR exchanged between receiver blocks.
pub const LLR_MAX: f64 = 50.0;
