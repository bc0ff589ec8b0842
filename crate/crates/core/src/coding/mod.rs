//! Regular LDPC coding and Gray-mapped QPSK.
//!
//! Bits are `u8` values in `{0, 1}`. LLRs are `log P(0) / P(1)`.

pub mod alist;
mod bp;
mod ldpc;
pub mod qpsk;

pub use bp::{bp_decode, BpOutput};
pub use ldpc::{construct_code, LdpcCode};
pub use qpsk::{hard_demap, map_bits_to_symbols};
