//! Gray-mapped QPSK: the first bit of a pair sets the in-phase sign, the
//! second the quadrature sign, bit 0 mapping to `+1`.

use crate::Complex64;

/// Antipodal value of a bit: `0 -> +1`, `1 -> -1`.
pub fn antipodal(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn map_pair(bits: [u8; 2], e_x: f64) -> Complex64 {
    let amp = (e_x / 2.0).sqrt();
    Complex64::new(amp * antipodal(bits[0]), amp * antipodal(bits[1]))
}

/// The four points with their bit labels.
pub fn constellation(e_x: f64) -> [([u8; 2], Complex64); 4] {
    [[0, 0], [0, 1], [1, 1], [1, 0]].map(|b| (b, map_pair(b, e_x)))
}

/// Maps bits pairwise in natural order. An odd trailing bit is an error in
/// the caller.
pub fn map_bits_to_symbols(bits: &[u8], e_x: f64) -> Vec<Complex64> {
    assert!(
        bits.len().is_multiple_of(2),
        "QPSK needs an even number of bits"
    );
    bits.chunks_exact(2)
        .map(|p| map_pair([p[0], p[1]], e_x))
        .collect()
}

/// Minimum-distance decisions, two bits per symbol.
pub fn hard_demap(symbols: &[Complex64]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|s| [u8::from(s.re < 0.0), u8::from(s.im < 0.0)])
        .collect()
}
