//! Regular LDPC codes: progressive-edge-growth construction without
//! 4-cycles and a systematic encoder obtained by GF(2) elimination.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Attempts made before [`construct_code`] gives up.
pub const MAX_CONSTRUCTION_ATTEMPTS: u64 = 64;

/// Dense GF(2) row packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(len: usize) -> Self {
        Self(vec![0; len.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn dot(&self, other: &BitRow) -> u8 {
        let ones: u32 = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        (ones & 1) as u8
    }
}

/// Systematic encoder: message bits go to `info_positions`, parity bit
/// `i` lands on `parity_positions[i]` and equals `<parity_rows[i], c>`
/// over the message-only codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
struct SystematicEncoder {
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    parity_rows: Vec<BitRow>,
}

/// A binary LDPC code given by its sparse parity-check matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdpcCode {
    n: usize,
    checks: Vec<Vec<usize>>,
    vars: Vec<Vec<usize>>,
    encoder: SystematicEncoder,
}

impl LdpcCode {
    /// Builds the code from the column indices of each parity check.
    ///
    /// Fails if the checks are rank deficient, since the message length
    /// would then differ from `n - rows`.
    pub fn from_checks(n: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        let mut vars = vec![Vec::new(); n];
        for (r, row) in checks.iter().enumerate() {
            for &c in row {
                if c >= n {
                    return Err(Error::Construction(format!(
                        "check {r} references column {c} >= n = {n}"
                    )));
                }
                if vars[c].contains(&r) {
                    return Err(Error::Construction(format!(
                        "duplicate edge between check {r} and column {c}"
                    )));
                }
                vars[c].push(r);
            }
        }
        let encoder = systematic_encoder(n, &checks)?;
        Ok(Self {
            n,
            checks,
            vars,
            encoder,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Message length.
    pub fn k(&self) -> usize {
        self.encoder.info_positions.len()
    }

    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    /// Column indices of each check (rows of `H`).
    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    /// Row indices touching each variable (columns of `H`).
    pub fn vars(&self) -> &[Vec<usize>] {
        &self.vars
    }

    pub fn column_weights(&self) -> Vec<usize> {
        self.vars.iter().map(Vec::len).collect()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.checks.iter().map(Vec::len).collect()
    }

    /// Codeword positions carrying the message, in message order.
    pub fn info_positions(&self) -> &[usize] {
        &self.encoder.info_positions
    }

    /// Pivot columns chosen during elimination, one per check.
    pub fn parity_positions(&self) -> &[usize] {
        &self.encoder.parity_positions
    }

    /// `true` when every parity check is satisfied.
    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        assert_eq!(bits.len(), self.n);
        self.checks
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &c| acc ^ bits[c]) == 0)
    }

    /// Systematic encoding of a `k`-bit message.
    pub fn encode(&self, message: &[u8]) -> Vec<u8> {
        assert_eq!(message.len(), self.k(), "message length must equal k");
        let mut packed = BitRow::zeros(self.n);
        let mut word = vec![0u8; self.n];
        for (&pos, &b) in self.encoder.info_positions.iter().zip(message) {
            if b & 1 == 1 {
                packed.set(pos);
                word[pos] = 1;
            }
        }
        for (row, &pos) in self
            .encoder
            .parity_rows
            .iter()
            .zip(&self.encoder.parity_positions)
        {
            word[pos] = row.dot(&packed);
        }
        word
    }

    /// Message bits read back from a codeword.
    pub fn extract_message(&self, codeword: &[u8]) -> Vec<u8> {
        self.encoder
            .info_positions
            .iter()
            .map(|&p| codeword[p])
            .collect()
    }

    /// Generator rows: the codewords of the unit messages.
    pub fn generator_rows(&self) -> Vec<Vec<u8>> {
        (0..self.k())
            .map(|i| {
                let mut m = vec![0u8; self.k()];
                m[i] = 1;
                self.encode(&m)
            })
            .collect()
    }

    /// `true` if no two checks share more than one column.
    pub fn is_four_cycle_free(&self) -> bool {
        let mut seen = vec![usize::MAX; self.checks.len()];
        for (r, row) in self.checks.iter().enumerate() {
            for &c in row {
                for &other in &self.vars[c] {
                    if other == r {
                        continue;
                    }
                    if seen[other] == r {
                        return false;
                    }
                    seen[other] = r;
                }
            }
        }
        true
    }
}

/// Reduced row echelon form of `H` with pivots taken column by column.
fn systematic_encoder(n: usize, checks: &[Vec<usize>]) -> Result<SystematicEncoder> {
    let mut rows: Vec<BitRow> = checks
        .iter()
        .map(|cols| {
            let mut r = BitRow::zeros(n);
            for &c in cols {
                r.set(c);
            }
            r
        })
        .collect();
    let m = rows.len();
    let mut pivots = Vec::with_capacity(m);
    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if rank < m {
        return Err(Error::Construction(format!(
            "parity-check matrix has rank {rank} < {m} rows"
        )));
    }
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let info_positions = (0..n).filter(|&c| !is_pivot[c]).collect();
    Ok(SystematicEncoder {
        info_positions,
        parity_positions: pivots,
        parity_rows: rows,
    })
}

/// Builds a `(dv, dc)`-regular code of length `n` and the given rate.
///
/// Edges are placed column by column; each new edge of a column goes to a
/// check with spare degree that is as far as possible from the column in
/// the current Tanner graph (never at distance that would close a
/// 4-cycle), ties broken by lowest current degree, then at random. An
/// attempt that paints itself into a corner or yields a rank-deficient
/// matrix is retried on a fresh stream of the same seed.
pub fn construct_code(n: usize, rate: f64, dv: usize, dc: usize, seed: u64) -> Result<LdpcCode> {
    if n == 0 || dv == 0 || dc == 0 || !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Construction(format!(
            "invalid parameters n = {n}, rate = {rate}, dv = {dv}, dc = {dc}"
        )));
    }
    let m_real = n as f64 * (1.0 - rate);
    let m = m_real.round() as usize;
    if (m_real - m as f64).abs() > 1e-9 || m * dc != n * dv {
        return Err(Error::Construction(format!(
            "degree-inconsistent: n (1 - R) dc = {} but n dv = {}",
            m_real * dc as f64,
            n * dv
        )));
    }
    if dv > m || dc > n {
        return Err(Error::Construction(format!(
            "degrees ({dv}, {dc}) too large for a {m} x {n} matrix"
        )));
    }

    let mut last_err = None;
    for attempt in 0..MAX_CONSTRUCTION_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        match peg(n, m, dv, dc, &mut rng).and_then(|checks| LdpcCode::from_checks(n, checks)) {
            Ok(code) => return Ok(code),
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::Construction(format!(
        "no valid code after {MAX_CONSTRUCTION_ATTEMPTS} attempts (last: {})",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

fn peg(n: usize, m: usize, dv: usize, dc: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
    let mut checks: Vec<Vec<usize>> = vec![Vec::with_capacity(dc); m];
    let mut vars: Vec<Vec<usize>> = vec![Vec::with_capacity(dv); n];
    let mut depth = vec![usize::MAX; m];
    let mut col_seen = vec![false; n];
    let mut queue = VecDeque::new();

    for col in 0..n {
        for _ in 0..dv {
            // breadth-first depth of every check from `col`
            depth.fill(usize::MAX);
            col_seen.fill(false);
            queue.clear();
            col_seen[col] = true;
            for &r in &vars[col] {
                depth[r] = 0;
                queue.push_back(r);
            }
            while let Some(r) = queue.pop_front() {
                for &c in &checks[r] {
                    if col_seen[c] {
                        continue;
                    }
                    col_seen[c] = true;
                    for &r2 in &vars[c] {
                        if depth[r2] == usize::MAX {
                            depth[r2] = depth[r] + 1;
                            queue.push_back(r2);
                        }
                    }
                }
            }

            let open = |r: &usize| checks[*r].len() < dc && depth[*r] >= 2;
            let best_depth = (0..m).filter(open).map(|r| depth[r]).max().ok_or_else(|| {
                Error::Construction(format!("no admissible check for column {col}"))
            })?;
            let min_weight = (0..m)
                .filter(|r| open(r) && depth[*r] == best_depth)
                .map(|r| checks[r].len())
                .min()
                .expect("non-empty");
            let candidates: Vec<usize> = (0..m)
                .filter(|r| open(r) && depth[*r] == best_depth && checks[*r].len() == min_weight)
                .collect();
            let &row = candidates.choose(rng).expect("non-empty");
            checks[row].push(col);
            vars[col].push(row);
        }
    }
    for row in &mut checks {
        row.sort_unstable();
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn small_code() -> LdpcCode {
        construct_code(96, 0.5, 3, 6, 7).unwrap()
    }

    #[test]
    fn degree_inconsistent_parameters_fail() {
        assert!(matches!(
            construct_code(8, 0.5, 2, 3, 0),
            Err(Error::Construction(_))
        ));
        assert!(construct_code(10, 0.3, 3, 6, 0).is_err());
    }

    #[test]
    fn default_code_is_regular() {
        let code = construct_code(512, 0.5, 3, 6, 1).unwrap();
        assert_eq!(code.n(), 512);
        assert_eq!(code.num_checks(), 256);
        assert_eq!(code.k(), 256);
        assert!(code.column_weights().iter().all(|&w| w == 3));
        assert!(code.row_weights().iter().all(|&w| w == 6));
        assert!(code.is_four_cycle_free());
    }

    #[test]
    fn construction_is_deterministic() {
        assert_eq!(
            construct_code(128, 0.5, 3, 6, 11).unwrap(),
            construct_code(128, 0.5, 3, 6, 11).unwrap()
        );
    }

    #[test]
    fn generator_is_orthogonal_to_parity_checks() {
        let code = small_code();
        for g in code.generator_rows() {
            assert!(code.is_codeword(&g));
        }
    }

    #[test]
    fn zero_message_gives_zero_codeword() {
        let code = small_code();
        assert!(code.encode(&vec![0; code.k()]).iter().all(|&b| b == 0));
    }

    #[test]
    fn encoding_is_systematic() {
        let code = small_code();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        assert_eq!(code.extract_message(&code.encode(&msg)), msg);
    }

    proptest! {
        #[test]
        fn encoding_is_linear_with_zero_syndrome(seed in any::<u64>()) {
            let code = small_code();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m1: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let m2: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let c1 = code.encode(&m1);
            let c2 = code.encode(&m2);
            prop_assert!(code.is_codeword(&c1));
            let m12: Vec<u8> = m1.iter().zip(&m2).map(|(a, b)| a ^ b).collect();
            let c12: Vec<u8> = c1.iter().zip(&c2).map(|(a, b)| a ^ b).collect();
            prop_assert_eq!(code.encode(&m12), c12);
        }
    }

    #[test]
    fn rank_deficient_checks_rejected() {
        // second row duplicated -> rank 1
        let err = LdpcCode::from_checks(4, vec![vec![0, 1], vec![0, 1]]);
        assert!(err.is_err());
    }

    #[test]
    fn four_cycle_detection() {
        let code = LdpcCode::from_checks(4, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        assert!(!code.is_four_cycle_free());
    }
}
