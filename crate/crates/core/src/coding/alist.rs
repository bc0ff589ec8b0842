//! Plain-text alist storage of parity-check matrices.
//!
//! Layout (1-based indices, zero padding on column lists):
//!
//! ```text
//! n m
//! max_col_weight max_row_weight
//! <n column weights>
//! <m row weights>
//! <n lines: rows touching each column>
//! <m lines: columns in each row>
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{construct_code, LdpcCode};
use crate::error::{Error, Result};

pub fn to_alist(code: &LdpcCode) -> String {
    let n = code.n();
    let m = code.num_checks();
    let col_w = code.column_weights();
    let row_w = code.row_weights();
    let max_c = col_w.iter().copied().max().unwrap_or(0);
    let max_r = row_w.iter().copied().max().unwrap_or(0);

    let join =
        |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    writeln!(s, "{n} {m}").unwrap();
    writeln!(s, "{max_c} {max_r}").unwrap();
    writeln!(s, "{}", join(&mut col_w.iter().copied())).unwrap();
    writeln!(s, "{}", join(&mut row_w.iter().copied())).unwrap();
    for rows in code.vars() {
        let mut sorted = rows.clone();
        sorted.sort_unstable();
        let padded = sorted
            .iter()
            .map(|r| r + 1)
            .chain(std::iter::repeat(0))
            .take(max_c);
        writeln!(s, "{}", join(&mut padded.into_iter())).unwrap();
    }
    for cols in code.checks() {
        writeln!(s, "{}", join(&mut cols.iter().map(|c| c + 1))).unwrap();
    }
    s
}

pub fn from_alist(text: &str) -> Result<LdpcCode> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let mut next_nums = |what: &str| -> Result<Vec<usize>> {
        let line = lines
            .next()
            .ok_or_else(|| Error::Alist(format!("missing {what} line")))?;
        line.split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::Alist(format!("bad number {t:?} in {what}: {e}")))
            })
            .collect()
    };
    let dims = next_nums("dimension")?;
    let [n, m] = dims[..] else {
        return Err(Error::Alist("dimension line needs two numbers".into()));
    };
    next_nums("max weight")?;
    let col_w = next_nums("column weight")?;
    let row_w = next_nums("row weight")?;
    if col_w.len() != n || row_w.len() != m {
        return Err(Error::Alist("weight list length mismatch".into()));
    }
    for _ in 0..n {
        next_nums("column")?;
    }
    let mut checks = Vec::with_capacity(m);
    for (r, &w) in row_w.iter().enumerate() {
        let cols = next_nums("row")?;
        let cols: Vec<usize> = cols
            .into_iter()
            .filter(|&c| c != 0)
            .map(|c| c - 1)
            .collect();
        if cols.len() != w {
            return Err(Error::Alist(format!(
                "row {} lists {} columns, header says {w}",
                r + 1,
                cols.len()
            )));
        }
        checks.push(cols);
    }
    let code = LdpcCode::from_checks(n, checks)?;
    if code.column_weights() != col_w {
        return Err(Error::Alist("column weights disagree with rows".into()));
    }
    Ok(code)
}

/// File name identifying a construction by its parameters.
pub fn cache_file_name(n: usize, rate: f64, dv: usize, dc: usize, seed: u64) -> String {
    format!("ldpc_n{n}_r{rate}_dv{dv}_dc{dc}_s{seed}.alist")
}

/// Loads the matrix from `dir` if present, otherwise constructs it and
/// writes it there.
pub fn load_or_construct(
    dir: &Path,
    n: usize,
    rate: f64,
    dv: usize,
    dc: usize,
    seed: u64,
) -> Result<LdpcCode> {
    let path: PathBuf = dir.join(cache_file_name(n, rate, dv, dc, seed));
    if path.exists() {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        return from_alist(&text);
    }
    let code = construct_code(n, rate, dv, dc, seed)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    std::fs::write(&path, to_alist(&code)).map_err(|e| Error::io(&path, e))?;
    Ok(code)
}
