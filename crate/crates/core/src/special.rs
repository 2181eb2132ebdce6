//! Associated Laguerre polynomials and log-factorials.
//!
//! Both are evaluated through stable recurrences so that photon numbers up to
//! a couple of hundred stay well inside f64 range. Factorial ratios are always
//! formed in log space.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest polynomial order accepted by [`assoc_laguerre`].
pub const MAX_LAGUERRE_ORDER: usize = 200;

const LN_FACTORIAL_TABLE_LEN: usize = 1025;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACTORIAL_TABLE_LEN);
        t.push(0.0);
        let mut acc = 0.0_f64;
        for n in 1..LN_FACTORIAL_TABLE_LEN {
            acc += (n as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// ln(n!) for n up to 1024.
pub fn ln_factorial(n: usize) -> f64 {
    let table = ln_factorial_table();
    assert!(n < table.len(), "ln_factorial: n = {n} exceeds table");
    table[n]
}

/// Generalized Laguerre polynomial L_n^{(k)}(x) via the three-term recurrence
/// in the degree n; `L_n == L_n^{(0)}`.
pub fn assoc_laguerre(n: usize, k: usize, x: f64) -> Result<f64> {
    if n > MAX_LAGUERRE_ORDER || k > MAX_LAGUERRE_ORDER {
        return Err(Error::OutOfRange(format!(
            "assoc_laguerre: n = {n}, k = {k} exceed the supported order {MAX_LAGUERRE_ORDER}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::OutOfRange(format!(
            "assoc_laguerre: non-finite argument x = {x}"
        )));
    }
    let value = assoc_laguerre_unchecked(n, k, x);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::OutOfRange(format!(
            "assoc_laguerre: overflow at n = {n}, k = {k}, x = {x}"
        )))
    }
}

/// Laguerre polynomial L_n(x).
pub fn laguerre(n: usize, x: f64) -> Result<f64> {
    assoc_laguerre(n, 0, x)
}

pub(crate) fn assoc_laguerre_unchecked(n: usize, k: usize, x: f64) -> f64 {
    let kf = k as f64;
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + kf - x;
    for m in 1..n {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + kf - x) * cur - (mf + kf) * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// All of L_0^{(k)}(x) ..= L_nmax^{(k)}(x) in one recurrence pass.
pub(crate) fn assoc_laguerre_row(n_max: usize, k: usize, x: f64) -> Vec<f64> {
    let kf = k as f64;
    let mut row = Vec::with_capacity(n_max + 1);
    row.push(1.0);
    if n_max == 0 {
        return row;
    }
    row.push(1.0 + kf - x);
    for m in 1..n_max {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + kf - x) * row[m] - (mf + kf) * row[m - 1]) / (mf + 1.0);
        row.push(next);
    }
    row
}
