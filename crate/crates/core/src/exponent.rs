//! The exponent `p(c)`, smallest positive root of `p -> psi_p(c)`, and its
//! inverse `c(p)`, the largest real zero of `psi_p`.

use std::collections::HashMap;
use std::sync::Mutex;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{eval_psi, QuadratureConfig};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const P_MAX: f64 = 64.0;
const SCAN_STEP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSolveResult {
    pub value: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    /// `|psi|` at `value`.
    pub residual: f64,
    pub iterations: u32,
}

type Memo = Lazy<Mutex<HashMap<(u64, u64), ExponentSolveResult>>>;
static P_MEMO: Memo = Lazy::new(|| Mutex::new(HashMap::new()));
static C_MEMO: Memo = Lazy::new(|| Mutex::new(HashMap::new()));

fn bisect<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    tol: f64,
) -> Result<ExponentSolveResult> {
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        iterations += 1;
        if fm == 0.0 {
            lo = mid - 0.25 * tol;
            hi = mid + 0.25 * tol;
            break;
        }
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    let value = 0.5 * (lo + hi);
    let residual = f(value)?.abs();
    Ok(ExponentSolveResult {
        value,
        bracket_lo: lo,
        bracket_hi: hi,
        residual,
        iterations,
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Smallest `p > 0` with `psi_p(c) = 0`.
pub fn p_of_c(c: f64, tol: f64) -> Result<ExponentSolveResult> {
    if !c.is_finite() {
        return Err(Error::NonFinite(format!("c={c}")));
    }
    check_tol(tol)?;
    let key = (c.to_bits(), tol.to_bits());
    if let Some(r) = P_MEMO.lock().unwrap().get(&key) {
        return Ok(*r);
    }
    let cfg = QuadratureConfig::default();
    let f = |p: f64| eval_psi(p, c, &cfg).map(|v| v.value);
    let mut lo = tol;
    let mut f_lo = f(lo)?;
    loop {
        let hi = lo + SCAN_STEP;
        if hi > P_MAX {
            return Err(Error::NoSignChange(format!(
                "psi_p({c}) keeps its sign for p in ({tol}, {P_MAX}]; last value {f_lo:e}"
            )));
        }
        let f_hi = f(hi)?;
        if f_hi == 0.0 {
            let r = bisect(f, hi - 0.5 * tol, hi + 0.5 * tol, f(hi - 0.5 * tol)?, tol)?;
            let r = ExponentSolveResult { value: hi, ..r };
            P_MEMO.lock().unwrap().insert(key, r);
            return Ok(r);
        }
        if (f_hi > 0.0) != (f_lo > 0.0) {
            let r = bisect(f, lo, hi, f_lo, tol)?;
            P_MEMO.lock().unwrap().insert(key, r);
            return Ok(r);
        }
        lo = hi;
        f_lo = f_hi;
    }
}

/// Largest real zero of `psi_p`, for `p > 0`.
pub fn c_of_p(p: f64, tol: f64) -> Result<ExponentSolveResult> {
    if !p.is_finite() {
        return Err(Error::NonFinite(format!("p={p}")));
    }
    if p <= 0.0 {
        return Err(Error::Domain(format!(
            "psi_p has no real zeros for p <= 0 (p={p})"
        )));
    }
    check_tol(tol)?;
    let key = (p.to_bits(), tol.to_bits());
    if let Some(r) = C_MEMO.lock().unwrap().get(&key) {
        return Ok(*r);
    }
    let cfg = QuadratureConfig::default();
    let f = |x: f64| eval_psi(p, x, &cfg).map(|v| v.value);
    let x_lo = -(2.0 * p.sqrt() + 8.0);
    let mut hi = 2.0 * p.sqrt() + 4.0;
    let mut f_hi = f(hi)?;
    loop {
        let lo = hi - SCAN_STEP;
        if lo < x_lo {
            return Err(Error::NoSignChange(format!(
                "psi_{p} keeps its sign on [{x_lo}, {}]",
                2.0 * p.sqrt() + 4.0
            )));
        }
        let f_lo = f(lo)?;
        if f_lo == 0.0 || (f_lo > 0.0) != (f_hi > 0.0) {
            // Zeros of Hermite polynomials can land on the scan grid (p = 1 at x = 0).
            let (a, b) = if f_lo == 0.0 {
                (lo - 0.5 * tol, lo + 0.5 * tol)
            } else {
                (lo, hi)
            };
            let mut r = bisect(f, a, b, f(a)?, tol)?;
            if f_lo == 0.0 {
                r.value = lo;
                r.residual = 0.0;
            }
            C_MEMO.lock().unwrap().insert(key, r);
            return Ok(r);
        }
        hi = lo;
        f_hi = f_lo;
    }
}
