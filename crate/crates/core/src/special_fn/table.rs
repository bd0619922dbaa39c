//! Fast repeated evaluation of `V_p` and its clipped form for a fixed order.
//!
//! Integer orders use the polynomial recurrence. Other orders interpolate
//! `psi_p` on a uniform grid with cubic Hermite splines, using the exact
//! slopes `p psi_{p-1}`, and switch to the asymptotic series far out.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;

use super::{as_order, eval_psi, psi_asymptotic, v_poly, QuadratureConfig};
use crate::error::Result;
use crate::exponent;

const STEP: f64 = 1.0 / 128.0;
const Z_FAR: f64 = 12.0;
// Gaussian drift integrals reach this far below the largest zero.
const Z_BELOW: f64 = 14.0;

#[derive(Debug)]
struct PsiTable {
    p: f64,
    z0: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PsiTable {
    fn build(p: f64, z0: f64) -> Result<Self> {
        let cfg = QuadratureConfig::default();
        let n = ((Z_FAR - z0) / STEP).ceil() as usize + 2;
        let mut values = Vec::with_capacity(n);
        let mut slopes = Vec::with_capacity(n);
        for i in 0..n {
            let z = z0 + i as f64 * STEP;
            values.push(eval_psi(p, z, &cfg)?.value);
            slopes.push(p * eval_psi(p - 1.0, z, &cfg)?.value);
        }
        Ok(Self {
            p,
            z0,
            values,
            slopes,
        })
    }

    fn eval(&self, z: f64) -> f64 {
        if z > Z_FAR {
            return psi_asymptotic(self.p, z);
        }
        let u = (z - self.z0) / STEP;
        if u < 0.0 {
            return eval_psi(self.p, z, &QuadratureConfig::default())
                .map(|v| v.value)
                .unwrap_or(f64::NAN);
        }
        let i = (u.floor() as usize).min(self.values.len() - 2);
        let s = u - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * STEP, self.slopes[i + 1] * STEP);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1
    }
}

static TABLES: Lazy<Mutex<HashMap<u64, Arc<PsiTable>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

#[derive(Debug, Clone)]
enum Kind {
    Poly(u32),
    Table(Arc<PsiTable>),
}

/// `V_p` for one order `p > 0`, cheap enough for inner Monte Carlo loops.
///
/// Interpolated orders are accurate to about `1e-10` relative. Tables are
/// built once per order and shared process-wide.
#[derive(Debug, Clone)]
pub struct VFunction {
    p: f64,
    c: f64,
    kind: Kind,
}

impl VFunction {
    pub fn new(p: f64) -> Result<Self> {
        let c = exponent::c_of_p(p, exponent::DEFAULT_TOL)?.value;
        let kind = match as_order(p) {
            Some(n) => Kind::Poly(n),
            None => {
                let key = p.to_bits();
                let cached = TABLES.lock().unwrap().get(&key).cloned();
                let table = match cached {
                    Some(t) => t,
                    None => {
                        let t = Arc::new(PsiTable::build(p, c.min(0.0) - Z_BELOW)?);
                        TABLES.lock().unwrap().insert(key, t.clone());
                        t
                    }
                };
                Kind::Table(table)
            }
        };
        Ok(Self { p, c, kind })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Largest zero of `psi_p`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn psi(&self, z: f64) -> f64 {
        match &self.kind {
            Kind::Poly(n) => super::hermite_he(*n, z),
            Kind::Table(t) => t.eval(z),
        }
    }

    /// `V_p(x, t)`. At `t = 0` this is `x^p`, undefined (NaN) for `x < 0`
    /// unless `p` is an integer.
    pub fn v(&self, x: f64, t: f64) -> f64 {
        match &self.kind {
            Kind::Poly(n) => v_poly(*n, x, t),
            Kind::Table(table) => {
                if t == 0.0 {
                    return if x >= 0.0 { x.powf(self.p) } else { f64::NAN };
                }
                let s = t.sqrt();
                s.powf(self.p) * table.eval(x / s)
            }
        }
    }

    /// `V_p(x, t)` above `x = c(p) sqrt t`, zero on and below it.
    pub fn clipped(&self, x: f64, t: f64) -> f64 {
        if x <= self.c * t.sqrt() {
            0.0
        } else {
            self.v(x, t)
        }
    }
}
