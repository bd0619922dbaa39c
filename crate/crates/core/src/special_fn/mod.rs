//! Weber-type functions `psi_p(x) = exp(x^2/4) D_p(x)` and the space-time
//! functions `V_p(x, t) = t^{p/2} psi_p(x / sqrt t)`.
//!
//! `psi_n` is the probabilists' Hermite polynomial `He_n` for integer
//! `n >= 0`. Negative orders come from the integral
//! `psi_q(x) = 1/Gamma(-q) * int_0^inf exp(-x s - s^2/2) s^{-q-1} ds`
//! and positive non-integer orders are reached by the upward recurrence
//! `psi_p = x psi_{p-1} + (1 - p) psi_{p-2}` from two negative base orders.
//! On the negative half-line that recurrence cancels a component of size
//! `exp(x^2/2)`, so there the Kummer-function form is summed instead.

mod table;

pub use table::VFunction;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent;
use crate::quadrature::{self, Tolerance};

/// Accuracy controls for the integral representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Integrand level, relative to its peak, at which `(1, inf)` is cut.
    pub tail_eps: f64,
    pub max_refinements: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            tail_eps: 1e-16,
            max_refinements: 30,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.rel_tol) || !ok(self.abs_tol) || !ok(self.tail_eps) {
            return Err(Error::Invalid(format!(
                "quadrature tolerances must be positive: {self:?}"
            )));
        }
        if self.max_refinements == 0 {
            return Err(Error::Invalid("max_refinements must be at least 1".into()));
        }
        Ok(())
    }
}

/// A point `(x, t)` with `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: f64,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: f64, t: f64) -> Result<Self> {
        if !x.is_finite() || !t.is_finite() {
            return Err(Error::NonFinite(format!("point ({x}, {t})")));
        }
        if t < 0.0 {
            return Err(Error::Domain(format!("time must be non-negative, got t={t}")));
        }
        Ok(Self { x, t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiValue {
    pub value: f64,
    pub est_error: f64,
}

const INTEGER_EPS: f64 = 1e-12;

/// Returns `Some(n)` when `p` is within rounding of a non-negative integer.
pub fn as_order(p: f64) -> Option<u32> {
    let r = p.round();
    if r >= 0.0 && (p - r).abs() < INTEGER_EPS && r <= u32::MAX as f64 {
        Some(r as u32)
    } else {
        None
    }
}

/// Probabilists' Hermite polynomial `He_n(x)` by its three-term recurrence.
pub fn hermite_he(n: u32, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = x * h1 - k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// `V_n(x, t) = t^{n/2} He_n(x / sqrt t)`, a polynomial in `(x, t)`.
pub fn v_poly(n: u32, x: f64, t: f64) -> f64 {
    let (mut v0, mut v1) = (1.0, x);
    if n == 0 {
        return v0;
    }
    for k in 1..n {
        let v2 = x * v1 - k as f64 * t * v0;
        v0 = v1;
        v1 = v2;
    }
    v1
}

/// `1 / Gamma(x)`, exactly zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        return 0.0;
    }
    1.0 / libm::tgamma(x)
}

fn check_finite(p: f64, x: f64) -> Result<()> {
    if !p.is_finite() || !x.is_finite() {
        return Err(Error::NonFinite(format!("psi arguments p={p}, x={x}")));
    }
    Ok(())
}

/// Evaluates `psi_p(x)`.
pub fn eval_psi(p: f64, x: f64, cfg: &QuadratureConfig) -> Result<PsiValue> {
    check_finite(p, x)?;
    if let Some(n) = as_order(p) {
        let value = hermite_he(n, x);
        if !value.is_finite() {
            return Err(Error::Range { p, x, t: 1.0 });
        }
        return Ok(PsiValue {
            value,
            est_error: 0.0,
        });
    }
    eval_psi_general(p, x, cfg)
}

/// The non-polynomial evaluation path, also for integer orders.
///
/// Exposed so the Hermite shortcut can be cross-checked against it.
#[doc(hidden)]
pub fn eval_psi_general(p: f64, x: f64, cfg: &QuadratureConfig) -> Result<PsiValue> {
    check_finite(p, x)?;
    cfg.validate()?;
    if p < 0.0 {
        return psi_negative(p, x, cfg);
    }
    if x < 0.0 {
        return psi_kummer(p, x);
    }
    let k = p.floor() + 2.0;
    let q0 = p - k;
    let b0 = psi_negative(q0, x, cfg)?;
    let b1 = psi_negative(q0 + 1.0, x, cfg)?;
    let (mut v0, mut v1) = (b0.value, b1.value);
    let (mut e0, mut e1) = (b0.est_error, b1.est_error);
    for j in 2..=(k as u32) {
        let pj = q0 + j as f64;
        let v2 = x * v1 + (1.0 - pj) * v0;
        let e2 = x.abs() * e1 + (1.0 - pj).abs() * e0 + f64::EPSILON * v2.abs();
        v0 = v1;
        v1 = v2;
        e0 = e1;
        e1 = e2;
    }
    if !v1.is_finite() {
        return Err(Error::Range { p, x, t: 1.0 });
    }
    Ok(PsiValue {
        value: v1,
        est_error: e1,
    })
}

/// `psi_q(x)` for `q < 0` by quadrature.
///
/// The integral is split at `s = 1`. On `(0, 1)` the change of variables
/// `s = u^{1/(-q)}` absorbs the factor `s^{-q-1}`. Everything is scaled by
/// the peak of the log-integrand so that neither tiny nor huge values
/// underflow or overflow before the final multiplication.
fn psi_negative(q: f64, x: f64, cfg: &QuadratureConfig) -> Result<PsiValue> {
    let m = -1.0 / q;
    let r = -q - 1.0;
    let log_f = |s: f64| -x * s - 0.5 * s * s + r * s.ln();

    let head_peak = if x < 0.0 {
        let s = (-x).min(1.0);
        -x * s - 0.5 * s * s
    } else {
        0.0
    };
    let disc = x * x + 4.0 * r;
    let s_star = if disc >= 0.0 {
        let s = 0.5 * (-x + disc.sqrt());
        if s > 1.0 {
            s
        } else {
            1.0
        }
    } else {
        1.0
    };
    let tail_peak = log_f(s_star);
    let shift = head_peak.max(tail_peak);

    let head = |u: f64| {
        let s = u.powf(m);
        (-x * s - 0.5 * s * s - shift).exp()
    };
    let tail = |s: f64| (log_f(s) - shift).exp();

    // Cut the tail where the scaled integrand falls below tail_eps.
    let cut = cfg.tail_eps.ln();
    let mut s_end = s_star;
    let mut step = 1.0;
    while log_f(s_end) - shift > cut {
        s_end += step;
        step *= 1.5;
    }

    let mut h = head;
    let mut t = tail;
    let rough = quadrature::gk15(&mut h, 0.0, 1.0).0 * m + quadrature::gk15(&mut t, 1.0, s_end).0;
    let g = rgamma(-q);
    let tol = Tolerance {
        abs: (cfg.abs_tol * (-shift).exp() / g).max(0.25 * cfg.rel_tol * rough.abs()),
        rel: cfg.rel_tol,
        max_depth: cfg.max_refinements,
    };
    let head_tol = Tolerance {
        abs: tol.abs / m,
        ..tol
    };
    let i1 = quadrature::integrate(head, 0.0, 1.0, head_tol)?;
    let i2 = quadrature::integrate(tail, 1.0, s_end, tol)?;
    let scale = shift.exp() * g;
    let value = (m * i1.value + i2.value) * scale;
    if !value.is_finite() {
        return Err(Error::Range { p: q, x, t: 1.0 });
    }
    let trunc = cfg.tail_eps * step;
    let est_error = (m * i1.abs_err + i2.abs_err + trunc) * scale;
    Ok(PsiValue { value, est_error })
}

/// Confluent hypergeometric `M(a, b, z)` for `z >= 0` by its power series.
fn kummer_m(a: f64, b: f64, z: f64) -> (f64, f64) {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut big = 1.0f64;
    for k in 0..5000 {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * z / (kf + 1.0);
        sum += term;
        big = big.max(term.abs());
        if term == 0.0 || (kf > a.abs() + z && term.abs() < 1e-17 * sum.abs()) {
            break;
        }
    }
    (sum, big * 4.0 * f64::EPSILON)
}

/// `psi_p(x)` from the even/odd Kummer solutions of Weber's equation.
fn psi_kummer(p: f64, x: f64) -> Result<PsiValue> {
    let z = 0.5 * x * x;
    let (m_even, e_even) = kummer_m(-0.5 * p, 0.5, z);
    let (m_odd, e_odd) = kummer_m(0.5 * (1.0 - p), 1.5, z);
    let pref = 2f64.powf(0.5 * p) * std::f64::consts::PI.sqrt();
    let ge = rgamma(0.5 * (1.0 - p));
    let go = std::f64::consts::SQRT_2 * x * rgamma(-0.5 * p);
    let value = pref * (ge * m_even - go * m_odd);
    if !value.is_finite() {
        return Err(Error::Range { p, x, t: 1.0 });
    }
    let est_error = pref * (ge.abs() * e_even + go.abs() * e_odd) + 4.0 * f64::EPSILON * value.abs();
    Ok(PsiValue { value, est_error })
}

/// Leading terms of `psi_p(z) ~ z^p sum_k (-1)^k p(p-1)..(p-2k+1) / (k! 2^k z^{2k})`,
/// summed until the terms stop shrinking.
pub fn psi_asymptotic(p: f64, z: f64) -> f64 {
    let inv = 1.0 / (2.0 * z * z);
    let mut term = 1.0f64;
    let mut sum = 1.0;
    for k in 1..80 {
        let kf = k as f64;
        let next = -term * (p - 2.0 * kf + 2.0) * (p - 2.0 * kf + 1.0) * inv / kf;
        if next.abs() >= term.abs() && k > 1 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    z.powf(p) * sum
}

/// `V_p(x, t)`; `x^p` at `t = 0`.
pub fn eval_v(p: f64, pt: SpaceTimePoint, cfg: &QuadratureConfig) -> Result<f64> {
    let SpaceTimePoint { x, t } = SpaceTimePoint::new(pt.x, pt.t)?;
    if !p.is_finite() {
        return Err(Error::NonFinite(format!("order p={p}")));
    }
    if let Some(n) = as_order(p) {
        let v = v_poly(n, x, t);
        if !v.is_finite() {
            return Err(Error::Range { p, x, t });
        }
        return Ok(v);
    }
    if t == 0.0 {
        if x <= 0.0 {
            return Err(Error::Domain(format!("V_p(x, 0) needs x > 0, got x={x}")));
        }
        let v = x.powf(p);
        return if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Range { p, x, t })
        };
    }
    let s = t.sqrt();
    let psi = eval_psi(p, x / s, cfg)?;
    let v = s.powf(p) * psi.value;
    if !v.is_finite() {
        return Err(Error::Range { p, x, t });
    }
    Ok(v)
}

/// `V_p(x, t)` when `x >= c(p) sqrt t`, zero below.
pub fn eval_v_clipped(p: f64, pt: SpaceTimePoint, cfg: &QuadratureConfig) -> Result<f64> {
    let pt = SpaceTimePoint::new(pt.x, pt.t)?;
    let c = exponent::c_of_p(p, exponent::DEFAULT_TOL)?.value;
    if pt.x < c * pt.t.sqrt() || (pt.t == 0.0 && pt.x <= 0.0) {
        return Ok(0.0);
    }
    eval_v(p, pt, cfg)
}

/// `dV_p/dx = p V_{p-1}`.
pub fn dv_dx(p: f64, pt: SpaceTimePoint, cfg: &QuadratureConfig) -> Result<f64> {
    let pt = SpaceTimePoint::new(pt.x, pt.t)?;
    if pt.t == 0.0 {
        return Err(Error::Domain("derivatives need t > 0".into()));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(p * eval_v(p - 1.0, pt, cfg)?)
}

/// `dV_p/dt = -p (p - 1) V_{p-2} / 2`.
pub fn dv_dt(p: f64, pt: SpaceTimePoint, cfg: &QuadratureConfig) -> Result<f64> {
    let pt = SpaceTimePoint::new(pt.x, pt.t)?;
    if pt.t == 0.0 {
        return Err(Error::Domain("derivatives need t > 0".into()));
    }
    let k = p * (p - 1.0);
    if k == 0.0 {
        return Ok(0.0);
    }
    Ok(-0.5 * k * eval_v(p - 2.0, pt, cfg)?)
}
