//! One-step drift audits of the corrected clipped functions
//!
//! `h(x, t) = (Vbar_{p1}(x + R, t) - C |x + R|^{p1 - delta})^+`   for `p1 > 1`,
//! `g(x, t) = (Vbar_{p1}(x + R, t + R) - C (t + R)^{(p1 - delta)/2})^+` for `p1 <= 1`,
//!
//! and a grid search for constants `C`, `R` that make them supermartingales
//! on the region `x >= (c(p1) + gamma) sqrt t`.

use serde::{Deserialize, Serialize};

use super::drift::expect_step;
use crate::error::{Error, Result};
use crate::exponent;
use crate::special_fn::VFunction;
use crate::walk::IncrementDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    /// Space-power correction, used for `p1 > 1`.
    H,
    /// Time-power correction, used for `p1 <= 1`.
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    /// Boundary slope; `p1` must stay below `p(c)`.
    pub c: f64,
    pub p1: f64,
    pub delta: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub gamma: f64,
    /// Region grid: `t` in `{0, 1, 2, 4, ..} <= t_max`.
    pub t_max: u64,
    /// Region grid: offsets `d` in `{0, 1/4, 1/2, 1, 2, 4, ..} <= d_max`.
    pub d_max: f64,
    /// Largest drift that still counts as non-positive.
    pub tolerance: f64,
}

impl AuditConfig {
    /// Canonical config for `(c, p1)` with `gamma = c - c(p1)`, so that the
    /// region is exactly where the walk killed at `c sqrt t` lives.
    pub fn canonical(c: f64, p1: f64, big_c: f64, big_r: f64) -> Result<Self> {
        Ok(Self {
            c,
            p1,
            delta: 0.1,
            big_c,
            big_r,
            gamma: canonical_gamma(c, p1)?,
            t_max: 4096,
            d_max: 4096.0,
            tolerance: 1e-8,
        })
    }

    pub fn correction(&self) -> Correction {
        if self.p1 > 1.0 + 1e-9 {
            Correction::H
        } else {
            Correction::G
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = exponent::p_of_c(self.c, exponent::DEFAULT_TOL)?.value;
        let ok = self.p1 > 0.0
            && self.p1 < p + 1e-9
            && self.delta > 0.0
            && self.big_c >= 0.0
            && self.big_r >= 0.0
            && self.gamma > 0.0
            && self.d_max >= 0.0
            && self.tolerance >= 0.0;
        if !ok {
            return Err(Error::Invalid(format!(
                "audit config needs 0 < p1 < p(c)={p:.6}, delta > 0, C, R >= 0, gamma > 0: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `c - c(p1)`, the margin that aligns the audit region with the walk.
pub fn canonical_gamma(c: f64, p1: f64) -> Result<f64> {
    let g = c - exponent::c_of_p(p1, exponent::DEFAULT_TOL)?.value;
    if g <= 0.0 {
        return Err(Error::Invalid(format!("c={c} does not exceed c(p1) for p1={p1}")));
    }
    Ok(g)
}

/// The `(x, t)` grid on which audits and the constant search run.
pub fn canonical_region(cfg: &AuditConfig) -> Result<Vec<(f64, f64)>> {
    let c1 = exponent::c_of_p(cfg.p1, exponent::DEFAULT_TOL)?.value;
    let mut ts = vec![0.0];
    let mut t = 1u64;
    while t <= cfg.t_max {
        ts.push(t as f64);
        t *= 2;
    }
    let mut ds = vec![0.0, 0.25, 0.5];
    let mut d = 1.0;
    while d <= cfg.d_max {
        ds.push(d);
        d *= 2.0;
    }
    let mut pts = Vec::with_capacity(ts.len() * ds.len());
    for &t in &ts {
        for &d in &ds {
            pts.push(((c1 + cfg.gamma) * f64::sqrt(t) + d, t));
        }
    }
    Ok(pts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditPoint {
    pub x: f64,
    pub t: f64,
    pub drift: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub config: AuditConfig,
    pub correction: Correction,
    pub points: usize,
    pub max_drift: f64,
    /// Point attaining the largest drift.
    pub worst: AuditPoint,
    /// Points whose drift exceeds the tolerance.
    pub positive_points: usize,
    pub passed: bool,
}

fn snap(p: f64) -> f64 {
    if (p - p.round()).abs() < 1e-8 {
        p.round()
    } else {
        p
    }
}

struct Corrected {
    v: VFunction,
    kind: Correction,
    q: f64,
    big_c: f64,
    big_r: f64,
}

impl Corrected {
    fn new(cfg: &AuditConfig) -> Result<Self> {
        Ok(Self {
            v: VFunction::new(snap(cfg.p1))?,
            kind: cfg.correction(),
            q: cfg.p1 - cfg.delta,
            big_c: cfg.big_c,
            big_r: cfg.big_r,
        })
    }

    fn eval(&self, x: f64, t: f64) -> f64 {
        let r = self.big_r;
        let raw = match self.kind {
            Correction::H => self.v.clipped(x + r, t) - self.big_c * (x + r).abs().powf(self.q),
            Correction::G => self.v.clipped(x + r, t + r) - self.big_c * (t + r).powf(0.5 * self.q),
        };
        raw.max(0.0)
    }

    // Below this step the next value is zero.
    fn lower(&self, x: f64, t1: f64) -> f64 {
        let t = match self.kind {
            Correction::H => t1,
            Correction::G => t1 + self.big_r,
        };
        self.v.c() * t.sqrt() - x - self.big_r
    }

    fn drift(&self, dist: &IncrementDistribution, x: f64, t: f64) -> Result<(f64, f64)> {
        let lower = self.lower(x, t + 1.0);
        let e = expect_step(dist, |u| self.eval(x + u, t + 1.0), lower, self.v.p(), &[lower])?;
        let here = self.eval(x, t);
        let rounding = 1e-14 * (e.value.abs() + here.abs());
        Ok((e.value - here, e.abs_err + rounding))
    }
}

/// Maximum one-step drift of `h` or `g` over `sample_points`.
///
/// A point passes when its drift is at most `tolerance` plus the
/// quadrature error estimate (zero for finite laws).
pub fn audit_supermartingale(
    cfg: &AuditConfig,
    dist: &IncrementDistribution,
    sample_points: &[(f64, f64)],
) -> Result<AuditReport> {
    cfg.validate()?;
    dist.validate()?;
    if !dist.has_moment(cfg.p1) {
        return Err(Error::Distribution(format!("{} lacks the moment of order p1={}", dist.name(), cfg.p1)));
    }
    if sample_points.is_empty() {
        return Err(Error::Invalid("no sample points".into()));
    }
    let c1 = exponent::c_of_p(cfg.p1, exponent::DEFAULT_TOL)?.value;
    for &(x, t) in sample_points {
        let edge = (c1 + cfg.gamma) * t.max(0.0).sqrt();
        if !(t >= 0.0) || !x.is_finite() || x < edge - 1e-12 * (1.0 + edge.abs()) {
            return Err(Error::Domain(format!(
                "point (x={x}, t={t}) lies outside the region x >= (c(p1) + gamma) sqrt t = {edge}"
            )));
        }
    }
    let f = Corrected::new(cfg)?;
    let mut worst = AuditPoint {
        x: f64::NAN,
        t: f64::NAN,
        drift: f64::NEG_INFINITY,
        tolerance: cfg.tolerance,
    };
    let mut positive = 0;
    for &(x, t) in sample_points {
        let (d, err) = f.drift(dist, x, t)?;
        let tol = cfg.tolerance + err;
        if d > tol {
            positive += 1;
        }
        if d > worst.drift {
            worst = AuditPoint {
                x,
                t,
                drift: d,
                tolerance: tol,
            };
        }
    }
    Ok(AuditReport {
        config: *cfg,
        correction: f.kind,
        points: sample_points.len(),
        max_drift: worst.drift,
        worst,
        positive_points: positive,
        passed: positive == 0,
    })
}

pub const SEARCH_CAP_LOG2: u32 = 20;

/// First `(C, R) = (2^k, 2^m)` in lexicographic order of `(k, m)`, with
/// `k, m <= 20`, whose audit passes on the canonical region.
pub fn search_correction_constants(
    c: f64,
    p1: f64,
    delta: f64,
    gamma: f64,
    dist: &IncrementDistribution,
) -> Result<AuditReport> {
    let mut cfg = AuditConfig::canonical(c, p1, 1.0, 1.0)?;
    cfg.delta = delta;
    cfg.gamma = gamma;
    cfg.validate()?;
    for k in 0..=SEARCH_CAP_LOG2 {
        for m in 0..=SEARCH_CAP_LOG2 {
            cfg.big_c = 2f64.powi(k as i32);
            cfg.big_r = 2f64.powi(m as i32);
            let region = canonical_region(&cfg)?;
            let rep = audit_supermartingale(&cfg, dist, &region)?;
            if rep.passed {
                return Ok(rep);
            }
        }
    }
    Err(Error::SearchExhausted(format!(
        "no (C, R) up to 2^{SEARCH_CAP_LOG2} passes for c={c}, p1={p1}, delta={delta}, gamma={gamma}"
    )))
}
