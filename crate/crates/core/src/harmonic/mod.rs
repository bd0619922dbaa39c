//! The space-time harmonic function `W(a, b)`, the one-step drift of the
//! clipped `V`, supermartingale audits and the tail constant `kappa(c)`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exponent;
use crate::special_fn::VFunction;

pub mod audit;
pub mod drift;
pub mod harmonicity;
pub mod kappa;
pub mod w;

pub use audit::{
    audit_supermartingale, canonical_gamma, canonical_region, search_correction_constants, AuditConfig,
    AuditPoint, AuditReport, Correction,
};
pub use drift::{drift_f, expect_step, Drift, DriftValue};
pub use harmonicity::{verify_harmonicity, HarmonicityConfig, HarmonicityReport};
pub use kappa::{estimate_kappa, KappaConfig, KappaEstimate, KappaPoint};
pub use w::{estimate_w_decomp, estimate_w_direct, DecompConfig, DirectConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WMethod {
    DirectLimit,
    DriftDecomposition,
}

impl WMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            WMethod::DirectLimit => "direct_limit",
            WMethod::DriftDecomposition => "drift_decomposition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WEstimate {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub stderr: f64,
    pub method: WMethod,
    /// Plateau horizon (direct) or path cap (decomposition).
    pub n_used: u64,
    /// Direct: plateau test passed. Decomposition: at most 1% of paths capped.
    pub converged: bool,
    /// Fraction of paths still alive at `n_used`.
    pub alive_fraction: f64,
    pub warnings: Vec<String>,
}

/// `V_{p(c)}` for a boundary slope `c`. Exponents within `1e-8` of an
/// integer are snapped to it, so that e.g. `c = 1` gives `x^2 - t` exactly.
pub fn v_for_slope(c: f64) -> Result<VFunction> {
    let p = exponent::p_of_c(c, exponent::DEFAULT_TOL)?.value;
    let p = if (p - p.round()).abs() < 1e-8 { p.round() } else { p };
    VFunction::new(p)
}

// Running mean and variance of independent per-path values.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.sum / n;
        let var = ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}
