//! Two estimators of `W(a, b)`.
//!
//! Direct: `W_n = E[V(a + S(n), b + n); T > n]` on a doubling grid of `n`
//! until successive values agree. Decomposition: since
//! `Vbar(a + S(n), b + n) - sum_{k < n} f_k` is a martingale and `Vbar`
//! vanishes once the walk is killed, `W_n = V(a, b) + E[sum_{k < T ^ n} f_k]`.

use serde::{Deserialize, Serialize};

use super::{v_for_slope, Drift, Moments, WEstimate, WMethod};
use crate::error::{Error, Result};
use crate::mc::{replicate, SeedSpec};
use crate::walk::{Boundary, IncrementDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectConfig {
    pub trials: u64,
    pub n_start: u64,
    pub n_cap: u64,
    /// Relative plateau tolerance.
    pub plateau_tol: f64,
}

impl Default for DirectConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            n_start: 16,
            n_cap: 1 << 14,
            plateau_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompConfig {
    pub trials: u64,
    /// Path cap; `None` means `100 (1 + a^2)` limited to `DECOMP_CAP`.
    pub n_max: Option<u64>,
}

impl Default for DecompConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            n_max: None,
        }
    }
}

pub const DECOMP_CAP: u64 = 1 << 16;

fn check_trials(trials: u64) -> Result<()> {
    if trials < 2 {
        return Err(Error::Invalid("at least 2 trials are needed for a standard error".into()));
    }
    Ok(())
}

/// Direct-limit estimate of `W(a, b)`.
///
/// Checkpoints are `n_start * 2^j <= n_cap`. The first pair of successive
/// checkpoints whose estimates differ by at most
/// `max(plateau_tol |W|, 2 se(diff))` fixes the answer; `se(diff)` comes
/// from the per-path differences, so the strong correlation between
/// horizons is accounted for. Horizons grow fourfold per pass and every
/// pass replays the same paths.
pub fn estimate_w_direct(
    bd: &Boundary,
    dist: &IncrementDistribution,
    cfg: &DirectConfig,
    seed: SeedSpec,
) -> Result<WEstimate> {
    dist.validate()?;
    let v = v_for_slope(bd.c)?;
    if !dist.has_moment(v.p()) {
        return Err(Error::Distribution(format!(
            "{} lacks the moment of order p(c)={:.6}",
            dist.name(),
            v.p()
        )));
    }
    let exact = |n_used| WEstimate {
        a: bd.a,
        b: bd.b,
        value: v.v(bd.a, bd.b),
        stderr: 0.0,
        method: WMethod::DirectLimit,
        n_used,
        converged: true,
        alive_fraction: 1.0,
        warnings: vec![],
    };
    if cfg.n_cap == 0 {
        return Ok(exact(0));
    }
    check_trials(cfg.trials)?;
    if cfg.n_start == 0 || cfg.n_start > cfg.n_cap || !(cfg.plateau_tol >= 0.0) {
        return Err(Error::Invalid(format!(
            "need 0 < n_start <= n_cap and plateau_tol >= 0, got {cfg:?}"
        )));
    }
    let mut cps = vec![cfg.n_start];
    while cps.last().unwrap() * 2 <= cfg.n_cap {
        cps.push(cps.last().unwrap() * 2);
    }

    let mut top = 2.min(cps.len() - 1);
    loop {
        let m = top + 1;
        let horizon = cps[top];
        let cps_now = &cps[..m];
        // layout: [sum v_j | sum v_j^2 | sum (v_{j+1} - v_j)^2 | alive_j]
        let parts = replicate(
            cfg.trials,
            seed,
            || vec![0.0f64; 4 * m],
            |acc, rng, _| {
                let mut vals = [0.0f64; 64];
                let mut x = bd.a;
                let mut j = 0;
                for n in 1..=horizon {
                    x += dist.sample(rng);
                    if x <= bd.level(n) {
                        break;
                    }
                    if n == cps_now[j] {
                        vals[j] = v.v(x, bd.b + n as f64);
                        acc[3 * m + j] += 1.0;
                        j += 1;
                    }
                }
                for j in 0..m {
                    acc[j] += vals[j];
                    acc[m + j] += vals[j] * vals[j];
                    if j + 1 < m {
                        let d = vals[j + 1] - vals[j];
                        acc[2 * m + j] += d * d;
                    }
                }
            },
        );
        let mut tot = vec![0.0f64; 4 * m];
        for p in parts {
            for (t, v) in tot.iter_mut().zip(p) {
                *t += v;
            }
        }
        let nt = cfg.trials as f64;
        let mean = |j: usize| tot[j] / nt;
        let se_of = |s: f64, s2: f64| {
            let mu = s / nt;
            (((s2 - nt * mu * mu) / (nt - 1.0)).max(0.0) / nt).sqrt()
        };
        let se = |j: usize| se_of(tot[j], tot[m + j]);
        for j in 0..top {
            let diff = mean(j + 1) - mean(j);
            let se_diff = se_of(tot[j + 1] - tot[j], tot[2 * m + j]);
            if diff.abs() <= (cfg.plateau_tol * mean(j + 1).abs()).max(2.0 * se_diff) {
                return Ok(WEstimate {
                    a: bd.a,
                    b: bd.b,
                    value: mean(j + 1),
                    stderr: se(j + 1),
                    method: WMethod::DirectLimit,
                    n_used: cps[j + 1],
                    converged: true,
                    alive_fraction: tot[3 * m + j + 1] / nt,
                    warnings: vec![],
                });
            }
        }
        if top + 1 == cps.len() {
            return Ok(WEstimate {
                a: bd.a,
                b: bd.b,
                value: mean(top),
                stderr: se(top),
                method: WMethod::DirectLimit,
                n_used: cps[top],
                converged: false,
                alive_fraction: tot[3 * m + top] / nt,
                warnings: vec![format!("plateau not reached by n_cap={}", cfg.n_cap)],
            });
        }
        top = (top + 2).min(cps.len() - 1);
    }
}

/// Path cap used by the decomposition estimator.
pub fn default_n_max(a: f64) -> u64 {
    let n = 100.0 * (1.0 + a * a);
    if n >= DECOMP_CAP as f64 {
        DECOMP_CAP
    } else {
        n.ceil() as u64
    }
}

/// Drift-decomposition estimate of `W(a, b)`: `V(a, b)` plus the mean of
/// the drift summed along each path up to death or the cap. A capped path
/// keeps its partial sum; more than 1% capped paths marks the estimate
/// as not converged.
pub fn estimate_w_decomp(
    bd: &Boundary,
    dist: &IncrementDistribution,
    cfg: &DecompConfig,
    seed: SeedSpec,
) -> Result<WEstimate> {
    check_trials(cfg.trials)?;
    let drift = Drift::new(bd.c, dist)?;
    let n_max = cfg.n_max.unwrap_or_else(|| default_n_max(bd.a));
    if n_max == 0 {
        return Err(Error::Invalid("n_max must be at least 1".into()));
    }
    // f at the start point is shared by every path.
    let f0 = drift.eval(bd.a, bd.b)?.value;
    let parts = replicate(
        cfg.trials,
        seed,
        || (Moments::default(), 0u64),
        |acc, rng, _| {
            let mut sum = f0;
            let mut x = bd.a + dist.sample(rng);
            let mut alive = x > bd.level(1);
            let mut k = 1;
            while alive && k < n_max {
                sum += drift.fast(x, bd.b + k as f64);
                x += dist.sample(rng);
                k += 1;
                alive = x > bd.level(k);
            }
            acc.0.push(sum);
            if alive {
                acc.1 += 1;
            }
        },
    );
    let mut m = Moments::default();
    let mut capped = 0;
    for (pm, pc) in parts {
        m.merge(&pm);
        capped += pc;
    }
    let value = drift.v().v(bd.a, bd.b) + m.mean();
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("decomposition estimate at ({}, {})", bd.a, bd.b)));
    }
    let frac = capped as f64 / cfg.trials as f64;
    let converged = frac <= 0.01;
    let warnings = if converged {
        vec![]
    } else {
        vec![format!(
            "{:.2}% of paths reached n_max={n_max}; estimate is biased low in the tail",
            100.0 * frac
        )]
    };
    Ok(WEstimate {
        a: bd.a,
        b: bd.b,
        value,
        stderr: m.stderr(),
        method: WMethod::DriftDecomposition,
        n_used: n_max,
        converged,
        alive_fraction: frac,
        warnings,
    })
}
