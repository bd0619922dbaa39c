//! `kappa(c)` from `P(T > n) ~ kappa W(a, b) n^{-p(c)/2}`.

use serde::{Deserialize, Serialize};

use super::{estimate_w_decomp, v_for_slope, DecompConfig, WEstimate};
use crate::error::{Error, Result};
use crate::mc::{estimate_survival, SeedSpec, MIN_SURVIVORS};
use crate::walk::{Boundary, IncrementDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaConfig {
    pub n_grid: Vec<u64>,
    pub trials: u64,
    /// Settings for `W(a, b)`. The decomposition estimator is used because
    /// its variance is far smaller, which lets the horizon be long enough
    /// for the slow `N^{-p/2}` approach of `W_N` to `W`.
    pub w: DecompConfig,
}

impl Default for KappaConfig {
    fn default() -> Self {
        Self {
            n_grid: crate::mc::geometric_grid(64, 1 << 14, 2),
            trials: 1_000_000,
            w: DecompConfig {
                trials: 20_000,
                n_max: Some(1 << 14),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaPoint {
    pub n: u64,
    pub survivors: u64,
    pub kappa: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub c: f64,
    pub value: f64,
    pub stderr: f64,
    pub n_grid: Vec<u64>,
    /// False when the top half-decade still shows a trend in `n`.
    pub converged: bool,
    /// Weighted slope of `kappa(n)` against `ln n` over the averaged points.
    pub trend_slope: f64,
    pub trend_stderr: f64,
    /// Points that entered the average.
    pub n_averaged: Vec<u64>,
    pub w: WEstimate,
    pub points: Vec<KappaPoint>,
}

/// Estimates `kappa(c)` at `(a, b)`.
///
/// `kappa(n) = p_hat(n) n^{p/2} / W` is averaged over the top half-decade
/// of usable grid points (at least 100 survivors). The points come from
/// nested paths and are strongly correlated, so the reported error is the
/// mean point error, combined with the relative error of `W`.
pub fn estimate_kappa(
    bd: &Boundary,
    dist: &IncrementDistribution,
    cfg: &KappaConfig,
    seed: SeedSpec,
) -> Result<KappaEstimate> {
    let p = v_for_slope(bd.c)?.p();
    let curve = estimate_survival(bd, dist, &cfg.n_grid, cfg.trials, seed)?;
    let w = estimate_w_decomp(bd, dist, &cfg.w, seed.derive(7))?;
    if !(w.value > 0.0) {
        return Err(Error::NonFinite(format!("W estimate {} is not positive", w.value)));
    }
    let points: Vec<KappaPoint> = curve
        .iter()
        .filter(|e| e.survivors >= MIN_SURVIVORS)
        .map(|e| {
            let scale = (e.n as f64).powf(0.5 * p) / w.value;
            KappaPoint {
                n: e.n,
                survivors: e.survivors,
                kappa: e.p_hat * scale,
                stderr: e.stderr * scale,
            }
        })
        .collect();
    let n_top = match points.last() {
        Some(pt) => pt.n as f64,
        None => {
            return Err(Error::Invalid(format!(
                "no grid point has {MIN_SURVIVORS} survivors; raise trials or lower the grid"
            )))
        }
    };
    let top: Vec<&KappaPoint> = points
        .iter()
        .filter(|pt| pt.n as f64 >= n_top / 10f64.sqrt())
        .collect();
    let k = top.len() as f64;
    let value = top.iter().map(|pt| pt.kappa).sum::<f64>() / k;
    let se_pt = top.iter().map(|pt| pt.stderr).sum::<f64>() / k;
    let rel_w = w.stderr / w.value;
    let stderr = value * ((se_pt / value).powi(2) + rel_w * rel_w).sqrt();

    let (mut trend_slope, mut trend_stderr, mut converged) = (0.0, f64::INFINITY, true);
    if top.len() >= 3 {
        let ws: Vec<f64> = top.iter().map(|pt| 1.0 / (pt.stderr * pt.stderr).max(1e-300)).collect();
        let xs: Vec<f64> = top.iter().map(|pt| (pt.n as f64).ln()).collect();
        let sw: f64 = ws.iter().sum();
        let xm = ws.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
        let ym = ws.iter().zip(&top).map(|(w, pt)| w * pt.kappa).sum::<f64>() / sw;
        let sxx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * (x - xm).powi(2)).sum();
        let sxy: f64 = (0..xs.len()).map(|i| ws[i] * (xs[i] - xm) * (top[i].kappa - ym)).sum();
        trend_slope = sxy / sxx;
        trend_stderr = (1.0 / sxx).sqrt();
        converged = trend_slope.abs() <= 3.0 * trend_stderr;
    }
    Ok(KappaEstimate {
        c: bd.c,
        value,
        stderr,
        n_grid: cfg.n_grid.clone(),
        converged,
        trend_slope,
        trend_stderr,
        n_averaged: top.iter().map(|pt| pt.n).collect(),
        w,
        points,
    })
}
