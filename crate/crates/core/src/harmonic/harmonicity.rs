//! Monte Carlo check of `W(a, b) = E[W(a + S(n), b + n); T > n]`.
//!
//! Both sides use the finite-horizon function `W_N`, for which the
//! identity `W_{N+n}(a, b) = E[W_N(a + S(n), b + n); T > n]` is exact. The
//! left side is simulated directly at horizon `N + n`. On the right the
//! law of the surviving walk after `n` steps is exact (finite laws) or
//! propagated on a fine grid (densities), and `W_N` is taken on nodes
//! spaced `spacing` apart and interpolated by local cubics. Every replica
//! drives all nodes with the same increments, so the weighted node sum
//! is one random variable per replica and its standard error is honest.

use serde::{Deserialize, Serialize};

use super::v_for_slope;
use crate::error::{Error, Result};
use crate::mc::{replicate, SeedSpec};
use crate::special_fn::VFunction;
use crate::walk::{survival_measures, Boundary, IncrementDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicityConfig {
    pub steps: u64,
    /// Horizon `N` of the finite-horizon `W_N` on the node side.
    pub horizon: u64,
    pub trials: u64,
    /// Node spacing of the interpolation grid for densities.
    pub spacing: f64,
    /// Multiplies the left side; 1 except in sensitivity controls.
    pub lhs_scale: f64,
}

impl Default for HarmonicityConfig {
    fn default() -> Self {
        Self {
            steps: 1,
            horizon: 256,
            trials: 100_000,
            spacing: 0.1,
            lhs_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicityReport {
    pub a: f64,
    pub b: f64,
    pub steps: u64,
    pub horizon: u64,
    pub trials: u64,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub discrepancy: f64,
    pub combined_stderr: f64,
    pub passed: bool,
    pub nodes: usize,
    /// Mean difference between cubic and linear interpolation on the right.
    pub interp_gap: f64,
}

// Running sums for one estimator.
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    s: f64,
    s2: f64,
    g: f64,
}

fn mean_se(s: f64, s2: f64, n: f64) -> (f64, f64) {
    let m = s / n;
    let var = ((s2 - n * m * m) / (n - 1.0)).max(0.0);
    (m, (var / n).sqrt())
}

/// Sum `S_N` of `horizon` increments and the level `M` such that a walk
/// started at `x` at time `t0` survives the horizon iff `x > M`.
fn replay<R: rand::Rng + ?Sized>(
    c: f64,
    t0: f64,
    horizon: u64,
    dist: &IncrementDistribution,
    rng: &mut R,
) -> (f64, f64) {
    let mut s = 0.0;
    let mut m = f64::NEG_INFINITY;
    for k in 1..=horizon {
        s += dist.sample(rng);
        m = m.max(c * (t0 + k as f64).sqrt() - s);
    }
    (s, m)
}

fn cdf(dist: &IncrementDistribution, u: f64) -> f64 {
    match dist {
        IncrementDistribution::Gaussian => 0.5 * libm::erfc(-u / std::f64::consts::SQRT_2),
        IncrementDistribution::Uniform => {
            let h = 3f64.sqrt();
            ((u + h) / (2.0 * h)).clamp(0.0, 1.0)
        }
        IncrementDistribution::SymPareto { beta } => {
            let sigma = ((beta - 2.0) / beta).sqrt();
            if u <= -sigma {
                0.5 * (sigma / -u).powf(*beta)
            } else if u < sigma {
                0.5
            } else {
                1.0 - 0.5 * (sigma / u).powf(*beta)
            }
        }
        _ => unreachable!("finite laws use exact survival measures"),
    }
}

/// Nodes and cubic / linear weights for the law of the surviving walk
/// after `n` steps of a continuous increment law.
fn density_nodes(
    bd: &Boundary,
    dist: &IncrementDistribution,
    n: u64,
    spacing: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let levels: Vec<f64> = (1..=n).map(|k| bd.level(k)).collect();
    let reach = match dist {
        IncrementDistribution::Uniform => 3f64.sqrt() * n as f64,
        IncrementDistribution::Gaussian => 9.0 * (n as f64).sqrt(),
        _ => 60.0 * (n as f64).sqrt(),
    };
    let lo_level = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = bd.a + reach;
    let span = hi - lo_level;
    let h = (span / 8000.0).max(0.002);
    let x0 = lo_level - h;
    let g = ((hi - x0) / h).ceil() as usize + 1;
    let xs: Vec<f64> = (0..g).map(|i| x0 + i as f64 * h).collect();
    // Cell-averaged kernel by offset, from the increment CDF.
    let kern: Vec<f64> = (0..2 * g - 1)
        .map(|d| {
            let off = (d as f64 - (g - 1) as f64) * h;
            (cdf(dist, off + 0.5 * h) - cdf(dist, off - 0.5 * h)) / h
        })
        .collect();
    let alive = |x: f64, level: f64| ((x + 0.5 * h - level) / h).clamp(0.0, 1.0);

    // Step 1 from the point mass at a.
    let mut mass: Vec<f64> = xs
        .iter()
        .map(|&x| (cdf(dist, x - bd.a + 0.5 * h) - cdf(dist, x - bd.a - 0.5 * h)) * alive(x, levels[0]))
        .collect();
    for level in &levels[1..] {
        let mut next = vec![0.0; g];
        for (l, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let base = g - 1 - l;
            for (i, q) in next.iter_mut().enumerate() {
                *q += m * kern[base + i];
            }
        }
        for (i, q) in next.iter_mut().enumerate() {
            *q *= h * alive(xs[i], *level);
        }
        mass = next;
    }

    let b_n = levels[n as usize - 1];
    let first = b_n + 1e-9;
    let count = ((hi - first) / spacing).ceil() as usize + 1;
    let count = count.max(4);
    let nodes: Vec<f64> = (0..count).map(|j| first + spacing * j as f64).collect();
    let mut cubic = vec![0.0; count];
    let mut linear = vec![0.0; count];
    for (&x, &m) in xs.iter().zip(&mass) {
        if m == 0.0 {
            continue;
        }
        let u = (x - first) / spacing;
        let j0 = (u.floor().max(0.0) as usize).min(count - 2);
        let s = j0.saturating_sub(1).min(count - 4);
        for k in 0..4 {
            let mut w = 1.0;
            for l in 0..4 {
                if l != k {
                    w *= (u - (s + l) as f64) / (k as f64 - l as f64);
                }
            }
            cubic[s + k] += m * w;
        }
        let f = u - j0 as f64;
        linear[j0] += m * (1.0 - f);
        linear[j0 + 1] += m * f;
    }
    (nodes, cubic, linear)
}

/// Checks the `steps`-step harmonicity identity at `(a, b)`.
pub fn verify_harmonicity(
    bd: &Boundary,
    dist: &IncrementDistribution,
    cfg: &HarmonicityConfig,
    seed: SeedSpec,
) -> Result<HarmonicityReport> {
    dist.validate()?;
    if cfg.steps == 0 || cfg.trials < 2 || !(cfg.spacing > 0.0) {
        return Err(Error::Invalid(format!("need steps >= 1, trials >= 2, spacing > 0: {cfg:?}")));
    }
    let v: VFunction = v_for_slope(bd.c)?;
    if !dist.has_moment(v.p()) {
        return Err(Error::Distribution(format!(
            "{} lacks the moment of order p(c)={:.6}",
            dist.name(),
            v.p()
        )));
    }
    let n = cfg.steps;
    let big_n = cfg.horizon;
    let (nodes, cubic, linear) = match dist.atoms() {
        Some(_) => {
            let meas = survival_measures(bd, dist, n)?;
            let last = &meas[n as usize - 1];
            let xs: Vec<f64> = last.support.iter().map(|&(x, _)| x).collect();
            let ws: Vec<f64> = last.support.iter().map(|&(_, m)| m).collect();
            (xs, ws.clone(), ws)
        }
        None => density_nodes(bd, dist, n, cfg.spacing),
    };

    let c = bd.c;
    let t_nodes = bd.b + n as f64;
    let t_end = t_nodes + big_n as f64;
    let rhs_parts = replicate(
        cfg.trials,
        seed,
        Acc::default,
        |acc, rng, _| {
            let (s, m) = replay(c, t_nodes, big_n, dist, rng);
            let start = nodes.partition_point(|&x| x <= m);
            let (mut z, mut zl) = (0.0, 0.0);
            for j in start..nodes.len() {
                let d = v.v(nodes[j] + s, t_end);
                z += cubic[j] * d;
                zl += linear[j] * d;
            }
            acc.s += z;
            acc.s2 += z * z;
            acc.g += z - zl;
        },
    );
    let lhs_parts = replicate(
        cfg.trials,
        seed.derive(1),
        Acc::default,
        |acc, rng, _| {
            let (s, m) = replay(c, bd.b, big_n + n, dist, rng);
            let l = if bd.a > m { v.v(bd.a + s, t_end) } else { 0.0 };
            acc.s += l;
            acc.s2 += l * l;
        },
    );
    let fold = |parts: Vec<Acc>| {
        parts.into_iter().fold(Acc::default(), |a, b| Acc {
            s: a.s + b.s,
            s2: a.s2 + b.s2,
            g: a.g + b.g,
        })
    };
    let nt = cfg.trials as f64;
    let r = fold(rhs_parts);
    let l = fold(lhs_parts);
    let (rhs, rhs_se) = mean_se(r.s, r.s2, nt);
    let (lhs, lhs_se) = mean_se(l.s, l.s2, nt);
    let lhs = cfg.lhs_scale * lhs;
    let lhs_se = cfg.lhs_scale.abs() * lhs_se;
    let combined = (rhs_se * rhs_se + lhs_se * lhs_se).sqrt();
    let gap = r.g / nt;
    if gap.abs() > 3.0 * combined {
        return Err(Error::Invalid(format!(
            "interpolation grid too coarse: cubic and linear differ by {gap:e}, \
             above 3 x combined stderr {combined:e}"
        )));
    }
    let discrepancy = lhs - rhs;
    Ok(HarmonicityReport {
        a: bd.a,
        b: bd.b,
        steps: n,
        horizon: big_n,
        trials: cfg.trials,
        lhs,
        lhs_stderr: lhs_se,
        rhs,
        rhs_stderr: rhs_se,
        discrepancy,
        combined_stderr: combined,
        passed: discrepancy.abs() <= 3.0 * combined,
        nodes: nodes.len(),
        interp_gap: gap,
    })
}
