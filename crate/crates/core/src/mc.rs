//! Reproducible parallel Monte Carlo for survival curves, local
//! probabilities and power-law tail fits.
//!
//! Replica `r` always draws from ChaCha stream `(master_seed, base + r)`.
//! Replicas are grouped into fixed blocks, blocks are processed in any
//! order by the thread pool, and block results are merged in block order.
//! Outputs therefore do not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::{run_to_horizon, Boundary, IncrementDistribution};

pub const BLOCK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_base: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            stream_base: 0,
        }
    }

    pub fn with_base(self, stream_base: u64) -> Self {
        Self {
            stream_base,
            ..self
        }
    }

    /// Independent stream family for a sub-task, e.g. one node of a grid.
    pub fn derive(self, salt: u64) -> Self {
        Self {
            stream_base: self.stream_base.wrapping_add(salt.wrapping_mul(1 << 40)),
            ..self
        }
    }

    fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        let mut z = self.master_seed;
        // splitmix64 expansion of the master seed into a 256-bit key
        for chunk in key.chunks_mut(8) {
            z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut x = z;
            x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            x ^= x >> 31;
            chunk.copy_from_slice(&x.to_le_bytes());
        }
        key
    }

    pub fn stream(&self, replica: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key());
        rng.set_stream(self.stream_base.wrapping_add(replica));
        rng
    }
}

/// Runs `f(rng, replica)` for every replica and returns per-block partial
/// results in block order. `fold` accumulates one replica into a block.
pub fn replicate<T, I, F>(trials: u64, seed: SeedSpec, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, &mut ChaCha8Rng, u64) + Sync,
{
    let key = seed.key();
    let blocks = trials.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut acc = init();
            let mut rng = ChaCha8Rng::from_seed(key);
            for r in blk * BLOCK..((blk + 1) * BLOCK).min(trials) {
                rng.set_stream(seed.stream_base.wrapping_add(r));
                rng.set_word_pos(0);
                f(&mut acc, &mut rng, r);
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub n: u64,
    pub survivors: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub stderr: f64,
}

impl SurvivalEstimate {
    pub fn from_counts(n: u64, survivors: u64, trials: u64) -> Self {
        let p_hat = survivors as f64 / trials as f64;
        Self {
            n,
            survivors,
            trials,
            p_hat,
            stderr: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
        }
    }
}

fn check_horizons(horizons: &[u64]) -> Result<()> {
    if horizons.is_empty() {
        return Err(Error::Invalid("horizons must be non-empty".into()));
    }
    if horizons[0] == 0 || horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(
            "horizons must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// `P(T > n)` at every checkpoint `n` from one pass per path.
///
/// Each path is run to the last checkpoint (or death) and only the number
/// of checkpoints it outlived is kept, so the curve is exactly nested.
pub fn estimate_survival(
    bd: &Boundary,
    dist: &IncrementDistribution,
    horizons: &[u64],
    trials: u64,
    seed: SeedSpec,
) -> Result<Vec<SurvivalEstimate>> {
    check_horizons(horizons)?;
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    dist.validate()?;
    let h_max = *horizons.last().unwrap();
    let m = horizons.len();
    let parts = replicate(
        trials,
        seed,
        || vec![0u64; m + 1],
        |acc, rng, _| {
            let out = run_to_horizon(bd, dist, h_max, rng);
            let k = match out.stopping_time {
                Some(t) => horizons.partition_point(|&h| h < t),
                None => m,
            };
            acc[k] += 1;
        },
    );
    let mut outlived = vec![0u64; m + 1];
    for p in parts {
        for (o, v) in outlived.iter_mut().zip(p) {
            *o += v;
        }
    }
    let mut out = Vec::with_capacity(m);
    let mut alive: u64 = outlived[1..].iter().sum();
    for (i, &n) in horizons.iter().enumerate() {
        out.push(SurvivalEstimate::from_counts(n, alive, trials));
        alive -= outlived[i + 1];
    }
    Ok(out)
}

/// `n_lo * 2^{k/per_octave}` rounded, deduplicated, up to `n_hi`.
pub fn geometric_grid(n_lo: u64, n_hi: u64, per_octave: u32) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let mut k = 0;
    loop {
        let n = (n_lo as f64 * 2f64.powf(k as f64 / per_octave as f64)).round() as u64;
        if n > n_hi {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
        k += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub n_range: (u64, u64),
    pub points: usize,
}

/// Survivors needed before a point enters the log-log fit.
pub const MIN_SURVIVORS: u64 = 100;

/// Weighted least squares of `log p_hat` on `log n`.
///
/// Weights are `(p_hat / stderr)^2`. When every point has zero standard
/// error the fit is unweighted and the slope error comes from residuals.
pub fn fit_tail_exponent(curve: &[SurvivalEstimate], n_min: u64) -> Result<TailFit> {
    let pts: Vec<&SurvivalEstimate> = curve
        .iter()
        .filter(|e| e.n >= n_min && e.p_hat > 0.0 && e.survivors >= MIN_SURVIVORS)
        .collect();
    if pts.len() < 3 {
        return Err(Error::Invalid(format!(
            "tail fit needs 3 points with n >= {n_min} and >= {MIN_SURVIVORS} survivors, got {}",
            pts.len()
        )));
    }
    let exact = pts.iter().all(|e| e.stderr == 0.0);
    let w: Vec<f64> = pts
        .iter()
        .map(|e| {
            if exact {
                1.0
            } else {
                let rel = e.stderr / e.p_hat;
                1.0 / (rel * rel)
            }
        })
        .collect();
    let x: Vec<f64> = pts.iter().map(|e| (e.n as f64).ln()).collect();
    let y: Vec<f64> = pts.iter().map(|e| e.p_hat.ln()).collect();
    let sw: f64 = w.iter().sum();
    let xm = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * (x - xm) * (x - xm)).sum();
    let sxy: f64 = (0..x.len()).map(|i| w[i] * (x[i] - xm) * (y[i] - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let slope_stderr = if exact {
        let rss: f64 = (0..x.len())
            .map(|i| (y[i] - intercept - slope * x[i]).powi(2))
            .sum();
        (rss / (x.len() as f64 - 2.0) / sxx).sqrt()
    } else {
        (1.0 / sxx).sqrt()
    };
    Ok(TailFit {
        slope,
        intercept,
        slope_stderr,
        n_range: (pts[0].n, pts[pts.len() - 1].n),
        points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalProbEstimate {
    pub n: u64,
    pub bin_lo: f64,
    pub bin_width: f64,
    pub p_hat: f64,
    pub stderr: f64,
}

/// `P(a + S(n) in (lo, lo + width], T > n)` for each bin.
pub fn estimate_local_prob(
    bd: &Boundary,
    dist: &IncrementDistribution,
    n: u64,
    bins: &[(f64, f64)],
    trials: u64,
    seed: SeedSpec,
) -> Result<Vec<LocalProbEstimate>> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    for &(lo, w) in bins {
        if lo.is_nan() || w.is_nan() || w <= 0.0 {
            return Err(Error::Invalid(format!("bad bin ({lo}, width {w})")));
        }
    }
    let mut order: Vec<usize> = (0..bins.len()).collect();
    order.sort_by(|&i, &j| bins[i].0.total_cmp(&bins[j].0));
    for w in order.windows(2) {
        let (lo0, w0) = bins[w[0]];
        if lo0 + w0 > bins[w[1]].0 {
            return Err(Error::Invalid(format!(
                "bins ({lo0}, {}] and ({}, ..] overlap",
                lo0 + w0,
                bins[w[1]].0
            )));
        }
    }
    let parts = replicate(
        trials,
        seed,
        || vec![0u64; bins.len()],
        |acc, rng, _| {
            let out = run_to_horizon(bd, dist, n, rng);
            if out.survived {
                let x = out.terminal_position;
                if let Some(i) = bins.iter().position(|&(lo, w)| x > lo && x <= lo + w) {
                    acc[i] += 1;
                }
            }
        },
    );
    let mut counts = vec![0u64; bins.len()];
    for p in parts {
        for (c, v) in counts.iter_mut().zip(p) {
            *c += v;
        }
    }
    Ok(bins
        .iter()
        .zip(counts)
        .map(|(&(lo, w), k)| {
            let e = SurvivalEstimate::from_counts(n, k, trials);
            LocalProbEstimate {
                n,
                bin_lo: lo,
                bin_width: w,
                p_hat: e.p_hat,
                stderr: e.stderr,
            }
        })
        .collect())
}
