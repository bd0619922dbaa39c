//! Boundaries `g(t) = c sqrt(t + b) - a`, step laws, path simulation and an
//! exact dynamic-programming oracle for finitely supported steps.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The killing boundary. The walk `a + S(n)` dies at the first `n >= 1`
/// with `a + S(n) <= c sqrt(n + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

impl Boundary {
    pub fn new(c: f64, a: f64, b: f64) -> Result<Self> {
        if !(c.is_finite() && a.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite(format!("boundary (c={c}, a={a}, b={b})")));
        }
        if b < 0.0 {
            return Err(Error::Invalid(format!("time shift b must be >= 0, got {b}")));
        }
        let bound = c * b.sqrt();
        if a <= bound {
            return Err(Error::Boundary { c, a, b, bound });
        }
        Ok(Self { c, a, b })
    }

    /// Level the walk position `a + S(n)` must stay above at step `n`.
    #[inline]
    pub fn level(&self, n: u64) -> f64 {
        self.c * (n as f64 + self.b).sqrt()
    }
}

/// `g_{a,b}(t) = c sqrt(t + b) - a`.
pub fn boundary_value(bd: &Boundary, t: u64) -> f64 {
    bd.c * (t as f64 + bd.b).sqrt() - bd.a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    #[serde(alias = "probability")]
    pub prob: f64,
}

/// Mean-zero, unit-variance step laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IncrementDistribution {
    Gaussian,
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    Uniform,
    /// `eps * sigma * Z` with a random sign `eps`, `Z` Pareto(beta) on `[1, inf)`
    /// and `sigma = sqrt((beta - 2) / beta)`.
    SymPareto { beta: f64 },
    FiniteDiscrete { atoms: Vec<Atom> },
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

impl IncrementDistribution {
    pub fn sym_pareto(beta: f64) -> Result<Self> {
        let d = Self::SymPareto { beta };
        d.validate()?;
        Ok(d)
    }

    /// Builds a finite law, normalising probabilities that sum to one up to
    /// rounding and rejecting anything that is not mean-zero, unit-variance.
    pub fn finite_discrete(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Distribution("no atoms".into()));
        }
        for a in &atoms {
            if !a.value.is_finite() || !a.prob.is_finite() || a.prob < 0.0 {
                return Err(Error::Distribution(format!("bad atom {a:?}")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.prob).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Distribution(format!("probabilities sum to {total}")));
        }
        let mut merged: Vec<Atom> = Vec::new();
        for a in atoms.into_iter().filter(|a| a.prob > 0.0) {
            match merged.iter_mut().find(|m| m.value == a.value) {
                Some(m) => m.prob += a.prob,
                None => merged.push(Atom {
                    value: a.value,
                    prob: a.prob,
                }),
            }
        }
        for m in &mut merged {
            m.prob /= total;
        }
        merged.sort_by(|x, y| x.value.total_cmp(&y.value));
        let d = Self::FiniteDiscrete { atoms: merged };
        d.validate()?;
        Ok(d)
    }

    /// Parses a JSON array of `{"value": .., "prob": ..}`.
    pub fn from_atoms_json(text: &str) -> Result<Self> {
        let atoms: Vec<Atom> = serde_json::from_str(text)?;
        Self::finite_discrete(atoms)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::SymPareto { beta } => {
                if !(beta.is_finite() && *beta > 2.0) {
                    return Err(Error::Distribution(format!(
                        "sym_pareto needs beta > 2, got {beta}"
                    )));
                }
            }
            Self::FiniteDiscrete { atoms } => {
                let mean: f64 = atoms.iter().map(|a| a.prob * a.value).sum();
                let var: f64 = atoms.iter().map(|a| a.prob * a.value * a.value).sum();
                if mean.abs() > 1e-12 || (var - 1.0).abs() > 1e-12 {
                    return Err(Error::Distribution(format!(
                        "atoms must have mean 0 and variance 1, got mean {mean:e}, variance {var}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Rademacher => "rademacher",
            Self::Uniform => "uniform",
            Self::SymPareto { .. } => "sym_pareto",
            Self::FiniteDiscrete { .. } => "finite_discrete",
        }
    }

    /// Support points of a finitely supported law.
    pub fn atoms(&self) -> Option<Vec<Atom>> {
        match self {
            Self::Rademacher => Some(vec![
                Atom {
                    value: -1.0,
                    prob: 0.5,
                },
                Atom {
                    value: 1.0,
                    prob: 0.5,
                },
            ]),
            Self::FiniteDiscrete { atoms } => Some(atoms.clone()),
            _ => None,
        }
    }

    /// Density of a continuous law.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            Self::Gaussian => Some((-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()),
            Self::Uniform => Some(if x.abs() <= SQRT3 { 0.5 / SQRT3 } else { 0.0 }),
            Self::SymPareto { beta } => {
                let sigma = ((beta - 2.0) / beta).sqrt();
                let z = x.abs() / sigma;
                Some(if z < 1.0 {
                    0.0
                } else {
                    0.5 * beta * z.powf(-beta - 1.0) / sigma
                })
            }
            _ => None,
        }
    }

    /// Support of a continuous law as an interval, possibly unbounded.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Uniform => (-SQRT3, SQRT3),
            Self::Rademacher => (-1.0, 1.0),
            Self::FiniteDiscrete { atoms } => (atoms[0].value, atoms[atoms.len() - 1].value),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Constant in `P(X > t) = theta0 t^{-beta}` for `sym_pareto`.
    pub fn theta0(&self) -> Option<f64> {
        match self {
            Self::SymPareto { beta } => {
                let sigma = ((beta - 2.0) / beta).sqrt();
                Some(0.5 * sigma.powf(*beta))
            }
            _ => None,
        }
    }

    /// Whether `E|X|^r` is finite.
    pub fn has_moment(&self, r: f64) -> bool {
        match self {
            Self::SymPareto { beta } => r < *beta,
            _ => true,
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian => rng.sample(StandardNormal),
            Self::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::Uniform => SQRT3 * (2.0 * rng.random::<f64>() - 1.0),
            Self::SymPareto { beta } => {
                let sigma = ((beta - 2.0) / beta).sqrt();
                let u: f64 = 1.0 - rng.random::<f64>();
                let z = u.powf(-1.0 / beta);
                if rng.random::<bool>() {
                    sigma * z
                } else {
                    -sigma * z
                }
            }
            Self::FiniteDiscrete { atoms } => {
                let mut u: f64 = rng.random();
                for a in atoms {
                    if u < a.prob {
                        return a.value;
                    }
                    u -= a.prob;
                }
                atoms[atoms.len() - 1].value
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathOutcome {
    pub survived: bool,
    pub stopping_time: Option<u64>,
    /// `a + S` at the exit step or at the horizon.
    pub terminal_position: f64,
}

/// Runs a path from explicit steps; the horizon is `steps.len()`.
pub fn run_steps(bd: &Boundary, steps: &[f64]) -> PathOutcome {
    let mut x = bd.a;
    for (i, s) in steps.iter().enumerate() {
        x += s;
        let n = i as u64 + 1;
        if x <= bd.level(n) {
            return PathOutcome {
                survived: false,
                stopping_time: Some(n),
                terminal_position: x,
            };
        }
    }
    PathOutcome {
        survived: true,
        stopping_time: None,
        terminal_position: x,
    }
}

/// Simulates one path until it is killed or reaches `horizon`.
pub fn run_to_horizon<R: Rng + ?Sized>(
    bd: &Boundary,
    dist: &IncrementDistribution,
    horizon: u64,
    rng: &mut R,
) -> PathOutcome {
    let mut x = bd.a;
    for n in 1..=horizon {
        x += dist.sample(rng);
        if x <= bd.level(n) {
            return PathOutcome {
                survived: false,
                stopping_time: Some(n),
                terminal_position: x,
            };
        }
    }
    PathOutcome {
        survived: true,
        stopping_time: None,
        terminal_position: x,
    }
}

pub const STATE_CAP: u64 = 1 << 26;

/// Sub-probability law of `a + S(n)` on `{T > n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalMeasure {
    pub n: u64,
    /// `(position, mass)`, sorted by position.
    pub support: Vec<(f64, f64)>,
}

impl SurvivalMeasure {
    pub fn mass(&self) -> f64 {
        self.support.iter().map(|&(_, m)| m).sum()
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.support.iter().map(|&(x, m)| m * f(x)).sum()
    }
}

// Returns a span h and integer multipliers when all atoms lie on h * Z.
fn lattice_span(atoms: &[Atom]) -> Option<(f64, Vec<i64>)> {
    let base = atoms
        .iter()
        .map(|a| a.value.abs())
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !base.is_finite() {
        return None;
    }
    for k in 1..=64 {
        let h = base / k as f64;
        let ks: Vec<i64> = atoms.iter().map(|a| (a.value / h).round() as i64).collect();
        let exact = atoms
            .iter()
            .zip(&ks)
            .all(|(a, &m)| (a.value - m as f64 * h).abs() <= 1e-12 * base);
        if exact {
            return Some((h, ks));
        }
    }
    None
}

/// Exact laws of the surviving walk for `n = 1..=horizon`.
pub fn survival_measures(
    bd: &Boundary,
    dist: &IncrementDistribution,
    horizon: u64,
) -> Result<Vec<SurvivalMeasure>> {
    let atoms = dist.atoms().ok_or_else(|| {
        Error::Distribution(format!("{} has no finite support", dist.name()))
    })?;
    match lattice_span(&atoms) {
        Some((h, ks)) => Ok(lattice_dp(bd, &atoms, h, &ks, horizon)),
        None => composition_dp(bd, &atoms, horizon),
    }
}

fn lattice_dp(bd: &Boundary, atoms: &[Atom], h: f64, ks: &[i64], horizon: u64) -> Vec<SurvivalMeasure> {
    let kmin = *ks.iter().min().unwrap();
    let kmax = *ks.iter().max().unwrap();
    // Position a + j h with j in [lo, hi].
    let (mut lo, mut hi) = (0i64, 0i64);
    let mut mass = vec![1.0f64];
    let mut out = Vec::with_capacity(horizon as usize);
    for n in 1..=horizon {
        let (nlo, nhi) = (lo + kmin, hi + kmax);
        let mut next = vec![0.0f64; (nhi - nlo + 1) as usize];
        for (i, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let j = lo + i as i64;
            for (a, &k) in atoms.iter().zip(ks) {
                next[(j + k - nlo) as usize] += m * a.prob;
            }
        }
        let level = bd.level(n);
        let mut support = Vec::new();
        for (i, m) in next.iter_mut().enumerate() {
            let x = bd.a + (nlo + i as i64) as f64 * h;
            if x <= level {
                *m = 0.0;
            } else if *m > 0.0 {
                support.push((x, *m));
            }
        }
        out.push(SurvivalMeasure { n, support });
        lo = nlo;
        hi = nhi;
        mass = next;
    }
    out
}

fn composition_dp(bd: &Boundary, atoms: &[Atom], horizon: u64) -> Result<Vec<SurvivalMeasure>> {
    let mut states: HashMap<Vec<u32>, f64> = HashMap::new();
    states.insert(vec![0; atoms.len()], 1.0);
    let mut out = Vec::with_capacity(horizon as usize);
    for n in 1..=horizon {
        let mut next: HashMap<Vec<u32>, f64> = HashMap::with_capacity(states.len() * atoms.len());
        for (key, m) in &states {
            for (i, a) in atoms.iter().enumerate() {
                let mut k = key.clone();
                k[i] += 1;
                *next.entry(k).or_insert(0.0) += m * a.prob;
            }
        }
        if next.len() as u64 > STATE_CAP {
            return Err(Error::StateSpace {
                states: next.len() as u64,
                cap: STATE_CAP,
            });
        }
        let level = bd.level(n);
        let position = |k: &[u32]| {
            bd.a + k
                .iter()
                .zip(atoms)
                .map(|(&c, a)| c as f64 * a.value)
                .sum::<f64>()
        };
        next.retain(|k, _| position(k) > level);
        let mut support: Vec<(f64, f64)> = next.iter().map(|(k, &m)| (position(k), m)).collect();
        support.sort_by(|x, y| x.0.total_cmp(&y.0));
        out.push(SurvivalMeasure { n, support });
        states = next;
    }
    Ok(out)
}

/// `P(T > n)` for `n = 1..=horizon`, exactly.
pub fn enumerate_survival(
    bd: &Boundary,
    dist: &IncrementDistribution,
    horizon: u64,
) -> Result<Vec<f64>> {
    Ok(survival_measures(bd, dist, horizon)?
        .iter()
        .map(SurvivalMeasure::mass)
        .collect())
}
