//! One-step expectations `E[F(x + X)]` and the drift
//! `f(x, y) = E[Vbar(x + X, y + 1)] - Vbar(x, y)` of the clipped function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Integral, Tolerance};
use crate::special_fn::VFunction;
use crate::walk::IncrementDistribution;

const GAUSS_REACH: f64 = 40.0;

fn tol() -> Tolerance {
    Tolerance {
        abs: 1e-13,
        rel: 1e-10,
        max_depth: 40,
    }
}

fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, breaks: &[f64]) -> Result<Integral> {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi).collect();
    cuts.sort_by(f64::total_cmp);
    let mut total = Integral {
        value: 0.0,
        abs_err: 0.0,
        evals: 0,
    };
    let mut left = lo;
    for right in cuts.into_iter().chain(std::iter::once(hi)) {
        let r = quadrature::integrate(&mut f, left, right, tol())?;
        total.value += r.value;
        total.abs_err += r.abs_err;
        total.evals += r.evals;
        left = right;
    }
    Ok(total)
}

/// `E[F(X)]` for one step `X`, where `F` vanishes below `lower` and grows at
/// most like `|u|^growth`. `breaks` are kinks of `F` worth splitting at.
pub fn expect_step<F: FnMut(f64) -> f64>(
    dist: &IncrementDistribution,
    mut f: F,
    lower: f64,
    growth: f64,
    breaks: &[f64],
) -> Result<Integral> {
    if let Some(atoms) = dist.atoms() {
        let value = atoms
            .iter()
            .filter(|a| a.value >= lower)
            .map(|a| a.prob * f(a.value))
            .sum();
        return Ok(Integral {
            value,
            abs_err: 0.0,
            evals: atoms.len(),
        });
    }
    match dist {
        IncrementDistribution::Gaussian => {
            let lo = lower.max(-GAUSS_REACH);
            if lo >= GAUSS_REACH {
                return Ok(Integral {
                    value: 0.0,
                    abs_err: 0.0,
                    evals: 0,
                });
            }
            let phi = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let mut b = breaks.to_vec();
            b.extend([-1.0, 0.0, 1.0]);
            integrate_pieces(|u| phi(u) * f(u), lo, GAUSS_REACH, &b)
        }
        IncrementDistribution::Uniform => {
            let (s_lo, s_hi) = dist.support();
            let lo = lower.max(s_lo);
            if lo >= s_hi {
                return Ok(Integral {
                    value: 0.0,
                    abs_err: 0.0,
                    evals: 0,
                });
            }
            let dens = 1.0 / (s_hi - s_lo);
            let mut r = integrate_pieces(&mut f, lo, s_hi, breaks)?;
            r.value *= dens;
            r.abs_err *= dens;
            Ok(r)
        }
        IncrementDistribution::SymPareto { beta } => {
            if growth >= *beta {
                return Err(Error::Distribution(format!(
                    "E|X|^{growth} is infinite for sym_pareto(beta={beta})"
                )));
            }
            let sigma = ((beta - 2.0) / beta).sqrt();
            // X = +-sigma v^{-1/beta} with v uniform; v = w^m tames the
            // endpoint growth w^{m - 1 - m growth / beta}.
            let m = (2.0 / (1.0 - growth.max(0.0) / beta)).max(1.0);
            let up = |w: f64| {
                if w == 0.0 {
                    return 0.0;
                }
                let u = sigma * w.powf(-m / beta);
                0.5 * m * w.powf(m - 1.0) * f(u)
            };
            let mut total = quadrature::integrate(up, 0.0, 1.0, tol())?;
            if lower < -sigma {
                // negative branch, restricted to u >= lower
                let w_min = (sigma / -lower).powf(beta / m);
                let down = |w: f64| {
                    let u = -sigma * w.powf(-m / beta);
                    0.5 * m * w.powf(m - 1.0) * f(u)
                };
                let r = quadrature::integrate(down, w_min, 1.0, tol())?;
                total.value += r.value;
                total.abs_err += r.abs_err;
                total.evals += r.evals;
            }
            Ok(total)
        }
        _ => unreachable!("finite laws handled above"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftValue {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub est_error: f64,
}

/// The drift of `Vbar_{p(c)}` under one step of `dist`.
#[derive(Debug, Clone)]
pub struct Drift {
    c: f64,
    v: VFunction,
    dist: IncrementDistribution,
}

impl Drift {
    pub fn new(c: f64, dist: &IncrementDistribution) -> Result<Self> {
        dist.validate()?;
        let v = super::v_for_slope(c)?;
        let p = v.p();
        if !dist.has_moment(p) {
            return Err(Error::Distribution(format!(
                "{} lacks the moment of order p(c)={p:.6} needed for the drift",
                dist.name()
            )));
        }
        Ok(Self {
            c,
            v,
            dist: dist.clone(),
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn p(&self) -> f64 {
        self.v.p()
    }

    pub fn v(&self) -> &VFunction {
        &self.v
    }

    pub fn dist(&self) -> &IncrementDistribution {
        &self.dist
    }

    /// `f(x, y)` by exact summation or quadrature against the step law.
    pub fn eval(&self, x: f64, y: f64) -> Result<DriftValue> {
        if !(x.is_finite() && y.is_finite()) || y < 0.0 {
            return Err(Error::Invalid(format!("drift needs finite x and y >= 0, got ({x}, {y})")));
        }
        let t1 = y + 1.0;
        let lower = self.c * t1.sqrt() - x;
        let e = expect_step(
            &self.dist,
            |u| self.v.clipped(x + u, t1),
            lower,
            self.p(),
            &[lower],
        )?;
        let here = self.v.clipped(x, y);
        let value = e.value - here;
        Ok(DriftValue {
            x,
            y,
            value,
            est_error: e.abs_err + 1e-10 * (e.value.abs() + here.abs()),
        })
    }

    /// `f(x, y)` for a live point `x > c sqrt y`, tuned for path loops.
    ///
    /// For Gaussian steps `V` is exactly harmonic, so only the mass that
    /// falls below the boundary contributes:
    /// `f = -int_{-inf}^{L} V(x + u, y + 1) phi(u) du`, `L = c sqrt(y+1) - x`.
    pub fn fast(&self, x: f64, y: f64) -> f64 {
        let t1 = y + 1.0;
        match &self.dist {
            IncrementDistribution::Rademacher => {
                0.5 * (self.v.clipped(x + 1.0, t1) + self.v.clipped(x - 1.0, t1)) - self.v.v(x, y)
            }
            IncrementDistribution::FiniteDiscrete { atoms } => {
                atoms
                    .iter()
                    .map(|a| a.prob * self.v.clipped(x + a.value, t1))
                    .sum::<f64>()
                    - self.v.v(x, y)
            }
            IncrementDistribution::Gaussian if y > 0.0 || self.p().fract() == 0.0 => {
                let l = self.c * t1.sqrt() - x;
                if l < -13.0 {
                    return 0.0;
                }
                let phi = |u: f64| (-0.5 * u * u).exp() * 0.398_942_280_401_432_7;
                let s = t1.sqrt();
                let mut g = |u: f64| self.v.psi((x + u) / s) * phi(u);
                // Fixed panels, finer towards L where phi is largest.
                const CUTS: [f64; 7] = [13.0, 9.0, 6.0, 4.0, 2.5, 1.2, 0.0];
                -s.powf(self.p())
                    * CUTS
                        .windows(2)
                        .map(|w| quadrature::gk15(&mut g, l - w[0], l - w[1]).0)
                        .sum::<f64>()
            }
            _ => self.eval(x, y).map(|d| d.value).unwrap_or(f64::NAN),
        }
    }
}

/// `f(x, y)` for the boundary slope `c`.
pub fn drift_f(x: f64, y: f64, c: f64, dist: &IncrementDistribution) -> Result<DriftValue> {
    Drift::new(c, dist)?.eval(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_examples() {
        let r = IncrementDistribution::Rademacher;
        assert_eq!(drift_f(5.0, 4.0, 1.0, &r).unwrap().value, 0.0);
        assert_eq!(drift_f(2.0, 3.0, 1.0, &r).unwrap().value, 1.5);
    }

    #[test]
    fn gaussian_far_from_boundary_is_flat() {
        let d = drift_f(50.0, 4.0, 1.0, &IncrementDistribution::Gaussian).unwrap();
        assert!(d.value.abs() < 1e-3, "{d:?}");
    }

    #[test]
    fn gaussian_shortcut_matches_full_quadrature() {
        for &c in &[-0.5, 0.0, 1.0, 1.3] {
            let drift = Drift::new(c, &IncrementDistribution::Gaussian).unwrap();
            for &y in &[0.0, 1.0, 3.5, 40.0] {
                for &d in &[0.05, 0.4, 1.0, 2.5, 6.0] {
                    let x = c * f64::sqrt(y) + d;
                    if x <= 0.0 && y == 0.0 {
                        continue;
                    }
                    let full = drift.eval(x, y).unwrap();
                    let fast = drift.fast(x, y);
                    let scale = drift.v().v(x + 1.0, y + 1.0).abs() + 1.0;
                    assert!(
                        (full.value - fast).abs() < 1e-7 * scale,
                        "c={c} y={y} x={x}: {} vs {fast}",
                        full.value
                    );
                }
            }
        }
    }

    #[test]
    fn gaussian_overshoot_identity_at_c0() {
        // With V_1(x) = x the drift is E[(x + X)^-].
        let x: f64 = 0.7;
        let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let tail = 0.5 * libm::erfc(x / std::f64::consts::SQRT_2);
        let want = phi - x * tail;
        let got = drift_f(x, 2.0, 0.0, &IncrementDistribution::Gaussian).unwrap().value;
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn pareto_moment_guard() {
        let d = IncrementDistribution::sym_pareto(2.5).unwrap();
        assert!(Drift::new(1.0, &d).is_ok());
        assert!(matches!(Drift::new(2.3, &d), Err(Error::Distribution(_))));
        let u = expect_step(&d, |u| u * u, f64::NEG_INFINITY, 2.0, &[]).unwrap();
        assert!((u.value - 1.0).abs() < 1e-7, "{u:?}");
    }

    #[test]
    fn uniform_second_moment() {
        let u = expect_step(&IncrementDistribution::Uniform, |u| u * u, f64::NEG_INFINITY, 2.0, &[]).unwrap();
        assert!((u.value - 1.0).abs() < 1e-12);
    }
}
