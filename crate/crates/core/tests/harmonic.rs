use sqrtwalk::harmonic::*;
use sqrtwalk::mc::{replicate, SeedSpec};
use sqrtwalk::walk::{survival_measures, Boundary, IncrementDistribution};
use sqrtwalk::Error;

const RAD: IncrementDistribution = IncrementDistribution::Rademacher;
const GAUSS: IncrementDistribution = IncrementDistribution::Gaussian;

fn bd(c: f64, a: f64, b: f64) -> Boundary {
    Boundary::new(c, a, b).unwrap()
}

fn combined(x: &WEstimate, y: &WEstimate) -> f64 {
    x.stderr.hypot(y.stderr)
}

#[test]
fn drift_examples() {
    assert_eq!(drift_f(5.0, 4.0, 1.0, &RAD).unwrap().value, 0.0);
    assert_eq!(drift_f(2.0, 3.0, 1.0, &RAD).unwrap().value, 1.5);
    assert!(drift_f(50.0, 4.0, 1.0, &GAUSS).unwrap().value.abs() < 1e-3);
    assert!(drift_f(1.0, -1.0, 1.0, &GAUSS).is_err());
}

#[test]
fn drift_is_non_negative_for_quadratic_v() {
    // x^2 - t is discrete harmonic and clipping only removes its negative part
    let d = Drift::new(1.0, &RAD).unwrap();
    for i in 0..40 {
        for y in [0.0, 1.0, 7.5, 30.0] {
            let x = f64::sqrt(y) + 0.1 * i as f64;
            assert!(d.fast(x, y) >= -1e-12);
        }
    }
}

#[test]
fn direct_estimate_matches_exact_expectation() {
    let b = bd(1.0, 3.0, 1.0);
    let n = 16;
    let v = v_for_slope(1.0).unwrap();
    let meas = survival_measures(&b, &RAD, n).unwrap();
    let exact = meas[n as usize - 1].expect(|x| v.clipped(x, 1.0 + n as f64));
    let cfg = DirectConfig { trials: 100_000, n_start: n, n_cap: n, plateau_tol: 1e-3 };
    let w = estimate_w_direct(&b, &RAD, &cfg, SeedSpec::new(4)).unwrap();
    assert_eq!(w.n_used, n);
    assert!((w.value - exact).abs() <= 4.0 * w.stderr, "{} vs {exact}", w.value);
}

#[test]
fn empty_horizon_returns_v() {
    let cfg = DirectConfig { n_cap: 0, ..Default::default() };
    let w = estimate_w_direct(&bd(1.0, 3.0, 1.0), &GAUSS, &cfg, SeedSpec::new(0)).unwrap();
    assert_eq!(w.value, 8.0);
    assert_eq!(w.n_used, 0);
}

#[test]
fn estimators_agree_for_rademacher() {
    let b = bd(1.0, 3.0, 1.0);
    let d = estimate_w_direct(&b, &RAD, &DirectConfig { trials: 50_000, ..Default::default() }, SeedSpec::new(1)).unwrap();
    let cfg = DecompConfig { trials: 50_000, n_max: Some(d.n_used) };
    let e = estimate_w_decomp(&b, &RAD, &cfg, SeedSpec::new(2)).unwrap();
    assert!((d.value - e.value).abs() <= 3.0 * combined(&d, &e), "{d:?}\n{e:?}");
    assert_eq!(e.method, WMethod::DriftDecomposition);
}

#[test]
fn w_is_monotone_in_start() {
    let cfg = DirectConfig { trials: 20_000, n_start: 64, n_cap: 1024, plateau_tol: 1e-3 };
    let seed = SeedSpec::new(9);
    let w3 = estimate_w_direct(&bd(1.0, 3.0, 1.0), &GAUSS, &cfg, seed).unwrap();
    let w4 = estimate_w_direct(&bd(1.0, 4.0, 1.0), &GAUSS, &cfg, seed).unwrap();
    assert!(w4.value > w3.value);

    let dcfg = DecompConfig { trials: 10_000, n_max: Some(512) };
    let vals: Vec<f64> = [1.5, 2.0, 3.0, 4.0, 6.0]
        .iter()
        .map(|&a| estimate_w_decomp(&bd(1.0, a, 1.0), &RAD, &dcfg, seed).unwrap().value)
        .collect();
    assert!(vals.windows(2).all(|w| w[1] >= w[0]), "{vals:?}");
}

#[test]
fn w_approaches_v_far_from_boundary() {
    let b = 1.0;
    let v = v_for_slope(1.0).unwrap();
    let cfg = DecompConfig { trials: 20_000, n_max: Some(4096) };
    let mut gaps = Vec::new();
    for r in [3.0, 10.0, 30.0, 100.0] {
        let a = r * f64::sqrt(b);
        let w = estimate_w_decomp(&bd(1.0, a, b), &RAD, &cfg, SeedSpec::new(6)).unwrap();
        gaps.push((w.value / v.v(a, b) - 1.0).abs());
    }
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "{gaps:?}");
    assert!(gaps[3] <= 0.01, "{gaps:?}");
}

#[test]
fn drift_sums_settle_along_paths() {
    let b = bd(1.0, 3.0, 1.0);
    let d = Drift::new(1.0, &RAD).unwrap();
    let cuts = [256u64, 1024, 4096];
    let parts = replicate(20_000, SeedSpec::new(5), || [0.0f64; 3], |acc, rng, _| {
        let mut x = b.a;
        let mut s = 0.0;
        for k in 0..cuts[2] {
            s += d.fast(x, b.b + k as f64).abs();
            for (i, &cut) in cuts.iter().enumerate() {
                if k + 1 == cut {
                    acc[i] += s;
                }
            }
            x += if rand::Rng::random::<bool>(rng) { 1.0 } else { -1.0 };
            if x <= b.level(k + 1) {
                for (i, &cut) in cuts.iter().enumerate() {
                    if k + 1 < cut {
                        acc[i] += s;
                    }
                }
                return;
            }
        }
    });
    let s = parts.iter().fold([0.0; 3], |a, p| [a[0] + p[0], a[1] + p[1], a[2] + p[2]]);
    let (d1, d2) = (s[1] - s[0], s[2] - s[1]);
    assert!(d2 >= 0.0 && d2 < 0.5 * d1, "{s:?}");
    assert!(d2 / s[2] < 0.05, "{s:?}");
}

#[test]
fn harmonicity_holds_for_rademacher() {
    let b = bd(1.0, 3.0, 1.0);
    for steps in [1, 2, 4] {
        let cfg = HarmonicityConfig { steps, horizon: 64, trials: 100_000, ..Default::default() };
        let r = verify_harmonicity(&b, &RAD, &cfg, SeedSpec::new(3)).unwrap();
        assert!(r.passed, "{r:?}");
    }
}

#[test]
fn harmonicity_holds_for_densities() {
    for dist in [GAUSS, IncrementDistribution::Uniform] {
        let cfg = HarmonicityConfig { steps: 2, horizon: 64, trials: 20_000, ..Default::default() };
        let r = verify_harmonicity(&bd(0.0, 1.5, 0.0), &dist, &cfg, SeedSpec::new(8)).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.nodes > 10);
    }
}

#[test]
fn perturbed_w_fails_harmonicity() {
    let cfg = HarmonicityConfig { steps: 1, horizon: 64, trials: 400_000, lhs_scale: 1.1, ..Default::default() };
    let r = verify_harmonicity(&bd(1.0, 3.0, 1.0), &RAD, &cfg, SeedSpec::new(3)).unwrap();
    assert!(!r.passed && r.discrepancy.abs() > 3.0 * r.combined_stderr, "{r:?}");
}

#[test]
fn audit_examples() {
    let rep = search_correction_constants(1.0, 1.5, 0.1, canonical_gamma(1.0, 1.5).unwrap(), &RAD).unwrap();
    assert!(rep.passed && rep.max_drift <= 1e-8);
    let again = audit_supermartingale(&rep.config, &RAD, &canonical_region(&rep.config).unwrap()).unwrap();
    assert!(again.passed);
    assert_eq!(again.max_drift, rep.max_drift);

    let rep = search_correction_constants(1.0, 1.9, 0.1, canonical_gamma(1.0, 1.9).unwrap(), &RAD).unwrap();
    assert!(rep.passed);
    assert!(rep.config.big_c <= 2f64.powi(20) && rep.config.big_r <= 2f64.powi(20));
    assert_eq!(rep.correction, Correction::H);

    let bare = AuditConfig::canonical(1.0, 1.5, 0.0, 0.0).unwrap();
    let r = audit_supermartingale(&bare, &RAD, &canonical_region(&bare).unwrap()).unwrap();
    assert!(r.positive_points > 0);

    let cfg = AuditConfig::canonical(1.0, 1.5, 4.0, 4.0).unwrap();
    let err = audit_supermartingale(&cfg, &RAD, &[(0.1, 9.0)]).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
}

#[test]
fn audits_below_one_use_the_time_correction() {
    let rep = search_correction_constants(1.0, 0.6, 0.1, canonical_gamma(1.0, 0.6).unwrap(), &RAD).unwrap();
    assert_eq!(rep.correction, Correction::G);
    assert!(rep.passed);
    let rep = search_correction_constants(0.0, 0.5, 0.1, canonical_gamma(0.0, 0.5).unwrap(), &GAUSS).unwrap();
    assert!(rep.passed);
}

#[test]
fn p1_above_p_is_rejected() {
    let cfg = AuditConfig::canonical(0.0, 0.9, 1.0, 1.0).map(|mut c| {
        c.p1 = 1.5;
        c
    });
    assert!(cfg.and_then(|c| c.validate()).is_err());
}

#[test]
fn kappa_is_deterministic_and_positive() {
    let b = bd(0.0, 1.0, 0.0);
    let cfg = KappaConfig {
        n_grid: sqrtwalk::mc::geometric_grid(64, 4096, 2),
        trials: 100_000,
        w: DecompConfig { trials: 5_000, n_max: Some(4096) },
    };
    let k1 = estimate_kappa(&b, &GAUSS, &cfg, SeedSpec::new(1)).unwrap();
    let k2 = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| estimate_kappa(&b, &GAUSS, &cfg, SeedSpec::new(1)).unwrap());
    assert_eq!(k1, k2);
    assert!(k1.value > 0.0 && k1.stderr > 0.0);

    let too_short = KappaConfig { trials: 50, ..cfg };
    assert!(estimate_kappa(&b, &GAUSS, &too_short, SeedSpec::new(1)).is_err());
}
