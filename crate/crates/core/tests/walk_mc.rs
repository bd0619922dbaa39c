use proptest::prelude::*;
use sqrtwalk::exponent::{p_of_c, DEFAULT_TOL};
use sqrtwalk::mc::{
    estimate_local_prob, estimate_survival, fit_tail_exponent, geometric_grid, replicate, SeedSpec, SurvivalEstimate,
};
use sqrtwalk::walk::{enumerate_survival, run_steps, Atom, Boundary, IncrementDistribution};

fn bd(c: f64, a: f64, b: f64) -> Boundary {
    Boundary::new(c, a, b).unwrap()
}

#[test]
fn enumeration_small_cases() {
    let r = IncrementDistribution::Rademacher;
    assert_eq!(enumerate_survival(&bd(0.0, 1.0, 0.0), &r, 4).unwrap(), [0.5, 0.5, 0.375, 0.375]);
    assert_eq!(enumerate_survival(&bd(0.0, 2.0, 0.0), &r, 1).unwrap(), [1.0]);
    assert_eq!(enumerate_survival(&bd(1.0, 2.0, 0.0), &r, 1).unwrap(), [0.5]);
}

// Brute force over all 3^n paths of a three-point law.
fn brute_three_point(bd: &Boundary, atoms: &[Atom], n: usize) -> f64 {
    let mut total = 0.0;
    for code in 0..3usize.pow(n as u32) {
        let mut k = code;
        let mut steps = Vec::with_capacity(n);
        let mut w = 1.0;
        for _ in 0..n {
            steps.push(atoms[k % 3].value);
            w *= atoms[k % 3].prob;
            k /= 3;
        }
        if run_steps(bd, &steps).survived {
            total += w;
        }
    }
    total
}

#[test]
fn enumeration_matches_brute_force_for_non_lattice_law() {
    // mean 0, variance 1, atoms not on a common lattice
    let x = 2f64.sqrt();
    let (v1, v2) = (-1.0, 1.0 + x);
    let q2 = 1.0 / (v2 * (v2 - v1));
    let q1 = -v2 * q2 / v1;
    let mut atoms = vec![
        Atom { value: v1, prob: q1 * 0.5 },
        Atom { value: 0.0, prob: 0.0 },
        Atom { value: v2, prob: q2 * 0.5 },
    ];
    // fill the middle atom with the remaining mass, then rescale to unit variance
    atoms[1].prob = 1.0 - atoms[0].prob - atoms[2].prob;
    let var: f64 = atoms.iter().map(|a| a.prob * a.value * a.value).sum();
    for a in &mut atoms {
        a.value /= var.sqrt();
    }
    let dist = IncrementDistribution::finite_discrete(atoms.clone()).unwrap();
    let b = bd(0.5, 1.2, 0.3);
    let exact = enumerate_survival(&b, &dist, 7).unwrap();
    for (i, &p) in exact.iter().enumerate() {
        assert!((p - brute_three_point(&b, &atoms, i + 1)).abs() < 1e-12);
    }
}

#[test]
fn monte_carlo_matches_enumeration() {
    let three = IncrementDistribution::from_atoms_json(
        r#"[{"value": -1.4142135623730951, "prob": 0.25}, {"value": 0, "prob": 0.5}, {"value": 1.4142135623730951, "prob": 0.25}]"#,
    )
    .unwrap();
    let horizons: Vec<u64> = (1..=20).collect();
    let (mut cells, mut inside) = (0, 0);
    for (dist, c, a) in [
        (&IncrementDistribution::Rademacher, 0.0, 1.0),
        (&IncrementDistribution::Rademacher, 1.0, 2.0),
        (&three, 0.5, 1.5),
        (&three, -0.5, 0.2),
    ] {
        let b = bd(c, a, 0.0);
        let exact = enumerate_survival(&b, dist, 20).unwrap();
        let mc = estimate_survival(&b, dist, &horizons, 100_000, SeedSpec::new(5)).unwrap();
        for (e, p) in mc.iter().zip(&exact) {
            cells += 1;
            let se = (p * (1.0 - p) / e.trials as f64).sqrt();
            if (e.p_hat - p).abs() <= 4.0 * se + 1e-15 {
                inside += 1;
            }
        }
    }
    assert!(inside as f64 >= 0.99 * cells as f64, "{inside}/{cells}");
}

#[test]
fn survival_is_monotone_in_start_under_common_numbers() {
    let grid = geometric_grid(1, 512, 2);
    for dist in [IncrementDistribution::Gaussian, IncrementDistribution::Rademacher] {
        let mut prev: Option<Vec<SurvivalEstimate>> = None;
        for a in [1.5, 2.0, 3.0, 4.5] {
            let cur = estimate_survival(&bd(1.0, a, 1.0), &dist, &grid, 20_000, SeedSpec::new(3)).unwrap();
            if let Some(p) = &prev {
                for (x, y) in p.iter().zip(&cur) {
                    assert!(y.survivors >= x.survivors);
                }
            }
            prev = Some(cur);
        }
    }
}

#[test]
fn curves_are_nested() {
    let grid = geometric_grid(1, 4096, 4);
    let curve =
        estimate_survival(&bd(0.5, 1.0, 0.0), &IncrementDistribution::Uniform, &grid, 20_000, SeedSpec::new(8)).unwrap();
    assert!(curve.windows(2).all(|w| w[1].survivors <= w[0].survivors));
}

#[test]
fn three_steps_from_one() {
    let curve =
        estimate_survival(&bd(0.0, 1.0, 0.0), &IncrementDistribution::Rademacher, &[3], 400_000, SeedSpec::new(1)).unwrap();
    assert!((curve[0].p_hat - 0.375).abs() <= 4.0 * curve[0].stderr);
}

#[test]
fn bad_inputs_are_errors() {
    let b = bd(0.0, 1.0, 0.0);
    let g = IncrementDistribution::Gaussian;
    assert!(estimate_survival(&b, &g, &[4], 0, SeedSpec::new(0)).is_err());
    assert!(estimate_survival(&b, &g, &[], 10, SeedSpec::new(0)).is_err());
    assert!(estimate_local_prob(&b, &g, 3, &[(0.0, 2.0), (1.0, 1.0)], 10, SeedSpec::new(0)).is_err());
}

#[test]
fn thread_count_does_not_matter() {
    let b = bd(1.0, 3.0, 1.0);
    let grid = geometric_grid(1, 1024, 4);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_survival(&b, &IncrementDistribution::Gaussian, &grid, 30_000, SeedSpec::new(77)).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn local_probabilities_add_up_to_survival() {
    let n = 9;
    let b = bd(0.5, 1.0, 0.0);
    let level = b.level(n);
    let mut bins: Vec<(f64, f64)> = (0..12).map(|k| (level + k as f64, 1.0)).collect();
    bins.push((level + 12.0, f64::INFINITY));
    let seed = SeedSpec::new(21);
    for dist in [IncrementDistribution::Gaussian, IncrementDistribution::Uniform] {
        let local = estimate_local_prob(&b, &dist, n, &bins, 50_000, seed).unwrap();
        let total: f64 = local.iter().map(|e| e.p_hat).sum();
        let surv = estimate_survival(&b, &dist, &[n], 50_000, seed).unwrap();
        assert!((total - surv[0].p_hat).abs() <= 1e-12);
    }
}

#[test]
fn local_probability_examples() {
    let b = bd(0.0, 1.0, 0.0);
    let r = IncrementDistribution::Rademacher;
    let e = estimate_local_prob(&b, &r, 3, &[(1.5, 1.0), (100.0, 1.0)], 200_000, SeedSpec::new(4)).unwrap();
    assert!((e[0].p_hat - 0.25).abs() <= 4.0 * e[0].stderr);
    assert_eq!(e[1].p_hat, 0.0);
}

#[test]
fn synthetic_power_law_fit() {
    let curve: Vec<SurvivalEstimate> = geometric_grid(8, 4096, 2)
        .into_iter()
        .map(|n| {
            let p = 7.0 * (n as f64).powf(-1.5);
            SurvivalEstimate { n, survivors: 1_000_000, trials: 1_000_000, p_hat: p, stderr: 1e-3 * p }
        })
        .collect();
    let fit = fit_tail_exponent(&curve, 0).unwrap();
    assert!((fit.slope + 1.5).abs() < 1e-12);
    assert!((fit.intercept - 7f64.ln()).abs() < 1e-10);
    assert!(fit_tail_exponent(&curve[..2], 0).is_err());
}

#[test]
fn scaled_tail_stays_bounded() {
    // p_hat(n) n^{p/2} should level off, and with p1 < p the scaled curve decays.
    let c = 0.5;
    let p = p_of_c(c, DEFAULT_TOL).unwrap().value;
    let p1 = 0.9 * p;
    let grid = geometric_grid(16, 8192, 2);
    for a in [1.0, 2.0] {
        let curve =
            estimate_survival(&bd(c, a, 0.0), &IncrementDistribution::Gaussian, &grid, 200_000, SeedSpec::new(12)).unwrap();
        let scaled: Vec<(f64, f64)> = curve
            .iter()
            .map(|e| {
                let s = (e.n as f64).powf(0.5 * p);
                (e.p_hat * s, e.stderr * s)
            })
            .collect();
        let k = scaled.len();
        let (last, last_se) = scaled[k - 1];
        let earlier = scaled[..k - 6].iter().map(|x| x.0).fold(0.0, f64::max);
        assert!(last <= earlier + 3.0 * last_se, "{scaled:?}");

        let t: Vec<f64> =
            curve.iter().map(|e| e.p_hat * (e.n as f64).powf(0.5 * p1) / (1.0 + a.powf(p1))).collect();
        assert!(t[k - 1] < t[k / 2]);
    }
}

#[test]
fn pareto_moments_and_tail() {
    let trials = 1_000_000u64;
    // beta = 5 keeps the fourth moment finite, so the variance check is meaningful
    let d = IncrementDistribution::sym_pareto(5.0).unwrap();
    let parts = replicate(trials, SeedSpec::new(2), || [0.0f64; 3], |acc, rng, _| {
        let x = d.sample(rng);
        acc[0] += x;
        acc[1] += x * x;
        acc[2] += x.powi(4);
    });
    let s = parts.iter().fold([0.0; 3], |a, p| [a[0] + p[0], a[1] + p[1], a[2] + p[2]]);
    let nf = trials as f64;
    let (m1, m2, m4) = (s[0] / nf, s[1] / nf, s[2] / nf);
    assert!(m1.abs() <= 3.0 / nf.sqrt(), "{m1}");
    assert!((m2 - 1.0).abs() <= 3.0 * ((m4 - m2 * m2) / nf).sqrt(), "{m2}");

    let beta = 2.5;
    let d = IncrementDistribution::sym_pareto(beta).unwrap();
    let theta0 = d.theta0().unwrap();
    for t in [2.0, 5.0] {
        let parts = replicate(trials, SeedSpec::new(3), || 0u64, |acc, rng, _| {
            if d.sample(rng) > t {
                *acc += 1;
            }
        });
        let q = parts.iter().sum::<u64>() as f64 / nf;
        let se = (q * (1.0 - q) / nf).sqrt();
        let exact = theta0 * f64::powf(t, -beta);
        assert!((q - exact).abs() <= 4.0 * se, "t={t}: {q} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn touching_the_boundary_kills(k in -16i32..16, m in 1u32..6, j in 1i32..48) {
        // dyadic values and b = m^2 - 1 keep the level c m exact in floating point
        let c = k as f64 / 8.0;
        let a = c.abs() * m as f64 + j as f64 / 16.0;
        let bnd = bd(c, a, (m * m - 1) as f64);
        let out = run_steps(&bnd, &[c * m as f64 - a]);
        prop_assert!(!out.survived);
        prop_assert_eq!(out.stopping_time, Some(1));
    }

    #[test]
    fn enumeration_is_monotone_in_start(c in -1.0f64..1.5, b in 0.0f64..3.0, gap in 0.05f64..2.0, extra in 0.0f64..2.0) {
        let a = c * b.sqrt() + gap;
        let r = IncrementDistribution::Rademacher;
        let lo = enumerate_survival(&bd(c, a, b), &r, 12).unwrap();
        let hi = enumerate_survival(&bd(c, a + extra, b), &r, 12).unwrap();
        for (x, y) in lo.iter().zip(&hi) {
            prop_assert!(*y >= *x - 1e-15);
        }
    }

    #[test]
    fn pareto_samples_respect_support(beta in 2.1f64..8.0, seed in any::<u64>()) {
        let d = IncrementDistribution::sym_pareto(beta).unwrap();
        let sigma = ((beta - 2.0) / beta).sqrt();
        let mut rng = SeedSpec::new(seed).stream(0);
        for _ in 0..64 {
            let x = d.sample(&mut rng);
            prop_assert!(x.abs() >= sigma * (1.0 - 1e-12));
        }
    }
}
