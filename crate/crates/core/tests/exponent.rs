use sqrtwalk::exponent::{c_of_p, p_of_c, DEFAULT_TOL};
use sqrtwalk::special_fn::{eval_psi, eval_v, QuadratureConfig, SpaceTimePoint};

fn psi(p: f64, x: f64) -> f64 {
    eval_psi(p, x, &QuadratureConfig::default()).unwrap().value
}

#[test]
fn anchors_within_1e8() {
    assert!((p_of_c(0.0, DEFAULT_TOL).unwrap().value - 1.0).abs() < 1e-8);
    assert!((c_of_p(2.0, DEFAULT_TOL).unwrap().value - 1.0).abs() < 1e-8);
    assert!((c_of_p(3.0, DEFAULT_TOL).unwrap().value - 3f64.sqrt()).abs() < 1e-8);
}

#[test]
fn p_of_c_increasing() {
    let grid = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];
    let ps: Vec<f64> = grid.iter().map(|&c| p_of_c(c, DEFAULT_TOL).unwrap().value).collect();
    for w in ps.windows(2) {
        assert!(w[1] > w[0], "{ps:?}");
    }
}

#[test]
fn root_is_minimal_on_dense_scan() {
    for &c in &[-2.0, -0.5, 0.0, 1.0, 3f64.sqrt(), 2.5, 3.0] {
        let p = p_of_c(c, DEFAULT_TOL).unwrap().value;
        let mut q = 1e-3;
        while q < p - 1e-3 {
            assert!(psi(q, c) > 0.0, "c={c}: psi_{q}({c}) <= 0 below root {p}");
            q += 1e-3;
        }
    }
}

#[test]
fn largest_zero_has_nothing_above() {
    for &p in &[0.3, 1.5, 2.0, 4.0, 6.5] {
        let c = c_of_p(p, DEFAULT_TOL).unwrap().value;
        let mut x = c + 1e-3;
        while x < 2.0 * p.sqrt() + 6.0 {
            assert!(psi(p, x) > 0.0, "p={p} x={x}");
            x += 1e-3;
        }
    }
}

#[test]
fn v_vanishes_on_boundary_and_is_positive_above() {
    let cfg = QuadratureConfig::default();
    for &c in &[-1.0, 0.0, 0.7, 1.0, 2.0] {
        let p = p_of_c(c, DEFAULT_TOL).unwrap().value;
        for &t in &[0.5f64, 1.0, 9.0, 100.0] {
            let on = eval_v(p, SpaceTimePoint::new(c * t.sqrt(), t).unwrap(), &cfg).unwrap();
            assert!(on.abs() < 1e-8 * (1.0 + t.powf(p / 2.0)), "c={c} t={t}: {on}");
            for k in 1..40 {
                let x = c * t.sqrt() + 0.05 * k as f64 * k as f64;
                let v = eval_v(p, SpaceTimePoint::new(x, t).unwrap(), &cfg).unwrap();
                assert!(v > 0.0, "c={c} t={t} x={x}: {v}");
            }
        }
    }
}

#[test]
fn scan_never_skips_a_sign_change() {
    // A dense scan in p finds the same first root for |c| <= 3.
    for i in 0..=12 {
        let c = -3.0 + 0.5 * i as f64;
        let p = p_of_c(c, DEFAULT_TOL).unwrap().value;
        let mut q = 1e-3;
        let mut first = None;
        while q < 40.0 {
            if psi(q, c) <= 0.0 {
                first = Some(q);
                break;
            }
            q += 1e-3;
        }
        let first = first.expect("dense scan found a root");
        assert!((first - p).abs() < 2e-3, "c={c}: dense {first} vs solver {p}");
    }
}
