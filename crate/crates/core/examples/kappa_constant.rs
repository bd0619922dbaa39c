//! The tail constant kappa(c). At c = 0 the Brownian value sqrt(2/pi) is
//! the target; at c = 1 two starting points should agree.

use sqrtwalk::harmonic::{estimate_kappa, KappaConfig};
use sqrtwalk::mc::SeedSpec;
use sqrtwalk::walk::{Boundary, IncrementDistribution};

fn main() -> sqrtwalk::Result<()> {
    let g = IncrementDistribution::Gaussian;
    let cfg = KappaConfig::default();
    for (c, a, b) in [(0.0, 1.0, 0.0), (1.0, 3.0, 1.0), (1.0, 5.0, 4.0)] {
        let k = estimate_kappa(&Boundary::new(c, a, b)?, &g, &cfg, SeedSpec::new(11))?;
        println!(
            "c={c} a={a} b={b}: kappa {:.4} ± {:.4} (W {:.3}, converged {})",
            k.value, k.stderr, k.w.value, k.converged
        );
    }
    println!("sqrt(2/pi) = {:.4}", (2.0 / std::f64::consts::PI).sqrt());
    Ok(())
}
