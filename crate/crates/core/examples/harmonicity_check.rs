//! n-step harmonicity of W for a discrete and a continuous step law, and
//! the same check with the left side inflated by 10%.

use sqrtwalk::harmonic::{verify_harmonicity, HarmonicityConfig};
use sqrtwalk::mc::SeedSpec;
use sqrtwalk::walk::{Boundary, IncrementDistribution};

fn main() -> sqrtwalk::Result<()> {
    let bd = Boundary::new(1.0, 3.0, 1.0)?;
    for d in [IncrementDistribution::Rademacher, IncrementDistribution::Gaussian] {
        for steps in [1, 2, 4] {
            let cfg = HarmonicityConfig { steps, horizon: 64, trials: 50_000, ..Default::default() };
            let r = verify_harmonicity(&bd, &d, &cfg, SeedSpec::new(5))?;
            println!(
                "{:<10} steps={steps}: lhs {:.4} rhs {:.4} diff {:+.4} ({:+.2} sigma) {}",
                d.name(),
                r.lhs,
                r.rhs,
                r.discrepancy,
                r.discrepancy / r.combined_stderr,
                if r.passed { "ok" } else { "FAILED" }
            );
        }
    }
    let cfg = HarmonicityConfig { horizon: 64, trials: 400_000, lhs_scale: 1.1, ..Default::default() };
    let r = verify_harmonicity(&bd, &IncrementDistribution::Rademacher, &cfg, SeedSpec::new(5))?;
    println!("inflated: {:+.2} sigma, passed = {}", r.discrepancy / r.combined_stderr, r.passed);
    Ok(())
}
