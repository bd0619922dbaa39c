//! Survival curve of a Gaussian walk above 1 * sqrt(n + 1) started at 3,
//! and the fitted log-log tail slope, which should be near -p(1)/2 = -1.

use sqrtwalk::mc::{estimate_survival, fit_tail_exponent, geometric_grid, SeedSpec};
use sqrtwalk::walk::{Boundary, IncrementDistribution};

fn main() -> sqrtwalk::Result<()> {
    let bd = Boundary::new(1.0, 3.0, 1.0)?;
    let grid = geometric_grid(16, 1 << 14, 2);
    let curve = estimate_survival(&bd, &IncrementDistribution::Gaussian, &grid, 200_000, SeedSpec::new(1))?;
    for e in &curve {
        println!("n={:>6} p_hat={:.6} se={:.1e}", e.n, e.p_hat, e.stderr);
    }
    let fit = fit_tail_exponent(&curve, 256)?;
    println!("slope {:.3} ± {:.3} on n in {:?}", fit.slope, fit.slope_stderr, fit.n_range);
    Ok(())
}
