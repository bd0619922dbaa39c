//! Joint probabilities P(a + S(n) in (x, x + 1], T > n) on unit bins above
//! the boundary.

use sqrtwalk::mc::{estimate_local_prob, SeedSpec};
use sqrtwalk::walk::{Boundary, IncrementDistribution};

fn main() -> sqrtwalk::Result<()> {
    let bd = Boundary::new(0.5, 2.0, 1.0)?;
    let n = 64;
    let start = bd.level(n).floor();
    let bins: Vec<(f64, f64)> = (0..16).map(|k| (start + k as f64, 1.0)).collect();
    let est = estimate_local_prob(&bd, &IncrementDistribution::Gaussian, n, &bins, 200_000, SeedSpec::new(3))?;
    for e in est {
        println!("({:>5.1}, {:>5.1}] {:.5} ± {:.5}", e.bin_lo, e.bin_lo + e.bin_width, e.p_hat, e.stderr);
    }
    Ok(())
}
