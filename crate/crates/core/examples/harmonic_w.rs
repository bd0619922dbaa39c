//! W(a, b) from the direct limit and from the drift decomposition, compared
//! with V(a, b).

use sqrtwalk::harmonic::{estimate_w_decomp, estimate_w_direct, v_for_slope, DecompConfig, DirectConfig};
use sqrtwalk::mc::SeedSpec;
use sqrtwalk::walk::{Boundary, IncrementDistribution};

fn main() -> sqrtwalk::Result<()> {
    let c = 1.0;
    let v = v_for_slope(c)?;
    let d = IncrementDistribution::Rademacher;
    for (a, b) in [(2.0, 1.0), (3.0, 1.0), (5.0, 4.0), (20.0, 1.0)] {
        let bd = Boundary::new(c, a, b)?;
        let direct = estimate_w_direct(&bd, &d, &DirectConfig { trials: 50_000, ..Default::default() }, SeedSpec::new(1))?;
        let cfg = DecompConfig { trials: 50_000, n_max: Some(direct.n_used.max(1)) };
        let decomp = estimate_w_decomp(&bd, &d, &cfg, SeedSpec::new(2))?;
        println!(
            "a={a:>4} b={b}: V={:>9.3} direct={:>9.3}±{:.3} (N={}) decomp={:>9.3}±{:.3}",
            v.v(a, b),
            direct.value,
            direct.stderr,
            direct.n_used,
            decomp.value,
            decomp.stderr
        );
    }
    Ok(())
}
