//! Heavy-tailed steps (symmetric Pareto, beta = 2.5) against a boundary
//! with p(c) = 4. One big jump is enough to escape, so survival decays
//! more slowly than the n^{-2} of light-tailed steps.

use sqrtwalk::exponent::{c_of_p, DEFAULT_TOL};
use sqrtwalk::mc::{estimate_survival, fit_tail_exponent, geometric_grid, SeedSpec};
use sqrtwalk::walk::{Boundary, IncrementDistribution};

fn main() -> sqrtwalk::Result<()> {
    let c = c_of_p(4.0, DEFAULT_TOL)?.value;
    let bd = Boundary::new(c, 6.0, 1.0)?;
    let grid = geometric_grid(16, 1 << 13, 1);
    let pareto = estimate_survival(&bd, &IncrementDistribution::sym_pareto(2.5)?, &grid, 5_000_000, SeedSpec::new(9))?;
    let gauss = estimate_survival(&bd, &IncrementDistribution::Gaussian, &grid, 5_000_000, SeedSpec::new(9))?;
    println!("{:>6} {:>12} {:>12}", "n", "sym_pareto", "gaussian");
    for (p, g) in pareto.iter().zip(&gauss) {
        println!("{:>6} {:>12.3e} {:>12.3e}", p.n, p.p_hat, g.p_hat);
    }
    for (name, curve) in [("sym_pareto", &pareto), ("gaussian", &gauss)] {
        let fit = fit_tail_exponent(curve, 64)?;
        println!("{name:<10} slope {:.3} ± {:.3} on n in {:?}", fit.slope, fit.slope_stderr, fit.n_range);
    }
    Ok(())
}
