//! Exact survival for a Rademacher walk by dynamic programming, next to a
//! Monte Carlo estimate.

use sqrtwalk::mc::{estimate_survival, SeedSpec};
use sqrtwalk::walk::{enumerate_survival, Boundary, IncrementDistribution};

fn main() -> sqrtwalk::Result<()> {
    let bd = Boundary::new(1.0, 2.0, 0.0)?;
    let d = IncrementDistribution::Rademacher;
    let exact = enumerate_survival(&bd, &d, 20)?;
    let horizons: Vec<u64> = (1..=20).collect();
    let mc = estimate_survival(&bd, &d, &horizons, 200_000, SeedSpec::new(7))?;
    println!("{:>3} {:>10} {:>10} {:>8}", "n", "exact", "mc", "z");
    for (e, p) in mc.iter().zip(&exact) {
        let z = if e.stderr > 0.0 { (e.p_hat - p) / e.stderr } else { 0.0 };
        println!("{:>3} {p:>10.6} {:>10.6} {z:>8.2}", e.n, e.p_hat);
    }

    // a skewed three-point law: -1 and 1/2 with probability 4/9 each, 2 with 1/9
    let d3 = IncrementDistribution::from_atoms_json(
        r#"[{"value": -1, "prob": 0.4444444444444444}, {"value": 0.5, "prob": 0.4444444444444444}, {"value": 2, "prob": 0.1111111111111111}]"#,
    )?;
    println!("\nthree-point law: {:?}", enumerate_survival(&Boundary::new(0.0, 1.0, 0.0)?, &d3, 8)?);
    Ok(())
}
