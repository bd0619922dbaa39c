//! The exponent p(c) (smallest root of psi_p(c) = 0 in p) and its inverse
//! c(p) (largest zero of psi_p).

use sqrtwalk::exponent::{c_of_p, p_of_c, DEFAULT_TOL};

fn main() -> sqrtwalk::Result<()> {
    println!("{:>6} {:>14} {:>10}", "c", "p(c)", "residual");
    for c in [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5] {
        let r = p_of_c(c, DEFAULT_TOL)?;
        println!("{c:>6} {:>14.10} {:>10.1e}", r.value, r.residual);
    }
    println!("\n{:>6} {:>14}", "p", "c(p)");
    for p in [0.5, 1.0, 2.0, 3.0, 4.0] {
        println!("{p:>6} {:>14.10}", c_of_p(p, DEFAULT_TOL)?.value);
    }
    Ok(())
}
