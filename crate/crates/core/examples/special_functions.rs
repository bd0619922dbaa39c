//! psi_p and V_p at a few orders, including the integer orders where
//! psi_n is the Hermite polynomial He_n.

use sqrtwalk::special_fn::{eval_psi, eval_v, hermite_he, QuadratureConfig, SpaceTimePoint};

fn main() -> sqrtwalk::Result<()> {
    let cfg = QuadratureConfig::default();
    println!("{:>6} {:>6} {:>22} {:>10}", "p", "x", "psi_p(x)", "err");
    for p in [-1.5, -0.5, 0.5, 1.0, 2.5, 4.0] {
        for x in [-2.0, 0.0, 1.5, 4.0] {
            let v = eval_psi(p, x, &cfg)?;
            println!("{p:>6} {x:>6} {:>22.15e} {:>10.1e}", v.value, v.est_error);
        }
    }

    println!("\npsi_n against He_n at x = 1.7");
    for n in 0..=6u32 {
        let x = 1.7;
        println!("n={n}: {:.15} {:.15}", eval_psi(n as f64, x, &cfg)?.value, hermite_he(n, x));
    }

    // V_p(x, t) = t^{p/2} psi_p(x / sqrt t)
    let pt = SpaceTimePoint::new(3.0, 4.0)?;
    println!("\nV_2.5(3, 4) = {:.12}", eval_v(2.5, pt, &cfg)?);
    Ok(())
}
