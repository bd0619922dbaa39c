//! Search for correction constants (C, R) and the audit of the corrected
//! function on its region.

use sqrtwalk::exponent::{p_of_c, DEFAULT_TOL};
use sqrtwalk::harmonic::{audit_supermartingale, canonical_gamma, canonical_region, search_correction_constants, AuditConfig};
use sqrtwalk::walk::IncrementDistribution;

fn main() -> sqrtwalk::Result<()> {
    let c = 1.0;
    let d = IncrementDistribution::Rademacher;
    let p = p_of_c(c, DEFAULT_TOL)?.value;
    for p1 in [0.5 * p, 0.75 * p, 0.9 * p, 0.95 * p] {
        let rep = search_correction_constants(c, p1, 0.1, canonical_gamma(c, p1)?, &d)?;
        println!(
            "p1={p1:.2} ({:?}): C={} R={} max drift {:.3e} at (x={:.2}, t={})",
            rep.correction, rep.config.big_c, rep.config.big_r, rep.max_drift, rep.worst.x, rep.worst.t
        );
    }

    // without correction the drift turns positive near the boundary
    let bare = AuditConfig::canonical(c, 1.5, 0.0, 0.0)?;
    let rep = audit_supermartingale(&bare, &d, &canonical_region(&bare)?)?;
    println!("uncorrected p1=1.5: {} of {} points positive, worst {:.3e}", rep.positive_points, rep.points, rep.max_drift);
    Ok(())
}
