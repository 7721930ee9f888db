//! Closed-form integrals against adaptive quadrature.

use cmc_shooter::identities::identity_suite;

fn main() -> cmc_shooter::Result<()> {
    for r in identity_suite()? {
        println!(
            "{:<34} {:>20.14} {:>20.14}  err {:.1e}  {}",
            r.name,
            r.analytic,
            r.numeric,
            r.abs_error,
            if r.pass { "ok" } else { "FAIL" }
        );
    }
    Ok(())
}
