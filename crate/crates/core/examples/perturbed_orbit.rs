//! A perturbed orbit at H = 0.01: the skeleton y1..y6 and the τ drift law.

use cmc_shooter::analysis::{classify, phi_maps};
use cmc_shooter::metric::MetricParams;
use cmc_shooter::ode::{integrate, OdeConfig};

fn main() -> cmc_shooter::Result<()> {
    let mut cfg = OdeConfig::new(0.01, 0.96);
    cfg.y_max = 5.0;
    let orbit = integrate(&cfg, &MetricParams::default(), true)?;
    let sk = classify(&orbit)?;
    println!("case {}", sk.case);
    for label in ["y1", "y2", "y3", "y4", "y5"] {
        if let Ok(p) = sk.get(label) {
            println!("{label}: y = {:.9}  g = {:.6}  g' = {:>12.4}  tau = {:.6e}", p.y, p.g, p.gp, p.tau);
        }
    }
    if let Some(y6) = sk.y6 {
        println!("y6: y = {y6:.9} ({} bracket)", sk.y6_brackets);
    }
    let phi = phi_maps(&sk, &orbit)?;
    println!("sup|Phi1 - y| = {:.3e}, scaled sup|Phi2 - y| = {:.3e}", phi.phi1_sup, phi.phi2_scaled_sup);
    println!("drift-law residual {:.3e}", orbit.drift_residual());
    Ok(())
}
