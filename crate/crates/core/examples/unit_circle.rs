//! The unperturbed orbit from a = 1 is the unit circle g = √(1 − y²).

use cmc_shooter::metric::MetricParams;
use cmc_shooter::ode::{integrate, OdeConfig};

fn main() -> cmc_shooter::Result<()> {
    let mut cfg = OdeConfig::new(0.01, 1.0);
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-12;
    let orbit = integrate(&cfg, &MetricParams::default(), false)?;
    let mut worst: f64 = 0.0;
    for s in orbit.samples.iter().filter(|s| s.y <= 0.999) {
        worst = worst.max((s.g - (1.0 - s.y * s.y).sqrt()).abs());
    }
    println!("samples       {}", orbit.samples.len());
    println!("terminal      {:?}", orbit.terminal);
    println!("max |g - h|   {worst:.3e}  (y <= 0.999)");
    println!("tau spread    {:.3e}", orbit.tau_spread());
    if let Some(b) = orbit.blowup {
        println!("blow-up at y = {:.12}, g -> {:.3e}", b.y, b.g_limit);
    }
    Ok(())
}
