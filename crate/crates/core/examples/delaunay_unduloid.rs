//! A Delaunay unduloid: periodic necks and bulges with τ conserved.

use cmc_shooter::analysis::classify;
use cmc_shooter::metric::MetricParams;
use cmc_shooter::ode::{integrate, EventKind, OdeConfig};

fn main() -> cmc_shooter::Result<()> {
    let a = 0.96;
    let mut cfg = OdeConfig::new(0.01, a);
    cfg.y_max = 5.0;
    let orbit = integrate(&cfg, &MetricParams::default(), false)?;
    println!("tau(0) = a - a^2 = {:.6}", a - a * a);
    println!("tau spread along the orbit: {:.3e}", orbit.tau_spread());
    for e in orbit.events.iter().filter(|e| e.kind == EventKind::GpZero) {
        let what = if e.g < 0.5 { "neck " } else { "bulge" };
        println!("{what} y = {:.9}  g = {:.9}", e.y, e.g);
    }
    println!("case: {}", classify(&orbit)?.case);
    Ok(())
}
