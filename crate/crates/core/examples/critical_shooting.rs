//! Bisection for a′(H) and the near-critical profile.

use cmc_shooter::metric::MetricParams;
use cmc_shooter::ode::OdeConfig;
use cmc_shooter::shooting::{find_critical_a, ShootingConfig};

fn main() -> cmc_shooter::Result<()> {
    let params = MetricParams::default();
    for h in [0.02, 0.01, 0.005] {
        let r = find_critical_a(h, &params, &OdeConfig::default(), &ShootingConfig::default())?;
        println!(
            "H = {h:<6} a' = {:.13}  width {:.1e}  |g'(y1)| = {:>9.2}  |g'(y5)| = {:>12.2}  y5* = {:.6}",
            r.a_crit, r.bracket_width, r.gp_y1, r.gp_y5, r.y5_star
        );
    }
    Ok(())
}
