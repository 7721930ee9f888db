//! The outer search over p: where does |g′(y₅)| = |g′(y₁)|?

use cmc_shooter::ode::OdeConfig;
use cmc_shooter::shooting::{balance_p, BalanceConfig, ShootingConfig};

fn main() -> cmc_shooter::Result<()> {
    let bal = BalanceConfig { p_tol: 1e-2, ..Default::default() };
    let r = balance_p(0.01, 0.1, &OdeConfig::default(), &ShootingConfig::default(), &bal)?;
    println!("{:>12} {:>14} {:>12} {:>12} {:>12}", "p", "a'", "|g'(y1)|", "|g'(y5)|", "residual");
    for s in &r.trace {
        println!("{:>12.6} {:>14.11} {:>12.3} {:>12.3} {:>12.3}", s.p, s.a_crit, s.gp_y1, s.gp_y5, s.residual);
    }
    println!("balanced p(H = 0.01) = {:.4}", r.p);
    Ok(())
}
