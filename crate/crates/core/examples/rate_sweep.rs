//! Limit quantities across H ∈ {0.02, 0.01, 0.005} and their fitted rates.

use cmc_shooter::metric::MetricParams;
use cmc_shooter::ode::OdeConfig;
use cmc_shooter::shooting::ShootingConfig;
use cmc_shooter::sweep::sweep;

fn main() -> cmc_shooter::Result<()> {
    let t = sweep(&[0.02, 0.01, 0.005], &MetricParams::default(), &OdeConfig::default(), &ShootingConfig::default())?;
    print!("{}", t.render());
    Ok(())
}
