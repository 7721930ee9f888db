//! Reconstruct Σ(H) from the critical profile and check its mean curvature.
//! Pass a directory to get surface.csv and meridian.svg written there.

use std::f64::consts::PI;

use cmc_shooter::geometry::build_surface;
use cmc_shooter::io::{meridian_svg, surface_csv, write_file, RunManifest};
use cmc_shooter::metric::MetricParams;
use cmc_shooter::ode::OdeConfig;
use cmc_shooter::shooting::{find_critical_a, ShootingConfig};

fn main() -> cmc_shooter::Result<()> {
    let h = 0.01;
    let crit = find_critical_a(h, &MetricParams::default(), &OdeConfig::default(), &ShootingConfig::default())?;
    let s = build_surface(&crit.profile)?;
    println!("grid points        {}", s.x.len());
    println!("max |H_full - H|   {:.3e}", s.h_residual_max);
    println!("l0, l0*H           {:.3}, {:.4}", s.l0, s.l0 * h);
    println!("H^2 A_e            {:.6} (48 pi = {:.6})", h * h * s.area_euclidean, 48.0 * PI);
    println!("A / A_e - 1        {:.4e}", s.area_metric / s.area_euclidean - 1.0);
    for (x, f) in s.interior_necks() {
        println!("neck at x = {x:.4}, r = {f:.6}");
    }
    if let Some(dir) = std::env::args().nth(1) {
        let dir = std::path::Path::new(&dir);
        let m = RunManifest::new("example bubble_surface", serde_json::json!({ "H": h }), None);
        write_file(&dir.join("surface.csv"), &surface_csv(&s, &m))?;
        write_file(&dir.join("meridian.svg"), &meridian_svg(&s))?;
    }
    Ok(())
}
