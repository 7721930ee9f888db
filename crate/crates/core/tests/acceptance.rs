//! Acceptance criteria 1 to 11 at their stated tolerances.
//!
//! Each test writes one `criterion N: PASS|FAIL ...` line straight to stderr,
//! which the test harness does not capture, then asserts.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use cmc_shooter::analysis::{classify, Case};
use cmc_shooter::geometry::build_surface;
use cmc_shooter::identities::{scalar_flux, scalar_flux_analytic, sphere_integrals};
use cmc_shooter::metric::MetricParams;
use cmc_shooter::ode::{integrate, OdeConfig};
use cmc_shooter::shooting::{
    balance_p, case_at, even_extension_check, find_critical_a, singular_profile, BalanceConfig,
    CriticalResult, ShootingConfig,
};
use cmc_shooter::sweep::{RatePoint, RateTable};

const H_TRIPLE: [f64; 3] = [0.02, 0.01, 0.005];

fn report(n: u32, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n:>2}: {verdict}  {detail}");
}

fn criticals() -> &'static Vec<CriticalResult> {
    static CELL: OnceLock<Vec<CriticalResult>> = OnceLock::new();
    CELL.get_or_init(|| {
        H_TRIPLE
            .iter()
            .map(|&h| {
                find_critical_a(h, &MetricParams::default(), &OdeConfig::default(), &ShootingConfig::default())
                    .unwrap()
            })
            .collect()
    })
}

#[test]
fn criterion_01_exact_circle() {
    let o = integrate(&OdeConfig::new(0.01, 1.0), &MetricParams::default(), false).unwrap();
    let mut worst: f64 = 0.0;
    let mut y = 0.0;
    while y <= 0.999 {
        let s = o.state_at_y(y).unwrap();
        worst = worst.max((s.g - (1.0 - y * y).sqrt()).abs());
        y += 1e-4;
    }
    for s in o.samples.iter().filter(|s| s.y <= 0.999) {
        worst = worst.max((s.g - (1.0 - s.y * s.y).sqrt()).abs());
    }
    let pass = worst <= 1e-8;
    report(1, pass, format!("max |g - sqrt(1-y^2)| on [0, 0.999] = {worst:.3e} (tol 1e-8)"));
    assert!(pass);
}

#[test]
fn criterion_02_first_integral() {
    let params = MetricParams::default();
    let mut spread: f64 = 0.0;
    for a in [0.9, 0.96, 1.04, 1.1] {
        let mut c = OdeConfig::new(0.01, a);
        c.y_max = 5.0;
        spread = spread.max(integrate(&c, &params, false).unwrap().tau_spread());
    }
    let mut drift: f64 = 0.0;
    for (h, a) in [(0.02, 0.95), (0.01, 0.96), (0.005, 0.97), (0.01, 1.05)] {
        let mut c = OdeConfig::new(h, a);
        c.y_max = 5.0;
        drift = drift.max(integrate(&c, &params, true).unwrap().drift_residual());
    }
    let pass = spread <= 1e-8 && drift <= 1e-7;
    report(2, pass, format!("Delaunay tau spread {spread:.2e} (tol 1e-8), drift-law residual {drift:.2e} (tol 1e-7)"));
    assert!(pass);
}

#[test]
fn criterion_03_delaunay_facts() {
    let (mut gmin, mut gmax, mut pmin, mut pmax, mut kmin) = (f64::INFINITY, 0.0f64, 0.0f64, f64::NEG_INFINITY, f64::INFINITY);
    for a in [0.8, 0.9, 1.0, 1.1, 1.2] {
        let mut c = OdeConfig::new(0.01, a);
        c.y_max = 0.75;
        let o = integrate(&c, &MetricParams::default(), false).unwrap();
        assert!((o.y_end() - 0.75).abs() < 1e-12, "a = {a} stopped at {}", o.y_end());
        for s in &o.samples {
            gmin = gmin.min(s.g);
            gmax = gmax.max(s.g);
            pmin = pmin.min(s.gp);
            pmax = pmax.max(s.gp);
            kmin = kmin.min(s.k);
        }
    }
    let pass = gmin >= 0.5 && gmax <= 1.2 && pmin >= -2.4 && pmax <= 0.0 && kmin >= 2.0 / 3.0;
    report(
        3,
        pass,
        format!("g in [{gmin:.4}, {gmax:.4}], g' in [{pmin:.4}, {pmax:.2e}], min k = {kmin:.4} (need >= 0.6667)"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_sphere_integrals() {
    let s = sphere_integrals(2.0).unwrap();
    let err = s.i0.abs().max((s.i1 - 1.0 / 6.0).abs()).max((s.i2 + 1.0 / 6.0).abs());
    let pass = err <= 1e-10;
    report(4, pass, format!("(I0, I1, I2)(2) = ({:.3e}, {:.15}, {:.15}), max error {err:.2e}", s.i0, s.i1, s.i2));
    assert!(pass);
}

#[test]
fn criterion_05_scalar_flux() {
    let mut worst: f64 = 0.0;
    for (a, b, p) in [(1.0, 2.0, 4.0), (1.5, 5.0, 20.0), (1.0, 3.0, -10.0)] {
        let want = scalar_flux_analytic(a, b, p);
        let got = scalar_flux(a, b, &MetricParams::new(0.1, p).unwrap()).unwrap();
        worst = worst.max(((got - want) / want).abs());
    }
    let pass = worst <= 1e-8;
    report(5, pass, format!("max relative error over three slabs {worst:.2e} (tol 1e-8)"));
    assert!(pass);
}

#[test]
fn criterion_06_bracketing() {
    let params = MetricParams::default();
    let t = OdeConfig::default();
    let mut ok = true;
    let mut widths = Vec::new();
    for (h, crit) in H_TRIPLE.iter().zip(criticals()) {
        ok &= case_at(*h, 0.95, &params, &t).unwrap() == Case::H1;
        ok &= case_at(*h, 1.05, &params, &t).unwrap() != Case::H1;
        ok &= crit.bracket_width <= 1e-12;
        ok &= case_at(*h, crit.bracket_lo, &params, &t).unwrap() == Case::H1;
        ok &= case_at(*h, crit.bracket_hi, &params, &t).unwrap() != Case::H1;
        widths.push(format!("{:.1e}", crit.bracket_width));
    }
    report(6, ok, format!("endpoint cases hold for every H; bracket widths {}", widths.join(", ")));
    assert!(ok);
}

#[test]
fn criterion_07_singularity_selection() {
    let t = OdeConfig::default();
    let ratio_sweep = |p: f64| -> Vec<(f64, f64)> {
        let params = MetricParams::new(0.1, p).unwrap();
        let base = find_critical_a(0.01, &params, &t, &ShootingConfig::default()).unwrap();
        [1e-6, 1e-8, 1e-10]
            .iter()
            .map(|&eps| {
                let (_, sk) = cmc_shooter::shooting::near_critical_profile(0.01, base.a_crit - eps, &params, &t).unwrap();
                (sk.get("y1").unwrap().gp.abs(), sk.get("y5").unwrap().gp.abs())
            })
            .collect()
    };
    // p = 20: |g'(y5)|/|g'(y1)| grows as the pullback shrinks, |g'(y1)| stays O(1/H)
    let high = ratio_sweep(20.0);
    let r_high: Vec<f64> = high.iter().map(|(a, b)| b / a).collect();
    let grows = r_high.windows(2).all(|w| w[1] > 3.0 * w[0]) && r_high[2] > 1.0;
    let c_meas: Vec<f64> = criticals().iter().map(|c| c.gp_y1 * c.h).collect();
    let c_max = c_meas.iter().cloned().fold(0.0, f64::max);
    let c_min = c_meas.iter().cloned().fold(f64::INFINITY, f64::min);
    let y1_bounded = c_max / c_min < 1.2 && high.iter().all(|(a, _)| a * 0.01 <= 1.2 * c_max);
    // p = -10: the roles swap
    let low = ratio_sweep(-10.0);
    let r_low: Vec<f64> = low.iter().map(|(a, b)| b / a).collect();
    let reverses = r_low.windows(2).all(|w| w[1] < w[0] / 3.0) && r_low[2] < 1.0;
    let bal = balance_p(0.01, 0.1, &t, &ShootingConfig::default(), &BalanceConfig::default());
    let (balanced, p_bal) = match &bal {
        Ok(b) => (true, b.p),
        Err(_) => (false, f64::NAN),
    };
    let pass = grows && y1_bounded && reverses && balanced;
    report(
        7,
        pass,
        format!(
            "p=20 ratios {:?}, |g'(y1)|*H in [{c_min:.4}, {c_max:.4}]; p=-10 ratios {:?}; balanced p(0.01) = {p_bal:.4}",
            r_high.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>(),
            r_low.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_rate_table() {
    let points: Vec<RatePoint> = criticals().iter().map(|c| RatePoint::from_critical(c).unwrap()).collect();
    let t = RateTable::from_points(points);
    let e = t.exponents;
    let checks = [
        ("|y4-2|", e.y4, 0.5, 0.15),
        ("|y5-3|", e.y5, 0.5, 0.15),
        ("|intk-3|", e.k_integral, 1.0, 0.3),
        ("|H2Ae-48pi|", e.area, 1.0, 0.3),
        ("tau5-tau3", e.tau_decrement, 2.0, 0.3),
    ];
    let negative = t.points.iter().all(|p| p.tau_decrement < 0.0);
    let mut pass = negative;
    let mut parts = Vec::new();
    for (name, got, want, tol) in checks {
        let ok = (got - want).abs() <= tol;
        pass &= ok;
        parts.push(format!("{name} {got:.3} ({want}±{tol}{})", if ok { "" } else { " miss" }));
    }
    parts.push(format!("tau decrement negative: {negative}"));
    let _ = writeln!(std::io::stderr(), "{}", t.render());
    report(8, pass, parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_09_curvature_on_the_surface() {
    let crit = &criticals()[1];
    let s = build_surface(&crit.profile).unwrap();
    let pass = s.h_residual_max <= 1e-6;
    report(
        9,
        pass,
        format!(
            "H = 0.01: max |H_full - H| = {:.3e} over {} points; H^2 A_e = {:.4} vs 48 pi = {:.4}",
            s.h_residual_max,
            s.x.len(),
            0.0001 * s.area_euclidean,
            48.0 * PI
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_regularity_at_the_pole() {
    let crit = &criticals()[1];
    let sp = singular_profile(crit);
    let r = even_extension_check(&sp.profile).unwrap();
    let pass = r.pole_mismatch.abs() <= 1e-3 && r.tail_monotone;
    report(
        10,
        pass,
        format!(
            "|1/(g g')| -> {:.6} vs 1 + rho/2 = {:.6} (mismatch {:.2e}); dy/dg -> {:.2e}, tail monotone {}",
            r.inv_ggp_limit.abs(),
            1.0 + r.rho_limit / 2.0,
            r.pole_mismatch,
            r.dy_dg_limit,
            r.tail_monotone
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_11_d_floor_and_rho_bound() {
    let mut dmin = f64::INFINITY;
    let mut ratios = Vec::new();
    for (h, crit) in H_TRIPLE.iter().zip(criticals()) {
        let cfg = OdeConfig { stop_after_necks: Some(2), ..OdeConfig::new(*h, crit.a_crit - 1e-8) };
        let o = integrate(&cfg, &MetricParams::default(), true).unwrap();
        assert_eq!(classify(&o).unwrap().case, Case::H1);
        dmin = dmin.min(o.samples.iter().map(|s| s.d).fold(f64::INFINITY, f64::min));
        ratios.push(o.samples.iter().map(|s| s.rho.abs()).fold(0.0, f64::max) / h);
    }
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = dmin >= 0.3 && hi / lo <= 1.2;
    report(
        11,
        pass,
        format!("min d = {dmin:.4}; max|rho|/H = {:?}", ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()),
    );
    assert!(pass);
}
