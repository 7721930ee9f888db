//! Randomised invariants of the metric, the integrator, the analysis and geometry.

use proptest::prelude::*;

use cmc_shooter::analysis::{classify, k_extremes, monotonicity, Case};
use cmc_shooter::geometry::{build_surface, mean_curvature_full, Ambient};
use cmc_shooter::identities::{sphere_integrals, sphere_integrals_analytic, IdentityReport};
use cmc_shooter::metric::{chi, cutoff_constant, metric_components, phi, phi_prime, MetricParams};
use cmc_shooter::ode::{integrate, EventKind, OdeConfig, State};
use cmc_shooter::shooting::{find_critical_a, ShootingConfig};

fn params_strategy() -> impl Strategy<Value = MetricParams> {
    (0.02f64..0.3, -10.0f64..40.0).prop_map(|(l, p)| MetricParams::new(l, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chi_factorises_the_angular_component(
        params in params_strategy(),
        r in 0.01f64..50.0,
        x in -50.0f64..50.0,
    ) {
        prop_assume!(r.hypot(x) >= 1.0);
        let t = metric_components(r, x, &params).unwrap();
        let lhs = r * r + t.t_thetatheta;
        let rhs = r * r * chi(r, x, &params).unwrap() * (1.0 + t.t_rr);
        prop_assert!((lhs - rhs).abs() <= 1e-14 * lhs.abs());
    }

    #[test]
    fn phi_is_monotone_towards_p(params in params_strategy(), s in 0.0f64..1.0, ds in 1e-6f64..0.05) {
        let (a, b) = (phi(s, &params), phi(s + ds, &params));
        let sign = (params.p - 1.0).signum();
        prop_assert!(sign * (b - a) >= -1e-12);
        prop_assert!(sign * phi_prime(s, &params) >= 0.0);
        let (lo, hi) = (params.p.min(1.0), params.p.max(1.0));
        prop_assert!(a >= lo - 1e-12 && a <= hi + 1e-12);
    }

    #[test]
    fn asymptotically_schwarzschild(params in params_strategy(), l in 1.0f64..1e5, angle in 0.01f64..1.56) {
        let (r, x) = (l * angle.sin(), l * angle.cos());
        let t = metric_components(r, x, &params).unwrap();
        let schw = (1.0 + 0.5 / l).powi(4) - 1.0;
        // l²·|T − (g^S − δ)| stays bounded; the angular part is measured per r²
        prop_assert!(l * l * (t.t_rr - schw).abs() <= 1.0);
        prop_assert!(l * l * (t.t_thetatheta / (r * r) - schw).abs() <= params.p.abs() + 3.0);
    }

    #[test]
    fn flat_mean_curvature_of_spheres(radius in 0.5f64..50.0, u in -0.95f64..0.95) {
        let x = radius * u;
        let f = (radius * radius - x * x).sqrt();
        let fp = -x / f;
        let fpp = -radius * radius / (f * f * f);
        let h = mean_curvature_full(x, f, fp, fpp, &Ambient::Flat).unwrap();
        prop_assert!((h - 2.0 / radius).abs() <= 1e-10 * (2.0 / radius));
    }

    #[test]
    fn sphere_integrals_match_closed_forms(y4 in 1.01f64..50.0) {
        let n = sphere_integrals(y4).unwrap();
        let a = sphere_integrals_analytic(y4);
        prop_assert!((n.i0 - a.i0).abs() < 1e-10);
        prop_assert!((n.i1 - a.i1).abs() < 1e-10);
        prop_assert!((n.i2 - a.i2).abs() < 1e-10);
    }

    #[test]
    fn report_passes_iff_within_tolerance(a in -1.0f64..1.0, e in -1e-6f64..1e-6, tol in 0.0f64..1e-6) {
        let r = IdentityReport::new("x", a, a + e, tol);
        prop_assert_eq!(r.pass, r.abs_error <= tol);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn drift_law_holds_along_perturbed_orbits(a in 0.9f64..1.1, h in 0.005f64..0.02, y_max in 0.5f64..3.5) {
        let mut cfg = OdeConfig::new(h, a);
        cfg.y_max = y_max;
        cfg.stop_after_necks = Some(2);
        let o = integrate(&cfg, &MetricParams::default(), true).unwrap();
        let tau = o.samples.iter().map(|s| s.tau.abs()).fold(0.0, f64::max);
        let bound = 100.0 * (cfg.abs_tol + cfg.rel_tol * tau);
        prop_assert!(o.drift_residual() <= bound, "{} > {bound}", o.drift_residual());
    }

    #[test]
    fn delaunay_orbits_conserve_tau(a in 0.85f64..1.15) {
        prop_assume!((a - 1.0).abs() > 1e-3);
        let mut cfg = OdeConfig::new(0.01, a);
        cfg.y_max = 5.0;
        let o = integrate(&cfg, &MetricParams::default(), false).unwrap();
        prop_assert!(o.tau_spread() <= 10.0 * cfg.abs_tol, "{}", o.tau_spread());
    }

    #[test]
    fn d_floor_along_perturbed_orbits(a in 0.9f64..1.1, h in 0.002f64..0.02) {
        let cfg = OdeConfig { stop_after_necks: Some(2), ..OdeConfig::new(h, a) };
        let o = integrate(&cfg, &MetricParams::default(), true).unwrap();
        let dmin = o.samples.iter().map(|s| s.d).fold(f64::INFINITY, f64::min);
        prop_assert!(dmin > 0.3, "min d = {dmin}");
    }

    #[test]
    fn events_are_localised(a in 0.9f64..1.1) {
        let mut cfg = OdeConfig::new(0.01, a);
        cfg.y_max = 4.0;
        cfg.stop_after_necks = Some(2);
        let o = integrate(&cfg, &MetricParams::default(), true).unwrap();
        for e in &o.events {
            let s = State::new(e.y, e.g, e.gp);
            match e.kind {
                EventKind::GpZero => prop_assert!(e.gp.abs() <= 1e-10),
                EventKind::Inflection => {
                    let rho = o.model.rho(&s).unwrap();
                    prop_assert!(cmc_shooter::ode::inflection(&s, rho).abs() <= 1e-10);
                }
                EventKind::Blowup => {}
            }
        }
    }

    #[test]
    fn halving_tolerances_moves_the_end_state_little(a in 0.9f64..0.97) {
        let mut coarse = OdeConfig::new(0.01, a);
        coarse.y_max = 2.5;
        let fine = OdeConfig { abs_tol: 5e-11, rel_tol: 5e-11, ..coarse };
        let params = MetricParams::default();
        let (c, f) = (integrate(&coarse, &params, true).unwrap(), integrate(&fine, &params, true).unwrap());
        let (lc, lf) = (c.last(), f.last());
        prop_assert!((lc.y - lf.y).abs() < 10.0 * coarse.abs_tol);
        prop_assert!((lc.g - lf.g).abs() < 10.0 * coarse.abs_tol, "{} vs {}", lc.g, lf.g);
        prop_assert!((lc.gp - lf.gp).abs() < 10.0 * coarse.abs_tol * (1.0 + lc.gp.abs()));
    }

    #[test]
    fn h1_orbits_keep_their_segment_structure(a in 0.9f64..0.975, h in 0.005f64..0.02) {
        let cfg = OdeConfig { stop_after_necks: Some(2), ..OdeConfig::new(h, a) };
        let o = integrate(&cfg, &MetricParams::default(), true).unwrap();
        let sk = classify(&o).unwrap();
        prop_assert_eq!(sk.case, Case::H1);
        prop_assert!(monotonicity(&sk, &o).unwrap().all());
        let k = k_extremes(&sk, &o).unwrap();
        prop_assert!(k.max_y3_y4 <= 3.0);
        let order: Vec<f64> = ["y1", "y2", "y3", "y4", "y5"].iter().map(|l| sk.get(l).unwrap().y).collect();
        prop_assert!(order.windows(2).all(|w| w[0] < w[1]));
        let y6 = sk.y6.unwrap();
        prop_assert!(order[2] < y6 && y6 < order[3]);
        prop_assert_eq!(sk.y6_brackets, 1);
    }
}

#[test]
fn cutoff_bound_holds_with_the_smoothstep_constants() {
    let sup = 1.875 + 10.0 / 3f64.sqrt();
    for p in [-10.0, 1.0, 20.0] {
        let m = MetricParams::new(0.1, p).unwrap();
        let c = cutoff_constant(&m, 200_000);
        assert!(c <= sup + 1e-9, "p = {p}: {c}");
        if p != 1.0 {
            assert!(c > 0.99 * sup, "p = {p}: {c}");
        }
    }
}

#[test]
fn reconstructed_surface_is_even_and_positive() {
    let cfg = OdeConfig { stop_after_necks: Some(2), ..OdeConfig::new(0.01, 0.96) };
    let params = MetricParams::default();
    let o = integrate(&cfg, &params, true).unwrap();
    let sk = classify(&o).unwrap();
    let o = o.truncate(sk.get("y5").unwrap().y).unwrap();
    let s = build_surface(&o).unwrap();
    let n = s.x.len();
    for i in 0..n {
        assert!(s.f[i] > 0.0);
        assert_eq!(s.x[i], -s.x[n - 1 - i]);
        assert_eq!(s.f[i], s.f[n - 1 - i]);
    }
    assert!(s.l0 > 0.0);
}

#[test]
fn necks_near_criticality_follow_the_frozen_tau_slopes() {
    // g'(y1) ≈ −1/(2√τ), g'(y3) ≈ +1/(2√τ), with relative error bounded by a multiple of τ
    for h in [0.02, 0.01, 0.005] {
        let c = find_critical_a(h, &MetricParams::default(), &OdeConfig::default(), &ShootingConfig::default()).unwrap();
        for (label, sign) in [("y1", -1.0), ("y3", 1.0)] {
            let e = c.skeleton.get(label).unwrap();
            let rel = (e.gp * 2.0 * e.tau.sqrt() * sign - 1.0).abs();
            assert!(rel <= 5.0 * e.tau, "H = {h}, {label}: {rel} vs tau {}", e.tau);
        }
    }
}

#[test]
fn tau_stays_above_h_squared_at_the_first_two_inflections() {
    // at p = 20 the measured τ(y1)/H² is about 0.56; p = 40 clears the H² floor
    let params = MetricParams::new(0.1, 40.0).unwrap();
    for h in [0.02, 0.01, 0.005] {
        let c = find_critical_a(h, &params, &OdeConfig::default(), &ShootingConfig::default()).unwrap();
        let tau = |l: &'static str| c.skeleton.get(l).unwrap().tau;
        assert!(tau("y1") >= h * h && tau("y3") >= h * h, "H = {h}: {} {}", tau("y1"), tau("y3"));
        assert!(tau("y5") < 0.01 * tau("y3"));
    }
}
