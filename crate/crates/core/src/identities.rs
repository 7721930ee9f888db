//! Closed-form integrals checked by quadrature: the comparison-circle integrals,
//! their orbit-side counterparts, and the cutoff's scalar flux through a slab.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::analysis::{ComparisonSphere, EventSkeleton};
use crate::error::{Error, Result};
use crate::metric::{chi, metric_components, phi_prime, phi_second, MetricParams};
use crate::ode::{Orbit, State};
use crate::quadrature::integrate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub analytic: f64,
    pub numeric: f64,
    pub abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    pub fn new(name: impl Into<String>, analytic: f64, numeric: f64, tolerance: f64) -> Self {
        let abs_error = (numeric - analytic).abs();
        IdentityReport {
            name: name.into(),
            analytic,
            numeric,
            abs_error,
            tolerance,
            pass: abs_error <= tolerance,
        }
    }
}

/// Weight 1/√(y²+g²).
pub fn weight_a(s: &State) -> f64 {
    1.0 / s.d()
}

/// Weight (g − y g′)/((y²+g²)^{3/2} √(1+g′²)).
pub fn weight_b(s: &State) -> f64 {
    let w = s.slope_norm();
    let nrm = s.g / w - s.y * (s.gp / w);
    nrm / s.d().powi(3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereIntegrals {
    pub i0: f64,
    pub i1: f64,
    pub i2: f64,
}

// ∫ weight(h) h h′ dy over θ ∈ [t0, t1] after y = y₄ + sin θ, where h h′ dy = −sin θ cos θ dθ.
fn circle_integral(y4: f64, t0: f64, t1: f64, weight: impl Fn(&State) -> f64) -> f64 {
    integrate(
        |t: f64| {
            let (sn, cs) = t.sin_cos();
            let s = State::new(y4 + sn, cs, -sn / cs);
            weight(&s) * (-sn * cs)
        },
        t0,
        t1,
        1e-15,
        1e-14,
    )
    .value
}

/// (I0, I1, I2) over [y₄−1, y₄+1] for the unit circle centred at y₄.
pub fn sphere_integrals(y4: f64) -> Result<SphereIntegrals> {
    if !(y4 > 1.0) {
        return Err(Error::Domain(format!("y4 = {y4} must exceed 1")));
    }
    Ok(SphereIntegrals {
        i0: circle_integral(y4, -FRAC_PI_2, FRAC_PI_2, |s| weight_a(s) + weight_b(s)),
        i1: circle_integral(y4, -FRAC_PI_2, FRAC_PI_2, weight_a),
        i2: circle_integral(y4, -FRAC_PI_2, FRAC_PI_2, weight_b),
    })
}

/// Closed forms (0, 2/(3y₄²), −2/(3y₄²)).
pub fn sphere_integrals_analytic(y4: f64) -> SphereIntegrals {
    let v = 2.0 / (3.0 * y4 * y4);
    SphereIntegrals { i0: 0.0, i1: v, i2: -v }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub orbit: f64,
    pub sphere: f64,
    pub difference: f64,
}

impl Comparison {
    fn new(orbit: f64, sphere: f64) -> Self {
        Comparison { orbit, sphere, difference: orbit - sphere }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitComparisons {
    /// ∫ A g g′ on [y₃, y₄] against the left half circle.
    pub a_y3_y4: Comparison,
    pub b_y3_y4: Comparison,
    /// Same on [y₄, y₅] against the right half circle.
    pub a_y4_y5: Option<Comparison>,
    pub b_y4_y5: Option<Comparison>,
    /// H ∫_{y₃}^{y₅} (A + B) g g′ dy.
    pub combined: Option<f64>,
}

pub fn orbit_integrals(orbit: &Orbit, skeleton: &EventSkeleton) -> Result<OrbitComparisons> {
    let y3 = skeleton.get("y3")?.y;
    let y4 = skeleton.get("y4")?.y;
    let y5 = skeleton.y5.map(|p| p.y);
    let c = ComparisonSphere { y4 };
    let on_orbit = |lo: f64, hi: f64, w: fn(&State) -> f64| {
        orbit.integrate_y(lo, hi, |s| w(s) * s.g * s.gp)
    };
    let half = |left: bool, w: fn(&State) -> f64| {
        let (t0, t1) = if left { (-FRAC_PI_2, 0.0) } else { (0.0, FRAC_PI_2) };
        circle_integral(c.y4, t0, t1, w)
    };
    let combined = y5.map(|y5| {
        orbit.model.h * orbit.integrate_y(y3, y5, |s| (weight_a(s) + weight_b(s)) * s.g * s.gp)
    });
    Ok(OrbitComparisons {
        a_y3_y4: Comparison::new(on_orbit(y3, y4, weight_a), half(true, weight_a)),
        b_y3_y4: Comparison::new(on_orbit(y3, y4, weight_b), half(true, weight_b)),
        a_y4_y5: y5.map(|y5| Comparison::new(on_orbit(y4, y5, weight_a), half(false, weight_a))),
        b_y4_y5: y5.map(|y5| Comparison::new(on_orbit(y4, y5, weight_b), half(false, weight_b))),
        combined,
    })
}

/// Slab integral over α ≤ x ≤ β of −(2xφ′(r/x)/r + φ″(r/x))/x⁴ in cylindrical
/// coordinates. φ′ and φ″ vanish off λx ≤ r ≤ 2λx, so the radial integral runs there.
pub fn scalar_flux(alpha: f64, beta: f64, params: &MetricParams) -> Result<f64> {
    if !(alpha >= 1.0 && beta > alpha) {
        return Err(Error::Domain(format!("need 1 ≤ alpha < beta, got [{alpha}, {beta}]")));
    }
    let lam = params.lambda;
    let radial = |x: f64| {
        integrate(
            |r: f64| {
                let s = r / x;
                -(2.0 * x * phi_prime(s, params) / r + phi_second(s, params)) / x.powi(4)
                    * 2.0
                    * PI
                    * r
            },
            lam * x,
            2.0 * lam * x,
            1e-17,
            1e-13,
        )
        .value
    };
    Ok(integrate(radial, alpha, beta, 1e-15, 1e-12).value)
}

pub fn scalar_flux_analytic(alpha: f64, beta: f64, p: f64) -> f64 {
    2.0 * PI * (1.0 / beta - 1.0 / alpha) * (p - 1.0)
}

/// The fixed identity suite.
pub fn identity_suite() -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for y4 in [1.5, 2.0, 3.0, 10.0] {
        let num = sphere_integrals(y4)?;
        let ana = sphere_integrals_analytic(y4);
        out.push(IdentityReport::new(format!("I0(y4={y4})"), ana.i0, num.i0, 1e-10));
        out.push(IdentityReport::new(format!("I1(y4={y4})"), ana.i1, num.i1, 1e-10));
        out.push(IdentityReport::new(format!("I2(y4={y4})"), ana.i2, num.i2, 1e-10));
    }
    let y4 = 1.000001;
    let num = sphere_integrals(y4)?;
    out.push(IdentityReport::new("I1(y4=1.000001)", 2.0 / (3.0 * y4 * y4), num.i1, 1e-8));
    for (a, b, p) in [(1.0, 2.0, 4.0), (2.0, 4.0, 4.0), (1.0, 3.0, -10.0), (1.5, 5.0, 20.0), (1.0, 2.0, 1.0)] {
        let params = MetricParams::new(0.1, p)?;
        let ana = scalar_flux_analytic(a, b, p);
        let tol = (1e-8 * ana.abs()).max(1e-14);
        out.push(IdentityReport::new(
            format!("flux(alpha={a}, beta={b}, p={p})"),
            ana,
            scalar_flux(a, b, &params)?,
            tol,
        ));
    }
    // r² + T_θθ = r²χ(1 + T_rr) at a point inside the cutoff band
    let params = MetricParams::default();
    let (r, x) = (1.5, 10.0);
    let t = metric_components(r, x, &params)?;
    let lhs = r * r + t.t_thetatheta;
    let rhs = r * r * chi(r, x, &params)? * (1.0 + t.t_rr);
    out.push(IdentityReport::new("chi factorisation", lhs, rhs, 1e-14 * lhs));
    Ok(out)
}
