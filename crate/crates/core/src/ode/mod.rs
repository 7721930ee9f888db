//! The rescaled meridian equation
//!
//!   g″ = (1/g)(1+g′²) − (2+ρ)(1+g′²)^{3/2},   g(0) = a, g′(0) = 0,
//!
//! where ρ = O(H) carries the metric perturbation. With ρ ≡ 0 this is the
//! Delaunay equation whose first integral is τ = −g² + g/√(1+g′²).

mod integrator;
mod orbit;

pub use integrator::integrate;
pub use orbit::{BlowupInfo, Chart, Event, EventKind, Orbit, Sample, Terminal};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{phi, phi_prime, MetricParams};

/// One phase-space point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub y: f64,
    pub g: f64,
    pub gp: f64,
}

impl State {
    pub fn new(y: f64, g: f64, gp: f64) -> Self {
        State { y, g, gp }
    }

    /// Distance to the origin in rescaled units, d = (H/2)·l.
    pub fn d(&self) -> f64 {
        self.y.hypot(self.g)
    }

    pub fn slope_norm(&self) -> f64 {
        self.gp.hypot(1.0)
    }

    pub fn k(&self) -> f64 {
        self.g * self.slope_norm()
    }

    pub fn tau(&self) -> f64 {
        -self.g * self.g + self.g / self.slope_norm()
    }

    // (g − y·g′)/√(1+g′²) and (y + g·g′)/√(1+g′²), written so that huge g′ stays finite.
    fn normal_projections(&self) -> (f64, f64) {
        let w = self.slope_norm();
        let (c, s) = (1.0 / w, self.gp / w);
        (self.g * c - self.y * s, self.y * c + self.g * s)
    }
}

/// Integrator configuration for one orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeConfig {
    #[serde(rename = "H")]
    pub h: f64,
    pub a: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub gp_switch: f64,
    pub gp_blowup: f64,
    pub y_max: f64,
    /// Largest step in either chart.
    pub max_step: f64,
    /// Stop as soon as this many necks (g′ = 0 with g < 1/2) have been seen.
    #[serde(default)]
    pub stop_after_necks: Option<usize>,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            h: 0.01,
            a: 1.0,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            gp_switch: 10.0,
            gp_blowup: 1e6,
            y_max: 20.0,
            max_step: 0.02,
            stop_after_necks: None,
        }
    }
}

impl OdeConfig {
    pub fn new(h: f64, a: f64) -> Self {
        OdeConfig { h, a, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("H must be positive, got {}", self.h));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad(format!("initial radius a must be positive, got {}", self.a));
        }
        for (name, t) in [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol)] {
            if !(t > 0.0 && t <= 1e-4) {
                return bad(format!("{name} must lie in (0, 1e-4], got {t}"));
            }
        }
        if !(self.gp_switch > 0.0 && self.gp_switch < self.gp_blowup) {
            return bad(format!(
                "need 0 < gp_switch < gp_blowup, got {} and {}",
                self.gp_switch, self.gp_blowup
            ));
        }
        if !(self.y_max > 0.0) {
            return bad(format!("y_max must be positive, got {}", self.y_max));
        }
        if !(self.max_step > 0.0) {
            return bad(format!("max_step must be positive, got {}", self.max_step));
        }
        Ok(())
    }
}

fn cutoff_at(state: &State, params: &MetricParams) -> (f64, f64) {
    let s = if state.y == 0.0 {
        f64::INFINITY
    } else {
        (state.g / state.y).abs()
    };
    (phi(s, params), phi_prime(s, params))
}

/// The exact perturbation ρ, evaluated term by term.
pub fn rho_exact(state: &State, h: f64, params: &MetricParams) -> Result<f64> {
    let d = state.d();
    if !(d > 0.0) {
        return Err(Error::Domain(format!("d = 0 at y = {}", state.y)));
    }
    let (ph, dph) = cutoff_at(state, params);
    let (nrm, tan) = state.normal_projections();
    let hh = h * h;
    let d2 = d * d;
    let d3 = d2 * d;
    let g1 = h / d + hh / (4.0 * d2);
    let n = 1.0 + h / d + ph * hh / (4.0 * d2);
    let mut rho = h / d
        + (h / 2.0 + hh / (4.0 * d)) * nrm / (d3 * (1.0 + g1))
        + (h / 2.0 + hh * ph / (4.0 * d)) * nrm / (d3 * n);
    if dph != 0.0 {
        rho -= hh / (8.0 * d2) * dph / n * tan / (state.y * state.y);
    }
    Ok(rho)
}

/// Second-order truncation of ρ in H. The H² normal term carries d⁴: both
/// correction factors 1/(1+g₁) and 1/N contribute −H/d at first order.
pub fn rho_expanded(state: &State, h: f64, params: &MetricParams) -> Result<f64> {
    let d = state.d();
    if !(d > 0.0) {
        return Err(Error::Domain(format!("d = 0 at y = {}", state.y)));
    }
    let (ph, dph) = cutoff_at(state, params);
    let (nrm, tan) = state.normal_projections();
    let d3 = d * d * d;
    let mut rho = h / d + h * nrm / d3 + h * h * (ph - 3.0) * nrm / (4.0 * d3 * d);
    if dph != 0.0 {
        rho -= h * h * dph * tan / (8.0 * d * d * state.y * state.y);
    }
    Ok(rho)
}

/// ρ at the singular point, where d → y and (g − y·g′)/√(1+g′²) → y while φ → 1, φ′ → 0.
pub fn rho_at_pole(y: f64, h: f64) -> f64 {
    let hh = h * h;
    let g1 = h / y + hh / (4.0 * y * y);
    let n = 1.0 + h / y + hh / (4.0 * y * y);
    let d2 = y * y;
    h / y + (h / 2.0 + hh / (4.0 * y)) / (d2 * (1.0 + g1)) + (h / 2.0 + hh / (4.0 * y)) / (d2 * n)
}

/// g″ given ρ.
pub fn second_derivative(state: &State, rho: f64) -> Result<f64> {
    if !(state.g > 0.0) {
        return Err(Error::Domain(format!("g = {} ≤ 0 at y = {}", state.g, state.y)));
    }
    let q = 1.0 + state.gp * state.gp;
    Ok(q / state.g - (2.0 + rho) * q * q.sqrt())
}

/// Inflection function F = 1 − (2+ρ)k; g″ = (1/g)(1+g′²)·F.
pub fn inflection(state: &State, rho: f64) -> f64 {
    1.0 - (2.0 + rho) * state.k()
}

/// (dg/dy, dgp/dy) for the perturbed equation.
pub fn rhs(state: &State, h: f64, params: &MetricParams) -> Result<(f64, f64)> {
    let rho = rho_exact(state, h, params)?;
    Ok((state.gp, second_derivative(state, rho)?))
}

/// (dg/dy, dgp/dy) for the Delaunay equation.
pub fn delaunay_rhs(state: &State) -> Result<(f64, f64)> {
    Ok((state.gp, second_derivative(state, 0.0)?))
}

/// Which equation an orbit solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    #[serde(rename = "H")]
    pub h: f64,
    pub params: MetricParams,
    pub perturbed: bool,
}

impl Model {
    pub fn rho(&self, state: &State) -> Result<f64> {
        if self.perturbed {
            rho_exact(state, self.h, &self.params)
        } else {
            Ok(0.0)
        }
    }

    pub fn gpp(&self, state: &State) -> Result<f64> {
        second_derivative(state, self.rho(state)?)
    }
}
