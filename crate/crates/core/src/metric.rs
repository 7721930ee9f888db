//! The asymptotically Schwarzschild metric family.
//!
//! In cylindrical coordinates (r, θ, x) around the symmetry axis the metric is
//! ds² = (1+T_rr) dr² + (r²+T_θθ) dθ² + (1+T_xx) dx² with
//! T_rr = T_xx = 2/l + 1/l² and T_θθ = r²(2/l + φ(|r/x|)/l²), l = √(r²+x²).
//! The cutoff φ interpolates from 1 near the axis to p away from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of φ on the transition band [λ, 2λ].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    #[default]
    QuinticSmoothstep,
}

impl std::str::FromStr for Cutoff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quintic" | "quintic_smoothstep" | "quinticsmoothstep" => Ok(Cutoff::QuinticSmoothstep),
            other => Err(Error::Config(format!("unknown cutoff profile `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    pub lambda: f64,
    pub p: f64,
    #[serde(default)]
    pub cutoff: Cutoff,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            lambda: 0.1,
            p: 20.0,
            cutoff: Cutoff::QuinticSmoothstep,
        }
    }
}

impl MetricParams {
    pub fn new(lambda: f64, p: f64) -> Result<Self> {
        let m = MetricParams {
            lambda,
            p,
            cutoff: Cutoff::QuinticSmoothstep,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !self.p.is_finite() {
            return Err(Error::Config(format!("p must be finite, got {}", self.p)));
        }
        Ok(())
    }

    /// Cutoff value φ(s).
    pub fn phi(&self, s: f64) -> f64 {
        phi(s, self)
    }

    pub fn phi_prime(&self, s: f64) -> f64 {
        phi_prime(s, self)
    }
}

// S(t) = 6t⁵ − 15t⁴ + 10t³ and its derivatives.
fn smoothstep(t: f64) -> f64 {
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

fn smoothstep_d1(t: f64) -> f64 {
    30.0 * t * t * (t - 1.0) * (t - 1.0)
}

fn smoothstep_d2(t: f64) -> f64 {
    60.0 * t * (t - 1.0) * (2.0 * t - 1.0)
}

/// φ(s). `s = +∞` stands for points on the plane x = 0 and gives p.
pub fn phi(s: f64, params: &MetricParams) -> f64 {
    let lam = params.lambda;
    if s <= lam {
        1.0
    } else if s >= 2.0 * lam {
        params.p
    } else {
        match params.cutoff {
            Cutoff::QuinticSmoothstep => 1.0 + (params.p - 1.0) * smoothstep((s - lam) / lam),
        }
    }
}

/// dφ/ds, exactly zero outside the open band (λ, 2λ).
pub fn phi_prime(s: f64, params: &MetricParams) -> f64 {
    let lam = params.lambda;
    if s <= lam || s >= 2.0 * lam {
        0.0
    } else {
        match params.cutoff {
            Cutoff::QuinticSmoothstep => (params.p - 1.0) * smoothstep_d1((s - lam) / lam) / lam,
        }
    }
}

/// d²φ/ds².
pub fn phi_second(s: f64, params: &MetricParams) -> f64 {
    let lam = params.lambda;
    if s <= lam || s >= 2.0 * lam {
        0.0
    } else {
        match params.cutoff {
            Cutoff::QuinticSmoothstep => {
                (params.p - 1.0) * smoothstep_d2((s - lam) / lam) / (lam * lam)
            }
        }
    }
}

/// The cutoff argument |r/x|, with x = 0 mapped to +∞.
pub fn cutoff_arg(r: f64, x: f64) -> f64 {
    if x == 0.0 {
        f64::INFINITY
    } else {
        (r / x).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricComponents {
    pub t_rr: f64,
    pub t_thetatheta: f64,
    pub t_xx: f64,
}

fn exterior_radius(r: f64, x: f64) -> Result<f64> {
    let l = r.hypot(x);
    if !(l >= 1.0) {
        return Err(Error::Domain(format!("l = {l} < 1 at (r, x) = ({r}, {x})")));
    }
    Ok(l)
}

pub fn metric_components(r: f64, x: f64, params: &MetricParams) -> Result<MetricComponents> {
    let l = exterior_radius(r, x)?;
    let g1 = 2.0 / l + 1.0 / (l * l);
    let ph = phi(cutoff_arg(r, x), params);
    Ok(MetricComponents {
        t_rr: g1,
        t_thetatheta: r * r * (2.0 / l + ph / (l * l)),
        t_xx: g1,
    })
}

/// χ = (1 + 2/l + φ/l²) / (1 + 2/l + 1/l²), so that r² + T_θθ = r²χ(1 + T_rr).
pub fn chi(r: f64, x: f64, params: &MetricParams) -> Result<f64> {
    let l = exterior_radius(r, x)?;
    let ph = phi(cutoff_arg(r, x), params);
    let il = 1.0 / l;
    Ok((1.0 + 2.0 * il + ph * il * il) / (1.0 + 2.0 * il + il * il))
}

/// (∂χ/∂r, ∂χ/∂x) from the closed form.
pub fn chi_gradient(r: f64, x: f64, params: &MetricParams) -> Result<(f64, f64)> {
    let l = exterior_radius(r, x)?;
    let s = cutoff_arg(r, x);
    let ph = phi(s, params);
    let dph = phi_prime(s, params);
    let il = 1.0 / l;
    let num = 1.0 + 2.0 * il + ph * il * il;
    let den = 1.0 + 2.0 * il + il * il;
    let dnum_dl = -2.0 * il * il - 2.0 * ph * il * il * il;
    let dden_dl = -2.0 * il * il - 2.0 * il * il * il;
    let (l_r, l_x) = (r * il, x * il);
    // s = r/|x| on x ≠ 0; φ′ vanishes wherever x = 0 so the x = 0 branch never contributes.
    let (s_r, s_x) = if dph != 0.0 {
        (1.0 / x.abs(), -r * x.signum() / (x * x))
    } else {
        (0.0, 0.0)
    };
    let num_r = dnum_dl * l_r + dph * il * il * s_r;
    let num_x = dnum_dl * l_x + dph * il * il * s_x;
    let den_r = dden_dl * l_r;
    let den_x = dden_dl * l_x;
    let d2 = den * den;
    Ok(((num_r * den - num * den_r) / d2, (num_x * den - num * den_x) / d2))
}

/// Measured constant C in λ·sup|φ′| + λ²·sup|φ″| ≤ C·|p−1|, sampled on `n` points of [0, 3λ].
/// Returns 0 for p = 1.
pub fn cutoff_constant(params: &MetricParams, n: usize) -> f64 {
    if params.p == 1.0 {
        return 0.0;
    }
    let lam = params.lambda;
    let (mut d1, mut d2) = (0.0f64, 0.0f64);
    for i in 0..=n {
        let s = 3.0 * lam * i as f64 / n as f64;
        d1 = d1.max(phi_prime(s, params).abs());
        d2 = d2.max(phi_second(s, params).abs());
    }
    (lam * d1 + lam * lam * d2) / (params.p - 1.0).abs()
}
