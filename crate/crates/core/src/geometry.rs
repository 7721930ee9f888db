//! The physical surface: meridian r = f(x) = (2/H)·g(Hx/2), mirrored evenly
//! across x = 0, its mean curvature in the ambient metric, and its areas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{chi, chi_gradient, MetricParams};
use crate::ode::{Orbit, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Ambient {
    /// Euclidean space.
    Flat,
    Schwarzschild(MetricParams),
}

impl From<MetricParams> for Ambient {
    fn from(p: MetricParams) -> Self {
        Ambient::Schwarzschild(p)
    }
}

impl Ambient {
    pub fn of(orbit: &Orbit) -> Self {
        if orbit.model.perturbed {
            Ambient::Schwarzschild(orbit.model.params)
        } else {
            Ambient::Flat
        }
    }
}

/// Mean curvature of the surface of revolution r = f(x) at one meridian point,
/// from the reduced expression
///   −(1+g₁)^{−1/2}(1+f′²)^{−3/2} f″ − 2(V_e·x′)(l⁻³+l⁻⁴)(1+g₁)^{−3/2}
///   + (1+g₁)^{−1/2}(1+f′²)^{−1/2} f⁻¹ + ½(1+g₁)^{−1/2} χ⁻¹ V_e(χ),
/// with V_e = (∂_r − f′∂_x)/√(1+f′²) and V_e·x′ = (f − x f′)/√(1+f′²).
pub fn mean_curvature_full(x: f64, f: f64, fp: f64, fpp: f64, ambient: &Ambient) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::Domain(format!("f = {f} ≤ 0")));
    }
    let w = fp.hypot(1.0);
    let q = w * w;
    match ambient {
        Ambient::Flat => Ok(-fpp / (q * w) + 1.0 / (w * f)),
        Ambient::Schwarzschild(params) => {
            let l = f.hypot(x);
            if l < 1.0 {
                return Err(Error::Domain(format!("l = {l} < 1")));
            }
            let g1 = 2.0 / l + 1.0 / (l * l);
            let s = (1.0 + g1).sqrt();
            let ve_x = (f - x * fp) / w;
            let c = chi(f, x, params)?;
            let (c_r, c_x) = chi_gradient(f, x, params)?;
            let ve_chi = (c_r - fp * c_x) / w;
            let l3 = l * l * l;
            Ok(-fpp / (s * q * w) - 2.0 * ve_x * (1.0 / l3 + 1.0 / (l3 * l)) / (s * s * s)
                + 1.0 / (s * w * f)
                + 0.5 * ve_chi / (s * c))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceProfile {
    #[serde(rename = "H")]
    pub h: f64,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub h_residual: Vec<f64>,
    pub l0: f64,
    pub area_euclidean: f64,
    pub area_metric: f64,
    pub h_residual_max: f64,
}

impl SurfaceProfile {
    /// Interior local minima of f below 1/H (the unscaled threshold g < 1/2).
    pub fn interior_necks(&self) -> Vec<(f64, f64)> {
        let n = self.f.len();
        (1..n.saturating_sub(1))
            .filter(|&i| self.f[i] <= self.f[i - 1] && self.f[i] < self.f[i + 1])
            .filter(|&i| self.f[i] < 1.0 / self.h)
            .map(|i| (self.x[i], self.f[i]))
            .collect()
    }
}

const UNIFORM_POINTS: usize = 2001;
const GRADED_POINTS: usize = 200;

/// Euclidean and metric areas of the doubled surface by quadrature on the orbit.
pub fn area(profile: &Orbit, ambient: &Ambient) -> (f64, f64) {
    let h = profile.model.h;
    let y_end = profile.y_end();
    let scale = 16.0 * std::f64::consts::PI / (h * h);
    let euclid = scale * profile.integrate_y(0.0, y_end, |s| s.k());
    let metric = match ambient {
        Ambient::Flat => euclid,
        Ambient::Schwarzschild(params) => {
            scale
                * profile.integrate_y(0.0, y_end, |s| {
                    let (r, x) = (2.0 * s.g / h, 2.0 * s.y / h);
                    let l = r.hypot(x);
                    let g1 = 2.0 / l + 1.0 / (l * l);
                    let c = chi(r, x, params).unwrap_or(f64::NAN);
                    (1.0 + g1) * c.sqrt() * s.k()
                })
        }
    };
    (euclid, metric)
}

/// Unscaled, evenly reflected surface of a profile with its curvature residual.
pub fn build_surface(profile: &Orbit) -> Result<SurfaceProfile> {
    let ambient = Ambient::of(profile);
    let h = profile.model.h;
    let y_end = profile.y_end();
    let mut states: Vec<State> = (0..UNIFORM_POINTS - 1)
        .filter_map(|i| profile.state_at_y(y_end * i as f64 / (UNIFORM_POINTS - 1) as f64))
        .collect();
    // every integrator sample (this resolves the necks), plus log-spaced radii on the final branch
    let branch = profile.final_g_branch();
    let start = profile.samples.len() - branch.len();
    states.extend(profile.samples.iter().map(|s| s.state()));
    if branch.len() >= 2 {
        let g_end = profile.last().g;
        let g_top = branch[0].g;
        for i in 0..GRADED_POINTS {
            let g = g_end * (g_top / g_end).powf(i as f64 / GRADED_POINTS as f64);
            let seg = (start..profile.samples.len() - 1).find(|&j| {
                let (a, b) = (profile.samples[j].g, profile.samples[j + 1].g);
                g <= a.max(b) && g >= a.min(b)
            });
            if let Some(j) = seg {
                states.push(profile.state_at_g_on_segment(j, g));
            }
        }
    }
    states.push(profile.last().state());
    states.sort_by(|a, b| a.y.total_cmp(&b.y));
    states.dedup_by(|a, b| a.y == b.y);

    let mut half: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(states.len());
    let mut l0 = f64::INFINITY;
    for s in &states {
        let gpp = profile.model.gpp(s)?;
        let (x, f, fp, fpp) = (2.0 * s.y / h, 2.0 * s.g / h, s.gp, 0.5 * h * gpp);
        let res = mean_curvature_full(x, f, fp, fpp, &ambient)? - h;
        l0 = l0.min(x.hypot(f));
        half.push((x, f, fp, res));
    }
    let mut out = SurfaceProfile {
        h,
        x: Vec::new(),
        f: Vec::new(),
        fp: Vec::new(),
        h_residual: Vec::new(),
        l0,
        area_euclidean: 0.0,
        area_metric: 0.0,
        h_residual_max: 0.0,
    };
    let mirrored = half.iter().rev().filter(|p| p.0 > 0.0).map(|&(x, f, fp, r)| (-x, f, -fp, r));
    for (x, f, fp, r) in mirrored.chain(half.iter().copied()) {
        out.x.push(x);
        out.f.push(f);
        out.fp.push(fp);
        out.h_residual.push(r);
        out.h_residual_max = out.h_residual_max.max(r.abs());
    }
    let (ae, am) = area(profile, &ambient);
    out.area_euclidean = ae;
    out.area_metric = am;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, OdeConfig};

    #[test]
    fn flat_unit_sphere() {
        for i in 0..50 {
            let x = -0.98 + 0.04 * i as f64;
            let f = (1.0 - x * x).sqrt();
            let fp = -x / f;
            let fpp = -1.0 / (f * f * f);
            let h = mean_curvature_full(x, f, fp, fpp, &Ambient::Flat).unwrap();
            assert!((h - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn conformal_coordinate_sphere() {
        // p = 1 makes the metric (1+1/l)²δ; a sphere of radius L then has H = (2/L)(1+1/L)⁻²
        let params = MetricParams::new(0.1, 1.0).unwrap();
        let big_l = 7.0;
        for i in 1..39 {
            let x = big_l * (-0.95 + 0.05 * i as f64);
            let f = (big_l * big_l - x * x).sqrt();
            let fp = -x / f;
            let fpp = -big_l * big_l / (f * f * f);
            let h = mean_curvature_full(x, f, fp, fpp, &params.into()).unwrap();
            let want = 2.0 / big_l / (1.0 + 1.0 / big_l).powi(2);
            assert!((h - want).abs() < 1e-14, "x={x}: {h} vs {want}");
        }
    }

    #[test]
    fn interior_is_rejected() {
        let params = MetricParams::default();
        assert!(mean_curvature_full(0.1, 0.2, 0.0, 0.0, &params.into()).is_err());
    }

    #[test]
    fn unit_sphere_from_the_circle_orbit() {
        let mut c = OdeConfig::new(2.0, 1.0);
        c.abs_tol = 1e-12;
        c.rel_tol = 1e-12;
        let o = integrate(&c, &MetricParams::default(), false).unwrap();
        let s = build_surface(&o).unwrap();
        for (x, f) in s.x.iter().zip(&s.f) {
            assert!((x * x + f * f - 1.0).abs() < 1e-9, "x={x} f={f}");
        }
        assert!((s.area_euclidean - 4.0 * std::f64::consts::PI).abs() < 1e-9);
        assert_eq!(s.area_metric, s.area_euclidean);
        assert!(s.h_residual_max < 1e-6, "{}", s.h_residual_max);
        assert!(s.x.windows(2).all(|w| w[1] > w[0]));
    }
}
