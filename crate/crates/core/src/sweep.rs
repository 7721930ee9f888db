//! Convergence rates over a geometric sequence of H values.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{area, Ambient};
use crate::metric::MetricParams;
use crate::ode::OdeConfig;
use crate::shooting::{find_critical_a, CriticalResult, ShootingConfig};

/// Limit quantities measured on the critical profile at one H.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    #[serde(rename = "H")]
    pub h: f64,
    pub a_crit: f64,
    pub y4: f64,
    pub y5: f64,
    /// ∫ g√(1+g′²) dy over the profile.
    pub k_integral: f64,
    pub area_euclidean: f64,
    pub area_metric: f64,
    /// τ(y₅) − τ(y₃), signed.
    pub tau_decrement: f64,
}

impl RatePoint {
    pub fn y4_error(&self) -> f64 {
        (self.y4 - 2.0).abs()
    }

    pub fn y5_error(&self) -> f64 {
        (self.y5 - 3.0).abs()
    }

    pub fn k_integral_error(&self) -> f64 {
        (self.k_integral - 3.0).abs()
    }

    pub fn area_error(&self) -> f64 {
        (self.h * self.h * self.area_euclidean - 48.0 * PI).abs()
    }

    pub fn from_critical(crit: &CriticalResult) -> Result<Self> {
        let sk = &crit.skeleton;
        let (y3, y4, y5) = (sk.get("y3")?, sk.get("y4")?, sk.get("y5")?);
        let p = &crit.profile;
        let (ae, am) = area(p, &Ambient::of(p));
        Ok(RatePoint {
            h: crit.h,
            a_crit: crit.a_crit,
            y4: y4.y,
            y5: crit.y5_star,
            k_integral: p.integrate_y(0.0, p.y_end(), |s| s.k()),
            area_euclidean: ae,
            area_metric: am,
            tau_decrement: y5.tau - y3.tau,
        })
    }
}

pub fn rate_point(
    h: f64,
    params: &MetricParams,
    template: &OdeConfig,
    shoot: &ShootingConfig,
) -> Result<RatePoint> {
    RatePoint::from_critical(&find_critical_a(h, params, template, shoot)?)
}

/// Least-squares slope of log v against log H.
pub fn fit_exponent(hs: &[f64], vs: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = vs.iter().map(|v| v.abs().ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub y4: f64,
    pub y5: f64,
    pub k_integral: f64,
    pub area: f64,
    pub tau_decrement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub points: Vec<RatePoint>,
    pub exponents: Exponents,
}

impl RateTable {
    pub fn from_points(points: Vec<RatePoint>) -> Self {
        let hs: Vec<f64> = points.iter().map(|p| p.h).collect();
        let col = |f: fn(&RatePoint) -> f64| {
            let vs: Vec<f64> = points.iter().map(f).collect();
            fit_exponent(&hs, &vs)
        };
        let exponents = Exponents {
            y4: col(RatePoint::y4_error),
            y5: col(RatePoint::y5_error),
            k_integral: col(RatePoint::k_integral_error),
            area: col(RatePoint::area_error),
            tau_decrement: col(|p| p.tau_decrement),
        };
        RateTable { points, exponents }
    }

    /// Plain-text table, one row per H and a final row of exponents.
    pub fn render(&self) -> String {
        let mut s = format!(
            "{:>8} {:>14} {:>12} {:>12} {:>12} {:>12} {:>13}\n",
            "H", "a_crit", "|y4-2|", "|y5-3|", "|intk-3|", "|H2Ae-48pi|", "tau5-tau3"
        );
        for p in &self.points {
            s += &format!(
                "{:>8} {:>14.10} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>13.4e}\n",
                p.h,
                p.a_crit,
                p.y4_error(),
                p.y5_error(),
                p.k_integral_error(),
                p.area_error(),
                p.tau_decrement
            );
        }
        let e = &self.exponents;
        s += &format!(
            "{:>8} {:>14} {:>12.3} {:>12.3} {:>12.3} {:>12.3} {:>13.3}\n",
            "rate", "", e.y4, e.y5, e.k_integral, e.area, e.tau_decrement
        );
        s
    }
}

/// Checks that hs has at least three entries with a common ratio.
pub fn check_geometric(hs: &[f64]) -> Result<()> {
    if hs.len() < 3 {
        return Err(Error::Config(format!("need at least 3 H values, got {}", hs.len())));
    }
    if hs.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(Error::Config("H values must be positive".into()));
    }
    let q = hs[1] / hs[0];
    for w in hs.windows(2) {
        if ((w[1] / w[0]) / q - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("H list {hs:?} is not a geometric progression")));
        }
    }
    Ok(())
}

/// Runs every H independently on the current rayon pool; rows come back in input order.
pub fn sweep(
    hs: &[f64],
    params: &MetricParams,
    template: &OdeConfig,
    shoot: &ShootingConfig,
) -> Result<RateTable> {
    check_geometric(hs)?;
    let points = hs
        .par_iter()
        .map(|&h| rate_point(h, params, template, shoot))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateTable::from_points(points))
}
