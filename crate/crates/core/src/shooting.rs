//! Searches over the shooting parameter a and the cutoff value p.
//!
//! a′(H) is the infimum of the initial radii whose orbit is not H1. Bisection
//! on the classify predicate brackets it; the profile just below a′(H) carries
//! two small necks and a nearly singular inflection y₅.

use serde::{Deserialize, Serialize};

use crate::analysis::{classify, classify_case, Case, EventSkeleton};
use crate::error::{Error, Result};
use crate::metric::MetricParams;
use crate::ode::{integrate, rho_at_pole, Chart, OdeConfig, Orbit};
use crate::roots::bisect_predicate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig {
    pub a_lo: f64,
    pub a_hi: f64,
    pub bracket_tol: f64,
    pub eps_pullback: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig { a_lo: 0.95, a_hi: 1.05, bracket_tol: 1e-12, eps_pullback: 1e-8 }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_lo < self.a_hi && self.a_lo > 0.0) {
            return Err(Error::Config(format!("bad a-bracket [{}, {}]", self.a_lo, self.a_hi)));
        }
        if !(self.bracket_tol > 0.0 && self.eps_pullback > 0.0) {
            return Err(Error::Config("bracket_tol and eps_pullback must be positive".into()));
        }
        Ok(())
    }
}

fn with_a(template: &OdeConfig, h: f64, a: f64) -> OdeConfig {
    OdeConfig { h, a, ..*template }
}

/// Case of the orbit started at a. Integration stops at the second neck.
pub fn case_at(h: f64, a: f64, params: &MetricParams, template: &OdeConfig) -> Result<Case> {
    let cfg = OdeConfig { stop_after_necks: Some(2), ..with_a(template, h, a) };
    classify_case(&integrate(&cfg, params, true)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalResult {
    #[serde(rename = "H")]
    pub h: f64,
    pub params: MetricParams,
    pub a_crit: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub bracket_width: f64,
    pub eps_pullback: f64,
    pub skeleton: EventSkeleton,
    /// |g′| at y₁ and at y₅ on the profile.
    pub gp_y1: f64,
    pub gp_y5: f64,
    pub terminal_g: f64,
    pub terminal_gp_magnitude: f64,
    pub y5_star: f64,
    pub profile: Orbit,
}

/// Bisection for a′(H) on [a_lo, a_hi].
pub fn find_critical_a(
    h: f64,
    params: &MetricParams,
    template: &OdeConfig,
    shoot: &ShootingConfig,
) -> Result<CriticalResult> {
    shoot.validate()?;
    let lo_case = case_at(h, shoot.a_lo, params, template)?;
    let hi_case = case_at(h, shoot.a_hi, params, template)?;
    if lo_case != Case::H1 || hi_case == Case::H1 {
        return Err(Error::BracketInvalid {
            lo: shoot.a_lo,
            hi: shoot.a_hi,
            lo_case: lo_case.to_string(),
            hi_case: hi_case.to_string(),
        });
    }
    find_critical_a_in(h, params, template, shoot, shoot.a_lo, shoot.a_hi)
}

/// Bisection on a bracket already known to straddle a′(H).
pub fn find_critical_a_in(
    h: f64,
    params: &MetricParams,
    template: &OdeConfig,
    shoot: &ShootingConfig,
    lo: f64,
    hi: f64,
) -> Result<CriticalResult> {
    let (lo, hi) = bisect_predicate(
        |a| Ok::<_, Error>(case_at(h, a, params, template)? == Case::H1),
        lo,
        hi,
        shoot.bracket_tol,
    )?;
    let a_crit = 0.5 * (lo + hi);
    let (profile, sk) = near_critical_profile(h, a_crit - shoot.eps_pullback, params, template)?;
    let p1 = sk.get("y1")?;
    let p5 = sk.get("y5")?;
    let last = *profile.last();
    Ok(CriticalResult {
        h,
        params: *params,
        a_crit,
        bracket_lo: lo,
        bracket_hi: hi,
        bracket_width: hi - lo,
        eps_pullback: shoot.eps_pullback,
        gp_y1: p1.gp.abs(),
        gp_y5: p5.gp.abs(),
        terminal_g: last.g,
        terminal_gp_magnitude: last.gp.abs(),
        y5_star: p5.y,
        skeleton: sk,
        profile,
    })
}

/// Orbit at a cut at its y₅ (the inflection of largest |g′| before the second
/// neck), with the skeleton of the uncut orbit.
pub fn near_critical_profile(
    h: f64,
    a: f64,
    params: &MetricParams,
    template: &OdeConfig,
) -> Result<(Orbit, EventSkeleton)> {
    let cfg = OdeConfig { stop_after_necks: Some(2), ..with_a(template, h, a) };
    let full = integrate(&cfg, params, true)?;
    let sk = classify(&full)?;
    let y5 = sk.get("y5")?.y;
    Ok((full.truncate(y5)?, sk))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceStep {
    pub p: f64,
    pub a_crit: f64,
    pub gp_y1: f64,
    pub gp_y5: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceResult {
    #[serde(rename = "H")]
    pub h: f64,
    pub lambda: f64,
    pub p: f64,
    pub trace: Vec<BalanceStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceConfig {
    pub p_lo: f64,
    pub p_hi: f64,
    pub p_tol: f64,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig { p_lo: -10.0, p_hi: 20.0, p_tol: 1e-4 }
    }
}

struct BalanceEval<'a> {
    h: f64,
    lambda: f64,
    template: &'a OdeConfig,
    shoot: &'a ShootingConfig,
    last_a: Option<f64>,
    trace: Vec<BalanceStep>,
}

impl BalanceEval<'_> {
    fn eval(&mut self, p: f64) -> Result<f64> {
        let params = MetricParams::new(self.lambda, p)?;
        let crit = match self.warm_bracket(&params)? {
            Some((lo, hi)) => find_critical_a_in(self.h, &params, self.template, self.shoot, lo, hi)?,
            None => find_critical_a(self.h, &params, self.template, self.shoot)?,
        };
        self.last_a = Some(crit.a_crit);
        let step = BalanceStep {
            p,
            a_crit: crit.a_crit,
            gp_y1: crit.gp_y1,
            gp_y5: crit.gp_y5,
            residual: crit.gp_y5 - crit.gp_y1,
        };
        self.trace.push(step);
        Ok(step.residual)
    }

    // a narrow bracket around the previous a′ if it still straddles
    fn warm_bracket(&self, params: &MetricParams) -> Result<Option<(f64, f64)>> {
        let Some(a) = self.last_a else { return Ok(None) };
        let w = 1e-3;
        let (lo, hi) = ((a - w).max(self.shoot.a_lo), (a + w).min(self.shoot.a_hi));
        let lo_ok = case_at(self.h, lo, params, self.template)? == Case::H1;
        let hi_ok = case_at(self.h, hi, params, self.template)? != Case::H1;
        Ok((lo_ok && hi_ok).then_some((lo, hi)))
    }
}

/// The p at which the two singular candidates balance, |g′(y₅)| = |g′(y₁)|.
pub fn balance_p(
    h: f64,
    lambda: f64,
    template: &OdeConfig,
    shoot: &ShootingConfig,
    bal: &BalanceConfig,
) -> Result<BalanceResult> {
    let mut ev = BalanceEval { h, lambda, template, shoot, last_a: None, trace: Vec::new() };
    let (mut lo, mut hi) = (bal.p_lo, bal.p_hi);
    let r_lo = ev.eval(lo)?;
    let r_hi = ev.eval(hi)?;
    if r_lo.signum() == r_hi.signum() {
        return Err(Error::NoSignChange { p_lo: lo, p_hi: hi, r_lo, r_hi });
    }
    let s_lo = r_lo.signum();
    while hi - lo > bal.p_tol {
        let mid = 0.5 * (lo + hi);
        let r = ev.eval(mid)?;
        if r == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if r.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BalanceResult { h, lambda, p: 0.5 * (lo + hi), trace: ev.trace })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularProfile {
    pub y5_star: f64,
    /// Smallest radius the pinching branch reaches.
    pub g_floor: f64,
    pub tau_last: f64,
    pub profile: Orbit,
}

/// The singular profile of a critical search.
///
/// Below a′(H) the branch past y₅ turns at a small neck instead of reaching the
/// axis, so g_floor is that neck radius with τ frozen at its last value,
/// g = (1 − √(1 − 4τ))/2. A profile that did blow up reports its extrapolated limit.
pub fn singular_profile(crit: &CriticalResult) -> SingularProfile {
    let p = &crit.profile;
    let tau = p.last().tau;
    let g_floor = match p.blowup {
        Some(b) => b.g_limit,
        None => 2.0 * tau / (1.0 + (1.0 - 4.0 * tau).sqrt()),
    };
    SingularProfile { y5_star: crit.y5_star, g_floor, tau_last: tau, profile: p.clone() }
}

/// Runs the critical search and returns its singular profile.
pub fn compute_singular_profile(
    h: f64,
    params: &MetricParams,
    template: &OdeConfig,
    shoot: &ShootingConfig,
) -> Result<SingularProfile> {
    Ok(singular_profile(&find_critical_a(h, params, template, shoot)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    /// lim dy/dg at the pole.
    pub dy_dg_limit: f64,
    /// lim 1/(g·g′), signed.
    pub inv_ggp_limit: f64,
    /// ρ at the pole.
    pub rho_limit: f64,
    /// d²y^even/dg² at g = 0 from a centred difference of the even extension.
    pub second_derivative_estimate: f64,
    /// |lim 1/(g·g′)| − (1 + ρ∞/2).
    pub pole_mismatch: f64,
    /// |dy/dg| decreases towards the pole over the last decade of g.
    pub tail_monotone: bool,
    pub fit_g_min: f64,
    pub fit_g_max: f64,
}

const MIN_STEEP_SAMPLES: usize = 20;

// least-squares polynomial coefficients (ascending) of degree `deg`
fn polyfit(xs: &[f64], ys: &[f64], deg: usize) -> Vec<f64> {
    let n = deg + 1;
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut ata = vec![vec![0.0; n]; n];
    let mut aty = vec![0.0; n];
    for (&x, &y) in xs.iter().zip(ys) {
        let t = x / scale;
        let pows: Vec<f64> = (0..n).map(|k| t.powi(k as i32)).collect();
        for i in 0..n {
            aty[i] += pows[i] * y;
            for j in 0..n {
                ata[i][j] += pows[i] * pows[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| ata[i][c].abs().total_cmp(&ata[j][c].abs())).unwrap();
        ata.swap(c, piv);
        aty.swap(c, piv);
        for r in c + 1..n {
            let f = ata[r][c] / ata[c][c];
            for k in c..n {
                ata[r][k] -= f * ata[c][k];
            }
            aty[r] -= f * aty[c];
        }
    }
    let mut coef = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| ata[r][k] * coef[k]).sum();
        coef[r] = (aty[r] - s) / ata[r][r];
    }
    coef.iter().enumerate().map(|(k, c)| c / scale.powi(k as i32)).collect()
}

fn polyval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Regularity of the even extension y^even(g) at the pole of a profile.
pub fn even_extension_check(profile: &Orbit) -> Result<RegularityReport> {
    let branch = profile.final_g_branch();
    let cfg = &profile.config;
    let steep = branch.iter().filter(|s| s.gp.abs() > cfg.gp_switch).count();
    if steep < MIN_STEEP_SAMPLES {
        return Err(Error::InsufficientSamples { found: steep, needed: MIN_STEEP_SAMPLES });
    }
    let start = profile.samples.len() - branch.len();
    let last = profile.last();
    let g_end = last.g;
    // stay clear of the√τ scale where the residual neck bends the branch
    let g_min = (100.0 * last.tau.abs().sqrt()).max(10.0 * g_end);
    let g_max = branch.iter().map(|s| s.g).fold(0.0, f64::max).min(0.1);
    if !(g_max > 2.0 * g_min) {
        return Err(Error::InsufficientSamples { found: 0, needed: MIN_STEEP_SAMPLES });
    }
    // dense points, log-spaced in g, evaluated on the G-chart Hermite segments
    let m = 60;
    let mut gs = Vec::with_capacity(m);
    let mut ys = Vec::with_capacity(m);
    let mut inv_gp = Vec::with_capacity(m);
    let mut inv_ggp = Vec::with_capacity(m);
    for i in 0..m {
        let g = g_min * (g_max / g_min).powf(i as f64 / (m - 1) as f64);
        let seg = (start..profile.samples.len() - 1).find(|&j| {
            let (a, b) = (profile.samples[j].g, profile.samples[j + 1].g);
            profile.samples[j].chart == Chart::G && g <= a.max(b) && g >= a.min(b)
        });
        let Some(j) = seg else { continue };
        let s = profile.state_at_g_on_segment(j, g);
        gs.push(g);
        ys.push(s.y);
        inv_gp.push(1.0 / s.gp);
        inv_ggp.push(1.0 / (g * s.gp));
    }
    if gs.len() < 10 {
        return Err(Error::InsufficientSamples { found: gs.len(), needed: 10 });
    }
    let c_dy = polyfit(&gs, &inv_gp, 4);
    let c_inv = polyfit(&gs, &inv_ggp, 4);
    // centred difference of the even extension, y^even(−δ) = y(δ), with y(0)
    // from a cubic through the innermost part of the window
    let near: Vec<usize> = (0..gs.len()).filter(|&i| gs[i] <= 4.0 * g_min).collect();
    let (gn, yn): (Vec<f64>, Vec<f64>) = near.iter().map(|&i| (gs[i], ys[i])).unzip();
    let c_y = if gn.len() >= 6 { polyfit(&gn, &yn, 3) } else { polyfit(&gs, &ys, 3) };
    let y0 = c_y[0];
    let delta = 2.0 * g_min;
    let y_delta = polyval(&c_y, delta);
    let second = (2.0 * y_delta - 2.0 * y0) / (delta * delta);
    let rho_limit = if profile.model.perturbed {
        rho_at_pole(y0, profile.model.h)
    } else {
        0.0
    };
    let tail: Vec<f64> = branch
        .iter()
        .filter(|s| s.g <= 10.0 * g_end)
        .map(|s| (1.0 / s.gp).abs())
        .collect();
    let tail_monotone = tail.len() >= 2 && tail.windows(2).all(|w| w[1] < w[0]);
    Ok(RegularityReport {
        dy_dg_limit: c_dy[0],
        inv_ggp_limit: c_inv[0],
        rho_limit,
        second_derivative_estimate: second,
        pole_mismatch: c_inv[0].abs() - (1.0 + rho_limit / 2.0),
        tail_monotone,
        fit_g_min: g_min,
        fit_g_max: g_max,
    })
}
