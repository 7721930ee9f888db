//! Dormand–Prince 5(4) with PI step control on two charts.
//!
//! While |g′| is moderate the independent variable is y and the state is
//! (g, g′). Once |g′| exceeds `gp_switch` the integrator continues in g with
//! state (y, g′), dy/dg = 1/g′ and dg′/dg = g″/g′, and goes back to y when
//! |g′| falls under gp_switch/2.

use super::orbit::{BlowupInfo, Chart, Event, EventKind, Orbit, Sample, Terminal};
use super::{inflection, Model, OdeConfig, State};
use crate::error::{Error, Result};
use crate::metric::MetricParams;
use crate::roots::brent;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 2_000_000;

type Vec2 = [f64; 2];

fn axpy(u: &Vec2, terms: &[(f64, &Vec2)], h: f64) -> Vec2 {
    let mut out = *u;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

fn state_of(chart: Chart, x: f64, u: &Vec2) -> State {
    match chart {
        Chart::Y => State::new(x, u[0], u[1]),
        Chart::G => State::new(u[0], x, u[1]),
    }
}

fn deriv(model: &Model, chart: Chart, x: f64, u: &Vec2) -> Result<Vec2> {
    let s = state_of(chart, x, u);
    let gpp = model.gpp(&s)?;
    let out = match chart {
        Chart::Y => [s.gp, gpp],
        Chart::G => {
            if s.gp == 0.0 {
                return Err(Error::Domain("vertical chart used at g′ = 0".into()));
            }
            [1.0 / s.gp, gpp / s.gp]
        }
    };
    if out[0].is_finite() && out[1].is_finite() {
        Ok(out)
    } else {
        Err(Error::Domain(format!("non-finite derivative at {s:?}")))
    }
}

struct Step {
    u: Vec2,
    k7: Vec2,
    err: Vec2,
}

fn dp_step(model: &Model, chart: Chart, x: f64, u: &Vec2, k1: &Vec2, h: f64) -> Result<Step> {
    let k2 = deriv(model, chart, x + h / 5.0, &axpy(u, &[(A21, k1)], h))?;
    let k3 = deriv(model, chart, x + 0.3 * h, &axpy(u, &[(A31, k1), (A32, &k2)], h))?;
    let k4 = deriv(
        model,
        chart,
        x + 0.8 * h,
        &axpy(u, &[(A41, k1), (A42, &k2), (A43, &k3)], h),
    )?;
    let k5 = deriv(
        model,
        chart,
        x + 8.0 / 9.0 * h,
        &axpy(u, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
    )?;
    let k6 = deriv(
        model,
        chart,
        x + h,
        &axpy(u, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
    )?;
    let un = axpy(u, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
    let k7 = deriv(model, chart, x + h, &un)?;
    let mut err = [0.0; 2];
    for i in 0..2 {
        err[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok(Step { u: un, k7, err })
}

// g′ sign with the tie rule: at g′ = 0 take the side g″ points to, and when the
// tangency is also an inflection keep the previous sign (no crossing).
fn gp_sign(gp: f64, f: f64, previous: f64) -> f64 {
    if gp != 0.0 {
        gp.signum()
    } else if f != 0.0 {
        f.signum()
    } else {
        previous
    }
}

struct Integrator<'a> {
    model: Model,
    cfg: &'a OdeConfig,
    samples: Vec<Sample>,
    events: Vec<Event>,
    necks: usize,
}

enum Stop {
    Continue,
    Done(Terminal, Option<BlowupInfo>),
}

#[derive(Clone, Copy)]
struct Candidate {
    x: f64,
    kind: CandidateKind,
}

#[derive(Clone, Copy, PartialEq)]
enum CandidateKind {
    Gp,
    Inflection,
    Blowup,
    Ymax,
}

impl<'a> Integrator<'a> {
    fn push_sample(&mut self, s: Sample) {
        if self.samples.last().map_or(true, |l| s.y > l.y) {
            self.samples.push(s);
        }
    }

    fn event_value(&self, kind: CandidateKind, chart: Chart, x: f64, u: &Vec2) -> f64 {
        let s = state_of(chart, x, u);
        match kind {
            CandidateKind::Gp => s.gp,
            CandidateKind::Inflection => match self.model.rho(&s) {
                Ok(r) => inflection(&s, r),
                Err(_) => f64::NAN,
            },
            CandidateKind::Blowup => s.gp.abs() - self.cfg.gp_blowup,
            CandidateKind::Ymax => s.y - self.cfg.y_max,
        }
    }

    // Root of an event function on (x0, x1), each trial point obtained by a
    // fresh partial step from the step start.
    fn refine(
        &self,
        kind: CandidateKind,
        chart: Chart,
        x0: &(f64, Vec2, Vec2),
        x1: f64,
        u1: &Vec2,
    ) -> Result<(f64, Vec2)> {
        let (xs, us, k1) = x0;
        let f0 = self.event_value(kind, chart, *xs, us);
        let f1 = self.event_value(kind, chart, x1, u1);
        if f1 == 0.0 {
            return Ok((x1, *u1));
        }
        let partial = |x: f64| -> Result<Vec2> {
            if x == *xs {
                Ok(*us)
            } else {
                dp_step(&self.model, chart, *xs, us, k1, x - xs).map(|s| s.u)
            }
        };
        let root = brent(
            |x| match partial(x) {
                Ok(u) => self.event_value(kind, chart, x, &u),
                Err(_) => f64::NAN,
            },
            *xs,
            x1,
            f0,
            f1,
            0.0,
            200,
        );
        Ok((root, partial(root)?))
    }

    fn blowup_limit(&self, end: &Sample) -> f64 {
        // linear Richardson step in u = 1/g′ through the previous G sample
        match self.samples.last() {
            Some(prev) if prev.chart == Chart::G && prev.gp != end.gp => {
                let (u0, u1) = (1.0 / prev.gp, 1.0 / end.gp);
                (u0 * end.g - u1 * prev.g) / (u0 - u1)
            }
            _ => end.g,
        }
    }

    fn run(mut self, a: f64) -> Result<Orbit> {
        let cfg = self.cfg;
        let model = self.model;
        let mut chart = Chart::Y;
        let mut x = 0.0;
        let mut u: Vec2 = [a, 0.0];
        let mut k1 = deriv(&model, chart, x, &u)?;
        let first = Sample::from_state(&state_of(chart, x, &u), &model, chart)?;
        let mut f_sign = first.inflection().signum();
        let mut g_sign = gp_sign(first.gp, first.inflection(), 0.0);
        self.samples.push(first);
        let mut h = 1e-3f64.min(cfg.max_step);
        let mut err_prev: f64 = 1e-4;
        let mut domain_hits = 0usize;

        for _ in 0..MAX_STEPS {
            let dir = match chart {
                Chart::Y => 1.0,
                Chart::G => u[1].signum(),
            };
            let mut hs = h.min(cfg.max_step);
            if chart == Chart::Y {
                let remaining = cfg.y_max - x;
                if remaining <= 0.0 {
                    return Ok(self.finish(Terminal::ReachedYmax, None));
                }
                hs = hs.min(remaining);
            } else if dir < 0.0 {
                hs = hs.min(0.5 * x);
            }
            let hmin = 4.0 * f64::EPSILON * x.abs().max(1e-300);
            if hs < hmin {
                if domain_hits > 0 && chart == Chart::Y {
                    return Err(Error::Domain(format!(
                        "g reached 0 near y = {x} before blow-up was declared"
                    )));
                }
                return Ok(self.finish(Terminal::StepFailure, None));
            }
            let step = match dp_step(&model, chart, x, &u, &k1, dir * hs) {
                Ok(s) if s.u.iter().chain(s.err.iter()).all(|v| v.is_finite()) => s,
                Ok(_) => {
                    h = 0.25 * hs;
                    continue;
                }
                Err(Error::Domain(_)) => {
                    domain_hits += 1;
                    h = 0.25 * hs;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let mut err = 0.0f64;
            for i in 0..2 {
                let sc = cfg.abs_tol + cfg.rel_tol * u[i].abs().max(step.u[i].abs());
                err = err.max(step.err[i].abs() / sc);
            }
            if err > 1.0 {
                h = hs * (0.9 * err.powf(-0.2)).max(0.2);
                continue;
            }
            domain_hits = 0;
            let x_new = x + dir * hs;
            let end = Sample::from_state(&state_of(chart, x_new, &step.u), &model, chart)?;

            // event candidates on this step
            let mut cands: Vec<Candidate> = Vec::new();
            let f_new = end.inflection();
            let new_f_sign = if f_new == 0.0 { f_sign } else { f_new.signum() };
            let new_g_sign = gp_sign(end.gp, f_new, g_sign);
            let start = (x, u, k1);
            if chart == Chart::Y && new_g_sign != g_sign && u[1] != 0.0 {
                let (xr, _) = self.refine(CandidateKind::Gp, chart, &start, x_new, &step.u)?;
                cands.push(Candidate { x: xr, kind: CandidateKind::Gp });
            }
            if new_f_sign != f_sign {
                let (xr, _) =
                    self.refine(CandidateKind::Inflection, chart, &start, x_new, &step.u)?;
                cands.push(Candidate { x: xr, kind: CandidateKind::Inflection });
            }
            if end.gp.abs() > cfg.gp_blowup {
                let (xr, _) = self.refine(CandidateKind::Blowup, chart, &start, x_new, &step.u)?;
                cands.push(Candidate { x: xr, kind: CandidateKind::Blowup });
            }
            if chart == Chart::G && end.y > cfg.y_max {
                let (xr, _) = self.refine(CandidateKind::Ymax, chart, &start, x_new, &step.u)?;
                cands.push(Candidate { x: xr, kind: CandidateKind::Ymax });
            }
            cands.sort_by(|p, q| (dir * p.x).total_cmp(&(dir * q.x)));

            for c in cands {
                let uc = if c.x == x_new {
                    step.u
                } else {
                    dp_step(&model, chart, x, &u, &k1, c.x - x)?.u
                };
                let s = state_of(chart, c.x, &uc);
                let sample = Sample::from_state(&s, &model, chart)?;
                match self.handle(c.kind, sample) {
                    Stop::Continue => {}
                    Stop::Done(t, b) => {
                        self.push_sample(sample);
                        return Ok(self.finish(t, b));
                    }
                }
                self.push_sample(sample);
            }
            f_sign = new_f_sign;
            g_sign = new_g_sign;
            self.push_sample(end);

            x = x_new;
            u = step.u;
            k1 = step.k7;
            let fac = (0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0))
                .clamp(0.2, 5.0);
            h = hs * fac;
            err_prev = err.max(1e-4);

            // chart switching with hysteresis
            let gp = end.gp;
            let next = match chart {
                Chart::Y if gp.abs() > cfg.gp_switch => Some(Chart::G),
                Chart::G if gp.abs() < 0.5 * cfg.gp_switch => Some(Chart::Y),
                _ => None,
            };
            if let Some(nc) = next {
                let s = state_of(chart, x, &u);
                h = match nc {
                    Chart::G => h * gp.abs(),
                    Chart::Y => h / gp.abs(),
                };
                chart = nc;
                (x, u) = match nc {
                    Chart::Y => (s.y, [s.g, s.gp]),
                    Chart::G => (s.g, [s.y, s.gp]),
                };
                k1 = deriv(&model, chart, x, &u)?;
                err_prev = 1e-4;
                if let Some(last) = self.samples.last_mut() {
                    last.chart = nc;
                }
            }
        }
        Ok(self.finish(Terminal::StepFailure, None))
    }

    fn handle(&mut self, kind: CandidateKind, s: Sample) -> Stop {
        let ev = |k| Event { kind: k, y: s.y, g: s.g, gp: s.gp, tau: s.tau };
        match kind {
            CandidateKind::Gp => {
                self.events.push(ev(EventKind::GpZero));
                if s.g < 0.5 {
                    self.necks += 1;
                    if self.cfg.stop_after_necks.is_some_and(|n| self.necks >= n) {
                        return Stop::Done(Terminal::NeckLimit, None);
                    }
                }
                Stop::Continue
            }
            CandidateKind::Inflection => {
                self.events.push(ev(EventKind::Inflection));
                Stop::Continue
            }
            CandidateKind::Blowup => {
                self.events.push(ev(EventKind::Blowup));
                let info = BlowupInfo { y: s.y, g: s.g, gp: s.gp, g_limit: self.blowup_limit(&s) };
                Stop::Done(Terminal::BlowupDetected, Some(info))
            }
            CandidateKind::Ymax => Stop::Done(Terminal::ReachedYmax, None),
        }
    }

    fn finish(self, terminal: Terminal, blowup: Option<BlowupInfo>) -> Orbit {
        Orbit {
            model: self.model,
            config: *self.cfg,
            samples: self.samples,
            events: self.events,
            terminal,
            blowup,
        }
    }
}

/// Integrates from (0, a, 0). With `perturbed = false` the Delaunay equation is solved.
pub fn integrate(config: &OdeConfig, params: &MetricParams, perturbed: bool) -> Result<Orbit> {
    config.validate()?;
    params.validate()?;
    let it = Integrator {
        model: Model { h: config.h, params: *params, perturbed },
        cfg: config,
        samples: Vec::new(),
        events: Vec::new(),
        necks: 0,
    };
    it.run(config.a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delaunay(a: f64, y_max: f64) -> Orbit {
        let mut c = OdeConfig::new(0.01, a);
        c.y_max = y_max;
        integrate(&c, &MetricParams::default(), false).unwrap()
    }

    #[test]
    fn unit_circle() {
        let o = delaunay(1.0, 0.999);
        for s in &o.samples {
            assert!((s.g - (1.0 - s.y * s.y).sqrt()).abs() < 1e-8, "{s:?}");
        }
        // τ = 0 is neutral: a truncation error of size δ in τ opens a spurious
        // neck of radius ~δ, so blow-up at |g′| = 1e6 needs δ below ~1e-13.
        let mut c = OdeConfig::new(0.01, 1.0);
        c.abs_tol = 1e-12;
        c.rel_tol = 1e-12;
        let o = integrate(&c, &MetricParams::default(), false).unwrap();
        assert_eq!(o.terminal, Terminal::BlowupDetected);
        let b = o.blowup.unwrap();
        assert!((b.y - 1.0).abs() < 1e-9);
        assert!(b.g_limit.abs() < 1e-6, "g_limit {}", b.g_limit);
        assert!(o.last().tau.abs() < 1e-12);
    }

    #[test]
    fn unduloid_conserves_tau() {
        let o = delaunay(0.96, 5.0);
        assert_eq!(o.terminal, Terminal::ReachedYmax);
        assert!(o.tau_spread() < 1e-9, "spread {}", o.tau_spread());
        assert_eq!(o.necks().count(), 2);
    }

    #[test]
    fn samples_strictly_increase() {
        let mut c = OdeConfig::new(0.01, 0.98968);
        c.y_max = 5.0;
        let o = integrate(&c, &MetricParams::default(), true).unwrap();
        assert!(o.samples.windows(2).all(|w| w[1].y > w[0].y));
        assert!(o.samples.iter().any(|s| s.chart == Chart::G));
    }

    #[test]
    fn events_are_sharp() {
        let mut c = OdeConfig::new(0.01, 0.96);
        c.y_max = 5.0;
        let o = integrate(&c, &MetricParams::default(), true).unwrap();
        for e in &o.events {
            let s = e.state();
            match e.kind {
                EventKind::GpZero => assert!(s.gp.abs() <= 1e-10),
                EventKind::Inflection => {
                    let rho = o.model.rho(&s).unwrap();
                    assert!(inflection(&s, rho).abs() <= 1e-10);
                }
                EventKind::Blowup => {}
            }
        }
    }

    #[test]
    fn neck_limit_stops_early() {
        let mut c = OdeConfig::new(0.01, 0.96);
        c.stop_after_necks = Some(1);
        let o = integrate(&c, &MetricParams::default(), true).unwrap();
        assert_eq!(o.terminal, Terminal::NeckLimit);
        assert_eq!(o.necks().count(), 1);
        assert!(o.y_end() < 1.5);
    }
}
