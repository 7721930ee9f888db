use serde::{Deserialize, Serialize};

use super::{inflection, Model, OdeConfig, State};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::roots::brent;

/// Independent variable of the step that starts at a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// y is the independent variable, state (g, g′).
    Y,
    /// g is the independent variable, state (y, g′); used where |g′| is large.
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub y: f64,
    pub g: f64,
    pub gp: f64,
    pub gpp: f64,
    pub tau: f64,
    pub rho: f64,
    pub k: f64,
    pub d: f64,
    pub chart: Chart,
}

impl Sample {
    pub fn from_state(state: &State, model: &Model, chart: Chart) -> Result<Self> {
        let rho = model.rho(state)?;
        Ok(Sample {
            y: state.y,
            g: state.g,
            gp: state.gp,
            gpp: super::second_derivative(state, rho)?,
            tau: state.tau(),
            rho,
            k: state.k(),
            d: state.d(),
            chart,
        })
    }

    pub fn state(&self) -> State {
        State::new(self.y, self.g, self.gp)
    }

    pub fn inflection(&self) -> f64 {
        inflection(&self.state(), self.rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// g′ changes sign.
    GpZero,
    /// g″ changes sign (F = 1 − (2+ρ)k vanishes).
    Inflection,
    /// |g′| reached the blow-up threshold.
    Blowup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub y: f64,
    pub g: f64,
    pub gp: f64,
    pub tau: f64,
}

impl Event {
    pub fn state(&self) -> State {
        State::new(self.y, self.g, self.gp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    ReachedYmax,
    BlowupDetected,
    StepFailure,
    /// Stopped on request after a given number of necks.
    NeckLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupInfo {
    pub y: f64,
    pub g: f64,
    pub gp: f64,
    /// g extrapolated to 1/g′ = 0.
    pub g_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub model: Model,
    pub config: OdeConfig,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub terminal: Terminal,
    pub blowup: Option<BlowupInfo>,
}

fn hermite(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let v = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
    let dv = ((6.0 * t2 - 6.0 * t) * (f0 - f1)) / h
        + (3.0 * t2 - 4.0 * t + 1.0) * d0
        + (3.0 * t2 - 2.0 * t) * d1;
    (v, dv)
}

impl Orbit {
    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("orbit has at least one sample")
    }

    pub fn y_end(&self) -> f64 {
        self.last().y
    }

    /// g′-zeros with g < 1/2, excluding the initial point.
    pub fn necks(&self) -> impl Iterator<Item = &Event> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::GpZero && e.g < 0.5 && e.y > 0.0)
    }

    fn segment_index(&self, y: f64) -> Option<usize> {
        let n = self.samples.len();
        if n < 2 || y < self.samples[0].y || y > self.samples[n - 1].y {
            return None;
        }
        let i = self.samples.partition_point(|s| s.y <= y);
        Some(i.clamp(1, n - 1) - 1)
    }

    /// State on segment `i` at chart coordinate `x` (y in the Y chart, g in the G chart).
    fn segment_state(&self, i: usize, x: f64) -> (State, f64) {
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        match a.chart {
            Chart::Y => {
                let (g, _) = hermite(a.y, b.y, a.g, b.g, a.gp, b.gp, x);
                let (gp, _) = hermite(a.y, b.y, a.gp, b.gp, a.gpp, b.gpp, x);
                (State::new(x, g, gp), 1.0)
            }
            Chart::G => {
                let (y, dy) = hermite(a.g, b.g, a.y, b.y, 1.0 / a.gp, 1.0 / b.gp, x);
                let (gp, _) =
                    hermite(a.g, b.g, a.gp, b.gp, a.gpp / a.gp, b.gpp / b.gp, x);
                (State::new(y, x, gp), dy)
            }
        }
    }

    // chart coordinate on segment i where y is reached
    fn chart_coordinate(&self, i: usize, y: f64) -> f64 {
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        match a.chart {
            Chart::Y => y,
            Chart::G => {
                if y <= a.y {
                    return a.g;
                }
                if y >= b.y {
                    return b.g;
                }
                let f = |g: f64| self.segment_state(i, g).0.y - y;
                brent(f, a.g, b.g, a.y - y, b.y - y, 0.0, 200)
            }
        }
    }

    /// Dense-output state at y.
    pub fn state_at_y(&self, y: f64) -> Option<State> {
        let i = self.segment_index(y)?;
        let x = self.chart_coordinate(i, y);
        Some(self.segment_state(i, x).0)
    }

    /// ∫ f(state) dy over [ya, yb] on the dense output. In G-chart segments the
    /// integration runs in g with the Jacobian dy/dg, so integrands that stay
    /// bounded in y remain bounded near vertical tangents.
    pub fn integrate_y<F: Fn(&State) -> f64>(&self, ya: f64, yb: f64, f: F) -> f64 {
        if yb < ya {
            return -self.integrate_y(yb, ya, f);
        }
        let n = self.samples.len();
        let mut total = 0.0;
        for i in 0..n.saturating_sub(1) {
            let (a, b) = (&self.samples[i], &self.samples[i + 1]);
            let lo = ya.max(a.y);
            let hi = yb.min(b.y);
            if !(hi > lo) {
                continue;
            }
            let (xa, xb) = (self.chart_coordinate(i, lo), self.chart_coordinate(i, hi));
            let mut integrand = |x: f64| {
                let (s, jac) = self.segment_state(i, x);
                f(&s) * jac
            };
            let r = quadrature::integrate_limited(&mut integrand, xa, xb, 1e-15, 1e-13, 64);
            total += r.value;
        }
        total
    }

    /// The sub-orbit on [0, y_end]; the last kept point is interpolated if needed.
    pub fn truncate(&self, y_end: f64) -> Result<Orbit> {
        let mut out = self.clone();
        let keep = self.samples.partition_point(|s| s.y <= y_end);
        if keep == 0 {
            return Err(Error::OutOfRange(format!("truncation point {y_end} precedes the orbit")));
        }
        out.samples.truncate(keep);
        if out.last().y < y_end && keep < self.samples.len() {
            let s = self.state_at_y(y_end).expect("inside the orbit");
            out.samples
                .push(Sample::from_state(&s, &self.model, self.samples[keep - 1].chart)?);
        }
        out.events.retain(|e| e.y <= y_end);
        if y_end < self.y_end() {
            out.blowup = None;
        }
        Ok(out)
    }

    /// Max over samples of |τ − τ(0)|.
    pub fn tau_spread(&self) -> f64 {
        let t0 = self.first().tau;
        self.samples.iter().map(|s| (s.tau - t0).abs()).fold(0.0, f64::max)
    }

    /// Largest deviation from τ(z) − τ(0) = ∫₀^z g g′ ρ dy over the samples.
    pub fn drift_residual(&self) -> f64 {
        let model = self.model;
        let t0 = self.first().tau;
        let mut acc = 0.0;
        let mut worst: f64 = 0.0;
        for w in self.samples.windows(2) {
            acc += self.integrate_y(w[0].y, w[1].y, |s| {
                s.g * s.gp * model.rho(s).unwrap_or(f64::NAN)
            });
            worst = worst.max((w[1].tau - t0 - acc).abs());
        }
        worst
    }

    /// Samples on the final G-chart branch, ordered as integrated.
    pub fn final_g_branch(&self) -> &[Sample] {
        let n = self.samples.len();
        let mut start = n;
        while start > 0 && self.samples[start - 1].chart == Chart::G {
            start -= 1;
        }
        &self.samples[start..]
    }

    /// State at radius g on G-chart segment `i` (caller guarantees g is inside it).
    pub fn state_at_g_on_segment(&self, i: usize, g: f64) -> State {
        self.segment_state(i, g).0
    }
}
