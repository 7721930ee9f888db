//! Event skeleton y₁ … y₆ of an orbit and the three-way case split.
//!
//! Starting from the bulge at y = 0 the orbit passes an inflection y₁ (g′ < 0),
//! a neck y₂, an inflection y₃ (g′ > 0), the next bulge y₄ and then either a
//! further inflection y₅ before a second neck (H1), or blows up after one neck
//! (H2) or before any neck (H3).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{inflection, EventKind, Orbit, State, Terminal};
use crate::roots::brent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// Two necks with g < 1/2.
    H1,
    /// One neck, then blow-up.
    H2,
    /// Blow-up before any neck.
    H3,
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Case::H1 => "H1",
            Case::H2 => "H2",
            Case::H3 => "H3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub y: f64,
    pub g: f64,
    pub gp: f64,
    pub tau: f64,
}

impl Point {
    fn from_state(s: &State) -> Self {
        Point { y: s.y, g: s.g, gp: s.gp, tau: s.tau() }
    }

    pub fn state(&self) -> State {
        State::new(self.y, self.g, self.gp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSkeleton {
    pub case: Case,
    pub y1: Option<Point>,
    pub y2: Option<Point>,
    pub y3: Option<Point>,
    pub y4: Option<Point>,
    pub y5: Option<Point>,
    pub y6: Option<f64>,
    /// Brackets of g′ − 1 found on (y₃, y₄); the skeleton expects exactly one.
    pub y6_brackets: usize,
    /// y₅ is the blow-up point rather than an inflection.
    pub y5_is_blowup: bool,
}

impl EventSkeleton {
    pub fn get(&self, label: &'static str) -> Result<Point> {
        let p = match label {
            "y1" => self.y1,
            "y2" => self.y2,
            "y3" => self.y3,
            "y4" => self.y4,
            "y5" => self.y5,
            _ => None,
        };
        p.ok_or(Error::MissingEvent(label))
    }
}

/// Case only, without building the skeleton.
pub fn classify_case(orbit: &Orbit) -> Result<Case> {
    let necks = orbit.necks().count();
    if necks >= 2 {
        return Ok(Case::H1);
    }
    match orbit.terminal {
        Terminal::BlowupDetected if necks == 1 => Ok(Case::H2),
        Terminal::BlowupDetected => Ok(Case::H3),
        t => Err(Error::Unclassifiable(format!(
            "{necks} neck(s) before termination {t:?} at y = {}",
            orbit.y_end()
        ))),
    }
}

pub fn classify(orbit: &Orbit) -> Result<EventSkeleton> {
    let case = classify_case(orbit)?;
    let ev = &orbit.events;
    let mut sk = EventSkeleton {
        case,
        y1: None,
        y2: None,
        y3: None,
        y4: None,
        y5: None,
        y6: None,
        y6_brackets: 0,
        y5_is_blowup: false,
    };
    let find = |from: f64, pred: &dyn Fn(&crate::ode::Event) -> bool| {
        ev.iter().find(|e| e.y > from && pred(e)).map(|e| Point::from_state(&e.state()))
    };
    let neck2 = orbit.necks().nth(1).map(|e| e.y).unwrap_or(f64::INFINITY);
    let y2 = orbit.necks().next().map(|e| Point::from_state(&e.state()));
    sk.y1 = find(0.0, &|e| {
        e.kind == EventKind::Inflection && e.gp < 0.0 && e.y < y2.map_or(f64::INFINITY, |p| p.y)
    });
    sk.y2 = y2;
    if let Some(p2) = y2 {
        sk.y3 = find(p2.y, &|e| e.kind == EventKind::Inflection && e.gp > 0.0);
    }
    if let Some(p3) = sk.y3 {
        sk.y4 = find(p3.y, &|e| e.kind == EventKind::GpZero && e.g >= 0.5);
    }
    if let Some(p4) = sk.y4 {
        sk.y5 = find(p4.y, &|e| e.kind == EventKind::Inflection && e.gp < 0.0 && e.y < neck2);
        if sk.y5.is_none() {
            if let Some(b) = orbit.blowup {
                sk.y5 = Some(Point::from_state(&State::new(b.y, b.g, b.gp)));
                sk.y5_is_blowup = true;
            }
        }
    }
    if let (Some(p3), Some(p4)) = (sk.y3, sk.y4) {
        let (root, count) = unit_slope(orbit, p3.y, p4.y);
        sk.y6 = root;
        sk.y6_brackets = count;
    }
    Ok(sk)
}

// Root of g′ − 1 on (lo, hi), refined on the dense output; also the bracket count.
fn unit_slope(orbit: &Orbit, lo: f64, hi: f64) -> (Option<f64>, usize) {
    let mut ys: Vec<f64> = vec![lo];
    ys.extend(orbit.samples.iter().map(|s| s.y).filter(|&y| y > lo && y < hi));
    ys.push(hi);
    let val = |y: f64| orbit.state_at_y(y).map_or(f64::NAN, |s| s.gp - 1.0);
    let mut count = 0;
    let mut root = None;
    for w in ys.windows(2) {
        let (fa, fb) = (val(w[0]), val(w[1]));
        if fa.signum() != fb.signum() {
            count += 1;
            if root.is_none() {
                root = Some(brent(val, w[0], w[1], fa, fb, 1e-15, 200));
            }
        }
    }
    (root, count)
}

/// τ at the skeleton points that are present, in order.
pub fn tau_at_events(skeleton: &EventSkeleton) -> Result<Vec<(String, f64)>> {
    skeleton.get("y1")?;
    let pts = [
        ("y1", skeleton.y1),
        ("y2", skeleton.y2),
        ("y3", skeleton.y3),
        ("y4", skeleton.y4),
        ("y5", skeleton.y5),
    ];
    Ok(pts
        .iter()
        .filter_map(|(n, p)| p.map(|p| (n.to_string(), p.tau)))
        .collect())
}

/// (τ(y₄) − (a − a²), g(y₄) − a).
pub fn bulge_deviation(skeleton: &EventSkeleton, a: f64) -> Result<(f64, f64)> {
    let p4 = skeleton.get("y4")?;
    Ok((p4.tau - (a - a * a), p4.g - a))
}

/// The comparison circle h(y) = √(1 − (y − y₄)²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSphere {
    pub y4: f64,
}

impl ComparisonSphere {
    pub fn h(&self, y: f64) -> f64 {
        (1.0 - (y - self.y4).powi(2)).max(0.0).sqrt()
    }

    pub fn h_prime(&self, y: f64) -> f64 {
        -(y - self.y4) / self.h(y)
    }

    /// Φ₁: the point left of y₄ where h′ equals `slope`.
    pub fn slope_preimage(&self, slope: f64) -> f64 {
        self.y4 - slope / slope.hypot(1.0)
    }

    /// Φ₂: the point left of y₄ where h equals `height`.
    pub fn height_preimage(&self, height: f64) -> Result<f64> {
        if !(height <= 1.0 && height >= 0.0) {
            return Err(Error::OutOfRange(format!("g = {height} has no preimage under h")));
        }
        Ok(self.y4 - (1.0 - height * height).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiMapReport {
    /// sup |Φ₁(y) − y| on [y₆, y₄].
    pub phi1_sup: f64,
    /// sup |Φ₂(y) − y| / (H/g² + |log g| + 1) on [y₃, y₆].
    pub phi2_scaled_sup: f64,
    pub phi1_at_y6: f64,
}

const MAP_GRID: usize = 400;

pub fn phi_maps(skeleton: &EventSkeleton, orbit: &Orbit) -> Result<PhiMapReport> {
    let p3 = skeleton.get("y3")?;
    let p4 = skeleton.get("y4")?;
    let y6 = skeleton.y6.ok_or(Error::MissingEvent("y6"))?;
    let sphere = ComparisonSphere { y4: p4.y };
    let h = orbit.model.h;
    let at = |y: f64| orbit.state_at_y(y).ok_or(Error::OutOfRange(format!("y = {y}")));
    let mut phi1_sup: f64 = 0.0;
    for i in 0..=MAP_GRID {
        let y = y6 + (p4.y - y6) * i as f64 / MAP_GRID as f64;
        let s = if i == MAP_GRID { p4.state() } else { at(y)? };
        phi1_sup = phi1_sup.max((sphere.slope_preimage(s.gp) - y).abs());
    }
    let mut phi2_sup: f64 = 0.0;
    for i in 0..=MAP_GRID {
        let y = p3.y + (y6 - p3.y) * i as f64 / MAP_GRID as f64;
        let s = if i == 0 { p3.state() } else { at(y)? };
        let dev = (sphere.height_preimage(s.g)? - y).abs();
        phi2_sup = phi2_sup.max(dev / (h / (s.g * s.g) + s.g.ln().abs() + 1.0));
    }
    let s6 = at(y6)?;
    Ok(PhiMapReport {
        phi1_sup,
        phi2_scaled_sup: phi2_sup,
        phi1_at_y6: sphere.slope_preimage(s6.gp),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KExtremes {
    pub min_y3_y4: f64,
    pub max_y3_y4: f64,
    pub min_y4_y5: f64,
    pub max_y4_y5: f64,
}

fn k_range(orbit: &Orbit, lo: f64, hi: f64) -> (f64, f64) {
    let mut r = (f64::INFINITY, f64::NEG_INFINITY);
    for y in [lo, hi] {
        if let Some(s) = orbit.state_at_y(y) {
            r = (r.0.min(s.k()), r.1.max(s.k()));
        }
    }
    for s in orbit.samples.iter().filter(|s| s.y >= lo && s.y <= hi) {
        r = (r.0.min(s.k), r.1.max(s.k));
    }
    r
}

pub fn k_extremes(skeleton: &EventSkeleton, orbit: &Orbit) -> Result<KExtremes> {
    let (y3, y4, y5) = (skeleton.get("y3")?.y, skeleton.get("y4")?.y, skeleton.get("y5")?.y);
    let a = k_range(orbit, y3, y4);
    let b = k_range(orbit, y4, y5);
    Ok(KExtremes { min_y3_y4: a.0, max_y3_y4: a.1, min_y4_y5: b.0, max_y4_y5: b.1 })
}

/// Per-segment monotonicity of g and g′ checked on samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monotonicity {
    pub g_decreasing_0_y2: bool,
    pub g_increasing_y2_y4: bool,
    pub g_decreasing_y4_y5: bool,
    pub gp_decreasing_0_y1: bool,
    pub gp_increasing_y1_y3: bool,
    pub gp_decreasing_y4_y5: bool,
}

impl Monotonicity {
    pub fn all(&self) -> bool {
        self.g_decreasing_0_y2
            && self.g_increasing_y2_y4
            && self.g_decreasing_y4_y5
            && self.gp_decreasing_0_y1
            && self.gp_increasing_y1_y3
            && self.gp_decreasing_y4_y5
    }
}

fn monotone(orbit: &Orbit, lo: f64, hi: f64, key: fn(&crate::ode::Sample) -> f64, up: bool) -> bool {
    let vals: Vec<f64> = orbit
        .samples
        .iter()
        .filter(|s| s.y >= lo && s.y <= hi)
        .map(key)
        .collect();
    vals.windows(2)
        .all(|w| if up { w[1] >= w[0] } else { w[1] <= w[0] })
}

pub fn monotonicity(skeleton: &EventSkeleton, orbit: &Orbit) -> Result<Monotonicity> {
    let y1 = skeleton.get("y1")?.y;
    let y2 = skeleton.get("y2")?.y;
    let y3 = skeleton.get("y3")?.y;
    let y4 = skeleton.get("y4")?.y;
    let y5 = skeleton.get("y5")?.y;
    let g = |s: &crate::ode::Sample| s.g;
    let gp = |s: &crate::ode::Sample| s.gp;
    Ok(Monotonicity {
        g_decreasing_0_y2: monotone(orbit, 0.0, y2, g, false),
        g_increasing_y2_y4: monotone(orbit, y2, y4, g, true),
        g_decreasing_y4_y5: monotone(orbit, y4, y5, g, false),
        gp_decreasing_0_y1: monotone(orbit, 0.0, y1, gp, false),
        gp_increasing_y1_y3: monotone(orbit, y1, y3, gp, true),
        gp_decreasing_y4_y5: monotone(orbit, y4, y5, gp, false),
    })
}

/// Residual of the inflection function at a point (zero on the inflection locus).
pub fn inflection_residual(orbit: &Orbit, p: &Point) -> Result<f64> {
    let s = p.state();
    Ok(inflection(&s, orbit.model.rho(&s)?))
}

/// Machine-readable summary of one orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonReport {
    pub case: Case,
    pub y1: Option<f64>,
    pub y2: Option<f64>,
    pub y3: Option<f64>,
    pub y4: Option<f64>,
    pub y5: Option<f64>,
    pub y6: Option<f64>,
    pub tau_at_events: Vec<(String, f64)>,
    pub phi_map_sups: Option<PhiMapReport>,
    pub k_extremes: Option<KExtremes>,
}

pub fn skeleton_report(orbit: &Orbit) -> Result<SkeletonReport> {
    let sk = classify(orbit)?;
    Ok(SkeletonReport {
        case: sk.case,
        y1: sk.y1.map(|p| p.y),
        y2: sk.y2.map(|p| p.y),
        y3: sk.y3.map(|p| p.y),
        y4: sk.y4.map(|p| p.y),
        y5: sk.y5.map(|p| p.y),
        y6: sk.y6,
        tau_at_events: tau_at_events(&sk).unwrap_or_default(),
        phi_map_sups: phi_maps(&sk, orbit).ok(),
        k_extremes: k_extremes(&sk, orbit).ok(),
    })
}
