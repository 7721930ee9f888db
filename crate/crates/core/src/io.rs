//! Flat-file artifacts: run manifests, orbit and surface CSV, JSON documents,
//! SVG plots and the key = value config format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::SurfaceProfile;
use crate::ode::Orbit;

/// Environment variable that pins the manifest timestamp.
pub const TIMESTAMP_ENV: &str = "CMC_SHOOTER_TIMESTAMP";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub version: String,
    pub timestamp: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: Value, timestamp: Option<String>) -> Self {
        let timestamp = timestamp
            .or_else(|| std::env::var(TIMESTAMP_ENV).ok())
            .unwrap_or_else(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
        RunManifest {
            command: command.to_string(),
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("manifest serialises")
    }
}

/// A JSON document `{"manifest": ..., <key>: body}`.
pub fn json_document<T: Serialize>(manifest: &RunManifest, key: &str, body: &T) -> Result<String> {
    let mut m = serde_json::Map::new();
    m.insert("manifest".into(), serde_json::to_value(manifest)?);
    m.insert(key.into(), serde_json::to_value(body)?);
    Ok(serde_json::to_string_pretty(&Value::Object(m))? + "\n")
}

#[derive(Serialize)]
struct EventRow<'a> {
    kind: &'a crate::ode::EventKind,
    y: f64,
    g: f64,
    gp: f64,
}

/// Orbit samples as CSV. The first line is `# manifest: {...}`; events follow
/// the rows as a `# events:` JSON line.
pub fn orbit_csv(orbit: &Orbit, manifest: &RunManifest) -> String {
    let mut s = format!("# manifest: {}\ny,g,gp,tau,rho,k,d\n", manifest.to_line());
    for p in &orbit.samples {
        let _ = writeln!(s, "{},{},{},{},{},{},{}", p.y, p.g, p.gp, p.tau, p.rho, p.k, p.d);
    }
    let events: Vec<EventRow> = orbit
        .events
        .iter()
        .map(|e| EventRow { kind: &e.kind, y: e.y, g: e.g, gp: e.gp })
        .collect();
    let _ = writeln!(s, "# events: {}", serde_json::to_string(&events).expect("events serialise"));
    s
}

pub fn surface_csv(surface: &SurfaceProfile, manifest: &RunManifest) -> String {
    let mut s = format!("# manifest: {}\nx,f,fp,Hresidual\n", manifest.to_line());
    for i in 0..surface.x.len() {
        let _ = writeln!(s, "{},{},{},{}", surface.x[i], surface.f[i], surface.fp[i], surface.h_residual[i]);
    }
    s
}

/// Reads an orbit from any JSON document this crate writes: a bare orbit, an
/// `{"orbit": ...}` document or a critical-search result with a `profile`.
pub fn read_orbit_json(text: &str) -> Result<Orbit> {
    let v: Value = serde_json::from_str(text)?;
    let mut node = &v;
    for key in ["orbit", "result", "profile"] {
        if let Some(inner) = node.get(key) {
            node = inner;
        }
    }
    Orbit::deserialize(node).map_err(|e| Error::Config(format!("not an orbit document: {e}")))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

const VIEW_W: f64 = 640.0;
const VIEW_H: f64 = 480.0;
const MARGIN: f64 = 48.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(pts: &[(f64, f64)]) -> Frame {
        let mut f = Frame { x0: f64::INFINITY, x1: f64::NEG_INFINITY, y0: f64::INFINITY, y1: f64::NEG_INFINITY };
        for &(x, y) in pts {
            f.x0 = f.x0.min(x);
            f.x1 = f.x1.max(x);
            f.y0 = f.y0.min(y);
            f.y1 = f.y1.max(y);
        }
        if !(f.x1 > f.x0) {
            f.x0 -= 1.0;
            f.x1 += 1.0;
        }
        if !(f.y1 > f.y0) {
            f.y0 -= 1.0;
            f.y1 += 1.0;
        }
        f
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let u = MARGIN + (x - self.x0) / (self.x1 - self.x0) * (VIEW_W - 2.0 * MARGIN);
        let v = VIEW_H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (VIEW_H - 2.0 * MARGIN);
        (u, v)
    }
}

fn svg(title: &str, xlabel: &str, ylabel: &str, runs: &[Vec<(f64, f64)>], frame: &Frame) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {VIEW_W} {VIEW_H}\" width=\"{VIEW_W}\" height=\"{VIEW_H}\">\n"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        VIEW_W - 2.0 * MARGIN,
        VIEW_H - 2.0 * MARGIN
    );
    let _ = writeln!(s, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{title}</text>", VIEW_W / 2.0);
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{xlabel} [{:.4}, {:.4}]</text>",
        VIEW_W / 2.0,
        VIEW_H - 12.0,
        frame.x0,
        frame.x1
    );
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">{ylabel} [{:.4}, {:.4}]</text>",
        VIEW_H / 2.0,
        VIEW_H / 2.0,
        frame.y0,
        frame.y1
    );
    for run in runs.iter().filter(|r| r.len() >= 2) {
        s += "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.2\" points=\"";
        for (i, &(x, y)) in run.iter().enumerate() {
            let (u, v) = frame.map(x, y);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{u:.2},{v:.2}");
        }
        s += "\"/>\n";
    }
    s += "</svg>\n";
    s
}

/// Phase portrait with g′ horizontal and g vertical. Slopes beyond ±clip
/// break the curve instead of stretching the axes.
pub fn phase_portrait_svg(orbit: &Orbit, clip: f64) -> String {
    let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    for s in &orbit.samples {
        if s.gp.abs() <= clip {
            runs.last_mut().unwrap().push((s.gp, s.g));
        } else if !runs.last().unwrap().is_empty() {
            runs.push(Vec::new());
        }
    }
    let all: Vec<(f64, f64)> = runs.iter().flatten().copied().collect();
    svg("phase portrait", "g'", "g", &runs, &Frame::fit(&all))
}

/// Meridian r = f(x) of a reconstructed surface.
pub fn meridian_svg(surface: &SurfaceProfile) -> String {
    let pts: Vec<(f64, f64)> = surface.x.iter().copied().zip(surface.f.iter().copied()).collect();
    let mut frame = Frame::fit(&pts);
    frame.y0 = 0.0;
    svg("meridian", "x", "r", &[pts], &frame)
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected key = value, got `{line}`", n + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::Config(format!("line {}: empty key or value", n + 1)));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}
