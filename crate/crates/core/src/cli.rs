//! The `cmc-shooter` command line.
//!
//! Settings resolve in three layers: built-in defaults, then the `--config`
//! file, then explicit flags. Every artifact embeds the resolved settings.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{classify, skeleton_report};
use crate::error::{Error, Result};
use crate::geometry::build_surface;
use crate::identities::identity_suite;
use crate::io::{self, RunManifest};
use crate::metric::{Cutoff, MetricParams};
use crate::ode::{integrate, OdeConfig};
use crate::shooting::{balance_p, find_critical_a, BalanceConfig, ShootingConfig};
use crate::sweep::sweep;

pub const JOBS_ENV: &str = "CMC_SHOOTER_JOBS";

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTEGRATOR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cmc-shooter", version, about = "CMC spheres of revolution by shooting")]
pub struct Cli {
    /// key = value settings file; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Fixed manifest timestamp, for reproducible artifacts.
    #[arg(long, global = true, env = io::TIMESTAMP_ENV)]
    pub timestamp: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one orbit and report its event skeleton.
    #[command(allow_negative_numbers = true)]
    Integrate(IntegrateArgs),
    /// Print the case (H1, H2, H3) of one orbit.
    #[command(allow_negative_numbers = true)]
    Classify(ClassifyArgs),
    /// Bisect for the critical initial radius a′(H).
    #[command(allow_negative_numbers = true)]
    Shoot(ShootArgs),
    /// Find the p balancing |g′(y₁)| and |g′(y₅)|.
    #[command(allow_negative_numbers = true)]
    Balance(BalanceArgs),
    /// Surface and area report for a saved orbit.
    Area(AreaArgs),
    /// Run a built-in verification suite.
    Verify(VerifyArgs),
    /// Rate table over a geometric list of H values.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct ParamArgs {
    #[arg(long = "H")]
    pub h: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<String>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub y_max: Option<f64>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct ShootArgsCommon {
    #[arg(long)]
    pub eps_pullback: Option<f64>,
    #[arg(long)]
    pub bracket_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub a: Option<f64>,
    /// Solve the Delaunay equation (ρ ≡ 0).
    #[arg(long)]
    pub unperturbed: bool,
    #[arg(long)]
    pub dump_orbit: Option<PathBuf>,
    #[arg(long)]
    pub orbit_json: Option<PathBuf>,
    #[arg(long)]
    pub skeleton: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub unperturbed: bool,
}

#[derive(Debug, Args)]
pub struct ShootArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub shoot: ShootArgsCommon,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub dump_orbit: Option<PathBuf>,
    #[arg(long)]
    pub orbit_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub shoot: ShootArgsCommon,
    #[arg(long)]
    pub p_lo: Option<f64>,
    #[arg(long)]
    pub p_hi: Option<f64>,
    #[arg(long)]
    pub p_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AreaArgs {
    /// Orbit JSON written by `integrate --orbit-json` or `shoot`.
    #[arg(long)]
    pub from: PathBuf,
    #[arg(long)]
    pub surface: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "identities")]
    pub suite: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub shoot: ShootArgsCommon,
    #[arg(long = "H-list", value_delimiter = ',', num_args = 1..)]
    pub h_list: Vec<f64>,
    #[arg(long, env = JOBS_ENV)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub ode: OdeConfig,
    pub metric: MetricParams,
    pub shooting: ShootingConfig,
    pub balance: BalanceConfig,
    pub perturbed: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            ode: OdeConfig::new(0.01, 0.96),
            metric: MetricParams::default(),
            shooting: ShootingConfig::default(),
            balance: BalanceConfig::default(),
            perturbed: true,
        }
    }
}

fn num(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Config(format!("{key}: `{v}` is not a number")))
}

impl Settings {
    pub fn apply_file(&mut self, entries: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in entries {
            match k.as_str() {
                "H" => self.ode.h = num(k, v)?,
                "a" => self.ode.a = num(k, v)?,
                "p" => self.metric.p = num(k, v)?,
                "lambda" => self.metric.lambda = num(k, v)?,
                "cutoff" => self.metric.cutoff = v.parse::<Cutoff>()?,
                "abs_tol" => self.ode.abs_tol = num(k, v)?,
                "rel_tol" => self.ode.rel_tol = num(k, v)?,
                "gp_switch" => self.ode.gp_switch = num(k, v)?,
                "gp_blowup" => self.ode.gp_blowup = num(k, v)?,
                "y_max" => self.ode.y_max = num(k, v)?,
                "max_step" => self.ode.max_step = num(k, v)?,
                "a_lo" => self.shooting.a_lo = num(k, v)?,
                "a_hi" => self.shooting.a_hi = num(k, v)?,
                "bracket_tol" => self.shooting.bracket_tol = num(k, v)?,
                "eps_pullback" => self.shooting.eps_pullback = num(k, v)?,
                "p_lo" => self.balance.p_lo = num(k, v)?,
                "p_hi" => self.balance.p_hi = num(k, v)?,
                "p_tol" => self.balance.p_tol = num(k, v)?,
                "perturbed" => {
                    self.perturbed = v
                        .parse::<bool>()
                        .map_err(|_| Error::Config(format!("perturbed: `{v}` is not true/false")))?
                }
                other => return Err(Error::Config(format!("unknown config key `{other}`"))),
            }
        }
        Ok(())
    }

    fn apply_params(&mut self, a: &ParamArgs) -> Result<()> {
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut self.ode.h, a.h);
        set(&mut self.metric.p, a.p);
        set(&mut self.metric.lambda, a.lambda);
        set(&mut self.ode.abs_tol, a.abs_tol);
        set(&mut self.ode.rel_tol, a.rel_tol);
        set(&mut self.ode.y_max, a.y_max);
        if let Some(c) = &a.cutoff {
            self.metric.cutoff = c.parse()?;
        }
        Ok(())
    }

    fn apply_shoot(&mut self, s: &ShootArgsCommon) {
        if let Some(v) = s.eps_pullback {
            self.shooting.eps_pullback = v;
        }
        if let Some(v) = s.bracket_tol {
            self.shooting.bracket_tol = v;
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ode.validate()?;
        self.metric.validate()?;
        self.shooting.validate()?;
        let b = &self.balance;
        if !(b.p_lo < b.p_hi && b.p_tol > 0.0) {
            return Err(Error::Config(format!("bad p-bracket [{}, {}] / tol {}", b.p_lo, b.p_hi, b.p_tol)));
        }
        Ok(())
    }
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::BracketInvalid { .. } | Error::NoSignChange { .. } => EXIT_CONFIG,
        e if e.is_integrator_failure() => EXIT_INTEGRATOR,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            code_for(&e)
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let mut settings = Settings::default();
    if let Some(path) = &cli.config {
        settings.apply_file(&io::parse_config(&io::read_file(path)?)?)?;
    }
    let ts = cli.timestamp.clone();
    match &cli.command {
        Command::Integrate(a) => cmd_integrate(settings, a, ts, out),
        Command::Classify(a) => cmd_classify(settings, a, ts, out),
        Command::Shoot(a) => cmd_shoot(settings, a, ts, out),
        Command::Balance(a) => cmd_balance(settings, a, ts, out),
        Command::Area(a) => cmd_area(a, ts, out),
        Command::Verify(a) => cmd_verify(a, ts, out),
        Command::Sweep(a) => cmd_sweep(settings, a, ts, out),
    }
}

fn manifest(command: &str, settings: &Settings, ts: Option<String>) -> Result<RunManifest> {
    Ok(RunManifest::new(command, serde_json::to_value(settings)?, ts))
}

fn note_output(m: &mut RunManifest, path: &Option<PathBuf>) {
    if let Some(p) = path {
        m.outputs.push(p.display().to_string());
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn write_opt(path: &Option<PathBuf>, text: impl FnOnce() -> Result<String>) -> Result<()> {
    if let Some(p) = path {
        io::write_file(p, &text()?)?;
    }
    Ok(())
}

fn cmd_integrate(mut s: Settings, a: &IntegrateArgs, ts: Option<String>, out: &mut dyn Write) -> Result<i32> {
    s.apply_params(&a.params)?;
    if let Some(v) = a.a {
        s.ode.a = v;
    }
    if a.unperturbed {
        s.perturbed = false;
    }
    s.validate()?;
    let mut m = manifest("integrate", &s, ts)?;
    for p in [&a.dump_orbit, &a.orbit_json, &a.skeleton, &a.svg] {
        note_output(&mut m, p);
    }
    let orbit = integrate(&s.ode, &s.metric, s.perturbed)?;
    let (skeleton, note) = match skeleton_report(&orbit) {
        Ok(r) => (Some(r), None),
        Err(e @ Error::Unclassifiable(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let body = json!({
        "terminal": orbit.terminal,
        "samples": orbit.samples.len(),
        "y_end": orbit.y_end(),
        "tau_spread": orbit.tau_spread(),
        "skeleton": skeleton,
        "note": note,
    });
    let doc = io::json_document(&m, "result", &body)?;
    write_opt(&a.dump_orbit, || Ok(io::orbit_csv(&orbit, &m)))?;
    write_opt(&a.orbit_json, || io::json_document(&m, "orbit", &orbit))?;
    write_opt(&a.skeleton, || Ok(doc.clone()))?;
    write_opt(&a.svg, || Ok(io::phase_portrait_svg(&orbit, 10.0)))?;
    emit(out, &doc)?;
    Ok(0)
}

fn cmd_classify(mut s: Settings, a: &ClassifyArgs, ts: Option<String>, out: &mut dyn Write) -> Result<i32> {
    s.apply_params(&a.params)?;
    if let Some(v) = a.a {
        s.ode.a = v;
    }
    if a.unperturbed {
        s.perturbed = false;
    }
    s.validate()?;
    let m = manifest("classify", &s, ts)?;
    let cfg = OdeConfig { stop_after_necks: Some(2), ..s.ode };
    let sk = classify(&integrate(&cfg, &s.metric, s.perturbed)?)?;
    emit(out, &io::json_document(&m, "result", &json!({ "a": s.ode.a, "case": sk.case }))?)?;
    Ok(0)
}

fn cmd_shoot(mut s: Settings, a: &ShootArgs, ts: Option<String>, out: &mut dyn Write) -> Result<i32> {
    s.apply_params(&a.params)?;
    s.apply_shoot(&a.shoot);
    s.validate()?;
    let mut m = manifest("shoot", &s, ts)?;
    for p in [&a.output, &a.dump_orbit, &a.orbit_json] {
        note_output(&mut m, p);
    }
    let crit = find_critical_a(s.ode.h, &s.metric, &s.ode, &s.shooting)?;
    let doc = io::json_document(&m, "result", &crit)?;
    write_opt(&a.dump_orbit, || Ok(io::orbit_csv(&crit.profile, &m)))?;
    write_opt(&a.orbit_json, || io::json_document(&m, "orbit", &crit.profile))?;
    match &a.output {
        Some(p) => io::write_file(p, &doc)?,
        None => emit(out, &doc)?,
    }
    Ok(0)
}

fn cmd_balance(mut s: Settings, a: &BalanceArgs, ts: Option<String>, out: &mut dyn Write) -> Result<i32> {
    s.apply_params(&a.params)?;
    s.apply_shoot(&a.shoot);
    if let Some(v) = a.p_lo {
        s.balance.p_lo = v;
    }
    if let Some(v) = a.p_hi {
        s.balance.p_hi = v;
    }
    if let Some(v) = a.p_tol {
        s.balance.p_tol = v;
    }
    s.validate()?;
    let m = manifest("balance", &s, ts)?;
    let r = balance_p(s.ode.h, s.metric.lambda, &s.ode, &s.shooting, &s.balance)?;
    emit(out, &io::json_document(&m, "result", &r)?)?;
    Ok(0)
}

fn cmd_area(a: &AreaArgs, ts: Option<String>, out: &mut dyn Write) -> Result<i32> {
    let orbit = io::read_orbit_json(&io::read_file(&a.from)?)?;
    let mut m = RunManifest::new("area", json!({ "from": a.from.display().to_string() }), ts);
    m.inputs.push(a.from.display().to_string());
    note_output(&mut m, &a.surface);
    note_output(&mut m, &a.svg);
    let surf = build_surface(&orbit)?;
    let h = surf.h;
    let body = json!({
        "H": h,
        "l0": surf.l0,
        "area_euclidean": surf.area_euclidean,
        "area_metric": surf.area_metric,
        "H2_area_euclidean": h * h * surf.area_euclidean,
        "area_ratio_minus_one": surf.area_metric / surf.area_euclidean - 1.0,
        "H_residual_max": surf.h_residual_max,
        "grid_points": surf.x.len(),
    });
    write_opt(&a.surface, || Ok(io::surface_csv(&surf, &m)))?;
    write_opt(&a.svg, || Ok(io::meridian_svg(&surf)))?;
    emit(out, &io::json_document(&m, "result", &body)?)?;
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs, ts: Option<String>, out: &mut dyn Write) -> Result<i32> {
    if a.suite != "identities" {
        return Err(Error::Config(format!("unknown suite `{}` (available: identities)", a.suite)));
    }
    let m = RunManifest::new("verify", json!({ "suite": a.suite }), ts);
    let reports = identity_suite()?;
    let all = reports.iter().all(|r| r.pass);
    if a.json {
        emit(out, &io::json_document(&m, "result", &reports)?)?;
    } else {
        let mut t = format!(
            "{:<34} {:>22} {:>22} {:>10} {:>10}  pass\n",
            "identity", "analytic", "numeric", "error", "tol"
        );
        for r in &reports {
            t += &format!(
                "{:<34} {:>22.15e} {:>22.15e} {:>10.2e} {:>10.2e}  {}\n",
                r.name,
                r.analytic,
                r.numeric,
                r.abs_error,
                r.tolerance,
                if r.pass { "yes" } else { "NO" }
            );
        }
        emit(out, &t)?;
    }
    Ok(if all { 0 } else { EXIT_FAILURE })
}

fn cmd_sweep(mut s: Settings, a: &SweepArgs, ts: Option<String>, out: &mut dyn Write) -> Result<i32> {
    s.apply_params(&a.params)?;
    s.apply_shoot(&a.shoot);
    s.validate()?;
    let jobs = a.jobs.unwrap_or(0);
    let mut m = manifest("sweep", &s, ts)?;
    m.config["H_list"] = json!(a.h_list);
    m.config["jobs"] = json!(jobs);
    note_output(&mut m, &a.json);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let table = pool.install(|| sweep(&a.h_list, &s.metric, &s.ode, &s.shooting))?;
    write_opt(&a.json, || io::json_document(&m, "result", &table))?;
    emit(out, &format!("# manifest: {}\n{}", m.to_line(), table.render()))?;
    Ok(0)
}

/// Entry point for the binary.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}
