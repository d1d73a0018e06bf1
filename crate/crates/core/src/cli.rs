//! The `odesurface` command-line front end.
//!
//! Every subcommand prints a short human summary to stdout and, with
//! `--out`, writes a JSON report carrying `"schema": 1`. Floating-point
//! values are written with 17 significant digits, so identical invocations
//! produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::expr::{is_numerically_zero, parse, sweep, Expr, Region};
use crate::integrability::{
    closedness_residual, constant_curvature_integrating_factor, flat_first_integral, integrate_with_mu,
    jacobi_residuals, lie_symmetry_check, IntegrationReport, SymmetryVerdict, Tolerances, VectorFieldXY,
};
use crate::json::{self, SCHEMA_VERSION};
use crate::numerics::{solve_ode, solve_pregeodesic, Trajectory};
use crate::surface::{build_surface, classify_curvature, Classification, CurvatureClass, Deformation, OdeProblem};

#[derive(Debug, Parser)]
#[command(name = "odesurface", version, about = "Curvature-based integrability analysis for u' = phi(x, u)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metric, curvature and curvature class of the (deformed) surface
    Analyze(Common),
    /// Integrate by the flat or constant-curvature route
    Integrate(IntegrateArgs),
    /// Check an integrating factor, a symmetry or a Jacobi field
    Verify(VerifyArgs),
    /// Trace a pregeodesic of the associated surface
    Geodesic(GeodesicArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// right-hand side phi(x, u)
    #[arg(long, allow_hyphen_values = true)]
    pub phi: String,
    /// deformation function epsilon(x, u)
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<String>,
    /// sample region as xmin,xmax,umin,umax
    #[arg(long, default_value = "0.5,1.5,0.5,1.5", allow_hyphen_values = true)]
    pub region: String,
    /// grid points per axis
    #[arg(long, default_value_t = 33)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub zero_tol: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// JSON report path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub common: Common,
    /// use this integrating factor instead of the curvature route
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// CSV path for a verification trajectory
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// candidate integrating factor
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// candidate symmetry as "xi;eta"
    #[arg(long, allow_hyphen_values = true)]
    pub symmetry: Option<String>,
    /// candidate Jacobi field as "sigma;delta"
    #[arg(long, allow_hyphen_values = true)]
    pub jacobi: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct GeodesicArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub u0: f64,
    /// initial slope, defaults to phi(x0, u0)
    #[arg(long, allow_hyphen_values = true)]
    pub slope0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xend: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// CSV path for the trajectory
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Parsed and validated inputs shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub phi_text: String,
    pub epsilon_text: Option<String>,
    pub phi: Expr,
    pub epsilon: Expr,
    pub region: Region,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_common(command: &'static str, c: &Common) -> Result<Self> {
        if !(c.zero_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("--zero-tol must be positive, got {}", c.zero_tol)));
        }
        let phi = parse(&c.phi)?;
        let epsilon = match &c.epsilon {
            Some(t) => parse(t)?,
            None => Expr::zero(),
        };
        let region = parse_region(&c.region, c.grid, c.seed)?;
        let tolerances = Tolerances {
            zero: c.zero_tol,
            ..Tolerances::default()
        };
        Ok(Self {
            command,
            phi_text: c.phi.clone(),
            epsilon_text: c.epsilon.clone(),
            phi,
            epsilon,
            region,
            tolerances,
            out: c.out.clone(),
        })
    }

    fn problem(&self) -> Result<OdeProblem> {
        OdeProblem::new(self.phi.clone(), self.region)
    }

    fn deformation(&self) -> Deformation {
        Deformation::new(self.epsilon.clone())
    }

    fn header(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("schema".into(), json!(SCHEMA_VERSION));
        m.insert("command".into(), json!(self.command));
        m.insert("phi".into(), json!(self.phi_text));
        m.insert("epsilon".into(), json!(self.epsilon_text));
        m.insert("region".into(), json::region(&self.region));
        m.insert("zero_tol".into(), json::num(self.tolerances.zero));
        m
    }
}

/// `xmin,xmax,umin,umax`.
pub fn parse_region(text: &str, grid: usize, seed: u64) -> Result<Region> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::InvalidArgument(format!("--region needs 4 comma-separated numbers, got `{text}`")));
    }
    let mut v = [0.0; 4];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("--region: `{part}` is not a number")))?;
    }
    Region::new(v[0], v[1], v[2], v[3], grid, seed)
}

fn split_pair(text: &str, flag: &str) -> Result<(Expr, Expr)> {
    let Some((a, b)) = text.split_once(';') else {
        return Err(Error::InvalidArgument(format!("{flag} expects two expressions separated by `;`")));
    };
    Ok((parse(a)?, parse(b)?))
}

fn write_file(path: &PathBuf, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn write_report(cfg: &RunConfig, report: Map<String, Value>) -> Result<()> {
    if let Some(path) = &cfg.out {
        let mut text = serde_json::to_string_pretty(&Value::Object(report)).expect("JSON values serialize");
        text.push('\n');
        write_file(path, &text)?;
    }
    Ok(())
}

fn class_summary(c: &Classification) -> String {
    match c.class {
        CurvatureClass::Zero => "Zero".to_string(),
        CurvatureClass::Constant(k) => format!("Constant(k = {k})"),
        CurvatureClass::NonConstant => format!(
            "NonConstant (K ranges over [{:.6e}, {:.6e}])",
            c.evidence.min, c.evidence.max
        ),
    }
}

fn analyze(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let s = build_surface(&cfg.problem()?, &cfg.deformation())?;
    let c = classify_curvature(&s, cfg.tolerances.zero)?;
    let _ = writeln!(out, "E = {}", s.e);
    let _ = writeln!(out, "F = {}", s.f);
    let _ = writeln!(out, "G = {}", s.g);
    let _ = writeln!(out, "Delta_eps = {}", s.delta_eps);
    let _ = writeln!(out, "K_eps = {}", s.curvature);
    let _ = writeln!(out, "curvature: {}", class_summary(&c));
    let mut report = cfg.header();
    report.insert("surface".into(), s.to_json());
    report.insert("classification".into(), c.to_json());
    write_report(cfg, report)
}

fn integrate(cfg: &RunConfig, args: &IntegrateArgs, out: &mut dyn Write) -> Result<()> {
    let p = cfg.problem()?;
    let tol = cfg.tolerances;
    let mut report = cfg.header();
    let result = if let Some(mu_text) = &args.mu {
        integrate_with_mu(&p, &parse(mu_text)?, &tol)
    } else {
        let s = build_surface(&p, &cfg.deformation())?;
        let c = classify_curvature(&s, tol.zero)?;
        report.insert("classification".into(), c.to_json());
        match c.class {
            CurvatureClass::Zero if s.epsilon.is_zero() => flat_first_integral(&p, &tol),
            CurvatureClass::Zero | CurvatureClass::Constant(_) => {
                constant_curvature_integrating_factor(&p, &cfg.deformation(), &tol)
            }
            CurvatureClass::NonConstant => Err(Error::NotConstantCurvature {
                min: c.evidence.min,
                max: c.evidence.max,
                mean: c.evidence.mean,
            }),
        }
    };
    let rep = match result {
        Ok(rep) => rep,
        Err(e) => {
            report.insert("error".into(), error_json(&e));
            write_report(cfg, report)?;
            return Err(e);
        }
    };
    print_integration(&rep, out);
    report.insert("integration".into(), rep.to_json());
    if let Some(path) = &args.csv {
        let r = p.region;
        let (x0, u0) = (r.x_min + 0.1 * r.width(), r.center().1);
        let traj = match solve_ode(&p, x0, u0, r.x_max, r.width() / 1000.0) {
            Ok(t) => t,
            Err(Error::LeftDomain { partial, .. }) => *partial,
            Err(e) => return Err(e),
        };
        write_file(path, &traj.to_csv())?;
    }
    write_report(cfg, report)
}

fn print_integration(rep: &IntegrationReport, out: &mut dyn Write) {
    let _ = writeln!(out, "method: {}", rep.method.name());
    if let Some(b) = rep.branch {
        let _ = writeln!(out, "branch: {}", b.name());
    }
    if let Some(d) = &rep.delta_used {
        let _ = writeln!(out, "delta = {d}");
    }
    if let Some(mu) = &rep.mu {
        let _ = writeln!(out, "mu = {mu}");
    }
    if let Some(psi) = &rep.psi {
        let _ = writeln!(out, "Psi = {psi}");
    }
    let _ = writeln!(out, "F = {}", rep.first_integral.describe());
    if let Some(r) = rep.residual_closedness() {
        let _ = writeln!(out, "closedness residual max = {r:.3e}");
    }
    let _ = writeln!(out, "first integral residual = {:.3e}", rep.first_integral_residual());
}

fn error_json(e: &Error) -> Value {
    json!({ "message": e.to_string(), "exit_code": e.exit_code() })
}

fn verify(cfg: &RunConfig, args: &VerifyArgs, out: &mut dyn Write) -> Result<()> {
    if args.mu.is_none() && args.symmetry.is_none() && args.jacobi.is_none() {
        return Err(Error::InvalidArgument("verify needs --mu, --symmetry or --jacobi".into()));
    }
    let r = cfg.region;
    let tol = cfg.tolerances.zero;
    let mut report = cfg.header();
    let mut all_pass = true;

    if let Some(text) = &args.mu {
        let mu = parse(text)?;
        let res = closedness_residual(&cfg.phi, &mu);
        let stats = sweep(&res, &r)?;
        let scale = sweep(&mu, &r)?.max_abs;
        let pass = stats.max_abs <= tol * (1.0 + scale);
        all_pass &= pass;
        let _ = writeln!(
            out,
            "mu: closedness residual max = {:.3e} at {} -> {}",
            stats.max_abs,
            fmt_point(stats.argmax),
            verdict(pass)
        );
        report.insert(
            "mu".into(),
            json!({
                "mu": mu.to_string(),
                "residual": res.to_string(),
                "max_abs": json::num(stats.max_abs),
                "argmax": json::point(stats.argmax),
                "mean_abs": json::num(stats.mean_abs),
                "skipped": stats.skipped,
                "verdict": verdict(pass),
            }),
        );
    }

    if let Some(text) = &args.symmetry {
        let (xi, eta) = split_pair(text, "--symmetry")?;
        let v = VectorFieldXY::new(xi, eta);
        let result = lie_symmetry_check(&cfg.phi, &v, &r, tol)?;
        let pass = result.is_symmetry();
        all_pass &= pass;
        match &result {
            SymmetryVerdict::IsSymmetry { rho, .. } => {
                let _ = writeln!(out, "symmetry: [V, A] = ({rho}) A -> PASS");
            }
            SymmetryVerdict::NotSymmetry(ev) => {
                let _ = writeln!(
                    out,
                    "symmetry: defect max = {:.3e} at {} -> FAIL",
                    ev.max_abs,
                    fmt_point(ev.argmax)
                );
            }
        }
        let mut v = result.to_json();
        v["verdict_label"] = json!(verdict(pass));
        report.insert("symmetry".into(), v);
    }

    if let Some(text) = &args.jacobi {
        let (sigma, delta) = split_pair(text, "--jacobi")?;
        let (r1, r2) = jacobi_residuals(&cfg.phi, &cfg.epsilon, &sigma, &delta);
        let e1 = is_numerically_zero(&r1, &r, tol)?;
        let e2 = is_numerically_zero(&r2, &r, tol)?;
        let pass = e1.is_zero && e2.is_zero;
        all_pass &= pass;
        let _ = writeln!(
            out,
            "jacobi: max |A^2(sigma)| = {:.3e}, max |A^2(delta) + K delta| = {:.3e} -> {}",
            e1.max_abs,
            e2.max_abs,
            verdict(pass)
        );
        report.insert(
            "jacobi".into(),
            json!({
                "sigma": sigma.to_string(),
                "delta": delta.to_string(),
                "residual_sigma": r1.to_string(),
                "residual_delta": r2.to_string(),
                "max_sigma": json::num(e1.max_abs),
                "max_delta": json::num(e2.max_abs),
                "argmax_sigma": json::point(e1.argmax),
                "argmax_delta": json::point(e2.argmax),
                "verdict": verdict(pass),
            }),
        );
    }

    let _ = writeln!(out, "verdict: {}", verdict(all_pass));
    report.insert("verdict".into(), json!(verdict(all_pass)));
    write_report(cfg, report)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn fmt_point(p: Option<(f64, f64)>) -> String {
    match p {
        Some((x, u)) => format!("({x:.6}, {u:.6})"),
        None => "-".to_string(),
    }
}

fn geodesic(cfg: &RunConfig, args: &GeodesicArgs, out: &mut dyn Write) -> Result<()> {
    let p = cfg.problem()?;
    let phi0 = cfg.phi.eval(args.x0, args.u0)?;
    let slope0 = args.slope0.unwrap_or(phi0);
    if !slope0.is_finite() {
        return Err(Error::InvalidArgument("--slope0 must be finite".into()));
    }
    let traj = solve_pregeodesic(&p, args.x0, args.u0, slope0, args.xend, args.step)?;
    // compare with the solution through the same point where it exists
    let deviation = solve_ode(&p, args.x0, args.u0, args.xend, args.step)
        .ok()
        .map(|sol| max_gap(&traj, &sol));
    let last = *traj.last().expect("trajectories hold the initial sample");
    let _ = writeln!(out, "samples: {}", traj.samples.len());
    let _ = writeln!(out, "end: x = {}, u = {}, u' = {}", last.x, last.u, last.uprime);
    if let Some(d) = deviation {
        let _ = writeln!(out, "max |u_geodesic - u_solution| = {d:.3e}");
    }
    if let Some(path) = &args.csv {
        write_file(path, &traj.to_csv())?;
    }
    let mut report = cfg.header();
    report.insert(
        "geodesic".into(),
        json!({
            "method": traj.method.name(),
            "x0": json::num(args.x0),
            "u0": json::num(args.u0),
            "slope0": json::num(slope0),
            "phi_at_start": json::num(phi0),
            "xend": json::num(args.xend),
            "step": json::num(args.step),
            "samples": traj.samples.len(),
            "end": { "x": json::num(last.x), "u": json::num(last.u), "uprime": json::num(last.uprime) },
            "max_deviation_from_solution": deviation.map(json::num),
        }),
    );
    write_report(cfg, report)
}

fn max_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    a.samples
        .iter()
        .zip(&b.samples)
        .map(|(s, t)| (s.u - t.u).abs())
        .fold(0.0, f64::max)
}

/// Run a parsed command, writing the summary to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Analyze(c) => analyze(&RunConfig::from_common("analyze", c)?, out),
        Command::Integrate(a) => integrate(&RunConfig::from_common("integrate", &a.common)?, a, out),
        Command::Verify(a) => verify(&RunConfig::from_common("verify", &a.common)?, a, out),
        Command::Geodesic(a) => geodesic(&RunConfig::from_common("geodesic", &a.common)?, a, out),
    }
}

/// Entry point: parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
