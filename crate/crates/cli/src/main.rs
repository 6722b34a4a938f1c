//! Command-line front end: admissibility reports, ground-state certificates
//! and truncated spectral studies for quantum layers over built-in surface
//! families.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use qlayers_core::certify::{
    certify_general_curve, certify_nonneg_curvature, ess_spectrum_probe, CandidateCurve, Verdict,
};
use qlayers_core::solver::{assemble_axisym, eigenvector_csv, truncation_study, TruncatedLayer};
use qlayers_core::surface::admissibility::admissibility;
use qlayers_core::surface::integrals::{hartman_deficit, total_curvature};
use qlayers_core::{FamilyTag, LayerConfig, Surface};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qlayers_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Geometry and admissibility report for the surface.
    Describe,
    /// Search for a negative-energy certificate.
    Certify,
    /// Truncated spectral study (axisymmetric reduction).
    Solve,
    /// Sweep layer half-widths and tabulate verdict against C_a.
    Sweep,
    /// Rayleigh-quotient probe of the essential-spectrum threshold.
    ProbeEss,
    /// Everything above in one combined report.
    Report,
}

/// Ground-state certification for Dirichlet quantum layers.
///
/// The optional positional CONFIG file holds `key = value` lines
/// (`#` starts a comment). Recognized keys: `family` (plane, hyperboloid,
/// gaussian_bump, flattened_paraboloid), shape parameters `slope`, `s`,
/// `height`, `width`, layer half-width `a`, `radii` (comma-separated
/// truncation radii for solve), `n_t`, `budget`, `curve_rho` (switch certify
/// to the curve construction), `compact_radius`, `target_mass` (probe-ess),
/// `sweep_a` (comma-separated half-widths), `samples_csv`,
/// `eigenvector_csv`, `matrix_out` (extra artifact paths).
/// Command-line flags override config values.
///
/// Exit codes: 0 success or certified; 2 certificate refused;
/// 3 no certificate found; 1 any error.
#[derive(Parser)]
#[command(name = "qlayers", version)]
struct Cli {
    /// Optional key=value config file.
    config: Option<PathBuf>,
    /// Surface family: plane | hyperboloid | gaussian_bump | flattened_paraboloid.
    #[arg(long)]
    surface: Option<String>,
    /// Layer half-width.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, value_enum)]
    command: Command,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Target radial grid spacing for the solver.
    #[arg(long)]
    grid: Option<f64>,
    /// Certificate search budget (number of cutoff candidates).
    #[arg(long)]
    budget: Option<usize>,
    /// Worker threads (also honors QLAYERS_THREADS).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Serialize)]
struct SweepRow {
    a: f64,
    ca: f64,
    verdict: String,
    q_value: Option<f64>,
}

#[derive(Serialize)]
struct RunReport {
    tool: String,
    version: String,
    command: String,
    surface: String,
    a: f64,
    kappa_sq: f64,
    config: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    admissibility: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    geometry: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<qlayers_core::Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ess_probe: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<Vec<SweepRow>>,
    /// Wall-clock timings; the only non-deterministic part of the report.
    timings_ms: BTreeMap<String, u128>,
}

fn parse_config(path: &PathBuf) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("line {}: expected key = value", lineno + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn get_f64(cfg: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64, CliError> {
    match cfg.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| CliError::Config(format!("{key}: bad number `{v}`"))),
    }
}

fn get_list(cfg: &BTreeMap<String, String>, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
    match cfg.get(key) {
        None => Ok(default.to_vec()),
        Some(v) => v
            .split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("{key}: bad number `{p}`")))
            })
            .collect(),
    }
}

fn build_surface(
    cfg: &BTreeMap<String, String>,
    flag: &Option<String>,
) -> Result<Surface<f64>, CliError> {
    let family = flag
        .clone()
        .or_else(|| cfg.get("family").cloned())
        .unwrap_or_else(|| "hyperboloid".into());
    let tag = match family.as_str() {
        "plane" => FamilyTag::Plane,
        "hyperboloid" => FamilyTag::Hyperboloid {
            slope: get_f64(cfg, "slope", 2.0)?,
            s: get_f64(cfg, "s", 1.0)?,
        },
        "gaussian_bump" => FamilyTag::GaussianBump {
            height: get_f64(cfg, "height", 1.0)?,
            width: get_f64(cfg, "width", 1.0)?,
        },
        "flattened_paraboloid" => FamilyTag::FlattenedParaboloid {
            slope: get_f64(cfg, "slope", 1.0)?,
            s: get_f64(cfg, "s", 1.0)?,
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown family `{other}` (plane, hyperboloid, gaussian_bump, flattened_paraboloid)"
            )))
        }
    };
    Ok(Surface::from_tag(&tag)?)
}

fn samples_csv(surface: &Surface<f64>, n: usize, r_max: f64) -> String {
    let mut out = String::from("u,v,K,H,normB,nz\n");
    for i in 0..=n {
        let u = r_max * i as f64 / n as f64;
        match surface.sample(u, 0.0) {
            Ok(s) => out.push_str(&format!(
                "{},{},{:e},{:e},{:e},{:e}\n",
                u, 0.0, s.gauss, s.mean, s.norm_b, s.n_z
            )),
            Err(_) => continue,
        }
    }
    out
}

fn run(cli: &Cli) -> Result<(RunReport, u8), CliError> {
    let mut config = match &cli.config {
        Some(p) => parse_config(p)?,
        None => BTreeMap::new(),
    };
    // flags override config so the echoed config reflects the effective run
    if let Some(a) = cli.a {
        config.insert("a".into(), format!("{a}"));
    }
    if let Some(g) = cli.grid {
        config.insert("grid".into(), format!("{g}"));
    }
    if let Some(b) = cli.budget {
        config.insert("budget".into(), format!("{b}"));
    }
    let surface = build_surface(&config, &cli.surface)?;
    let a = get_f64(&config, "a", 0.25)?;
    let cfg = LayerConfig::new(a)?;
    let scale = surface.length_scale();
    let budget = get_f64(&config, "budget", 4.0)? as usize;
    let mut report = RunReport {
        tool: "qlayers".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: format!("{:?}", cli.command).to_lowercase(),
        surface: surface.tag.label(),
        a,
        kappa_sq: cfg.kappa_sq,
        config: config.clone(),
        admissibility: None,
        geometry: None,
        certificate: None,
        spectrum: None,
        ess_probe: None,
        sweep: None,
        timings_ms: BTreeMap::new(),
    };
    let mut code = 0u8;
    let describe = |report: &mut RunReport| -> Result<(), CliError> {
        let t0 = Instant::now();
        let adm = admissibility(&surface, a)?;
        report.admissibility = Some(serde_json::to_value(&adm)?);
        let r_k = get_f64(&config, "total_k_radius", 2000.0 * scale)?;
        let totals = total_curvature(&surface, r_k)?;
        let hartman = hartman_deficit(
            &surface,
            &[250.0 * scale, 500.0 * scale, 1000.0 * scale],
        )?;
        report.geometry = Some(serde_json::json!({
            "total_curvature": serde_json::to_value(&totals)?,
            "hartman": serde_json::to_value(&hartman)?,
        }));
        report
            .timings_ms
            .insert("describe".into(), t0.elapsed().as_millis());
        if let Some(path) = config.get("samples_csv") {
            std::fs::write(path, samples_csv(&surface, 200, 10.0 * scale))?;
        }
        Ok(())
    };
    let certify = |report: &mut RunReport| -> Result<u8, CliError> {
        let t0 = Instant::now();
        let cert = if let Some(rho) = config.get("curve_rho") {
            let rho: f64 = rho
                .parse()
                .map_err(|_| CliError::Config("curve_rho: bad number".into()))?;
            certify_general_curve(
                &surface,
                &cfg,
                &CandidateCurve::GeodesicCircle { rho },
                [0.0, 0.0, 1.0],
                budget,
            )?
        } else {
            certify_nonneg_curvature(&surface, &cfg, budget)?
        };
        report
            .timings_ms
            .insert("certify".into(), t0.elapsed().as_millis());
        let code = match cert.verdict {
            Verdict::Certified => 0,
            Verdict::Refused => 2,
            Verdict::NotFound => 3,
        };
        report.certificate = Some(cert);
        Ok(code)
    };
    let solve = |report: &mut RunReport| -> Result<(), CliError> {
        let t0 = Instant::now();
        let radii = get_list(&config, "radii", &[8.0, 16.0, 32.0])?;
        let h_r = get_f64(&config, "grid", 0.1)?;
        let n_t = get_f64(&config, "n_t", 16.0)? as usize;
        let tol = get_f64(&config, "solver_tol", 1e-5)?;
        let study = truncation_study(&surface, &cfg, &radii, h_r, n_t, tol)?;
        if let Some(path) = config.get("eigenvector_csv") {
            std::fs::write(path, eigenvector_csv(study.results.last().unwrap()))?;
        }
        if let Some(path) = config.get("matrix_out") {
            let r = *radii.last().unwrap();
            let n_r = ((r / h_r).round() as usize).max(4);
            let op = assemble_axisym(&surface, &cfg, &TruncatedLayer::new(r, n_r, n_t)?, 0)?;
            std::fs::write(path, op.stiffness.to_triplet_text())?;
        }
        report.spectrum = Some(serde_json::to_value(&study)?);
        report
            .timings_ms
            .insert("solve".into(), t0.elapsed().as_millis());
        Ok(())
    };
    let probe = |report: &mut RunReport| -> Result<(), CliError> {
        let t0 = Instant::now();
        let compact = get_f64(&config, "compact_radius", 100.0 * scale)?;
        let mass = get_f64(&config, "target_mass", 1e6)?;
        let p = ess_spectrum_probe(&surface, &cfg, compact, mass)?;
        report.ess_probe = Some(serde_json::to_value(&p)?);
        report
            .timings_ms
            .insert("probe_ess".into(), t0.elapsed().as_millis());
        Ok(())
    };
    match cli.command {
        Command::Describe => describe(&mut report)?,
        Command::Certify => code = certify(&mut report)?,
        Command::Solve => solve(&mut report)?,
        Command::ProbeEss => probe(&mut report)?,
        Command::Report => {
            describe(&mut report)?;
            code = certify(&mut report)?;
            solve(&mut report)?;
            probe(&mut report)?;
        }
        Command::Sweep => {
            let t0 = Instant::now();
            let a_values = get_list(&config, "sweep_a", &[0.1, 0.2, 0.3, 0.4, 0.5])?;
            let sup_b = surface_sup_b(&surface)?;
            let mut rows = Vec::new();
            for a in a_values {
                let cfg = LayerConfig::new(a)?;
                let row = match certify_nonneg_curvature(&surface, &cfg, budget) {
                    Ok(cert) => SweepRow {
                        a,
                        ca: a * sup_b,
                        verdict: format!("{:?}", cert.verdict).to_lowercase(),
                        q_value: Some(cert.q_value),
                    },
                    Err(qlayers_core::Error::SelfIntersectionRisk { ca, .. }) => SweepRow {
                        a,
                        ca,
                        verdict: "refused".into(),
                        q_value: None,
                    },
                    Err(e) => return Err(e.into()),
                };
                rows.push(row);
            }
            report.sweep = Some(rows);
            report
                .timings_ms
                .insert("sweep".into(), t0.elapsed().as_millis());
        }
    }
    Ok((report, code))
}

/// sup ||B|| extracted through the admissibility report of a thin layer.
fn surface_sup_b(surface: &Surface<f64>) -> Result<f64, CliError> {
    let adm = admissibility(surface, 1e-6)?;
    Ok(serde_json::to_value(&adm)?["sup_norm_b"]
        .as_f64()
        .unwrap_or(f64::NAN))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("QLAYERS_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        // ignore failure: the pool may already exist in tests
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&cli) {
        Ok((report, code)) => {
            let text = match serde_json::to_string_pretty(&report) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text + "\n") {
                        eprintln!("error: {e}");
                        return ExitCode::from(1);
                    }
                }
                None => println!("{text}"),
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
