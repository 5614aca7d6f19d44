//! Command-line front end: `analyze`, `refine`, `simulate`.
//!
//! Exit codes: 0 success, 2 config error, 3 infeasible cover,
//! 4 verification failure, 5 fingerprint mismatch.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::exit;

use clap::{Args, Parser, Subcommand};

use beamcover::array::{ArrayKind, Direction, PhaseShifterSpec};
use beamcover::coverage::{
    degradation_ula, degradation_ura, delta_bounds_ula, delta_bounds_ura, numeric_coverage,
};
use beamcover::fileio::{
    cdf_csv, codebook_csv, coverage_csv, degradation_csv, fmt_g, read_codebook_csv, summary_text,
    trials_csv, verify_report_text, CoverageRow, DegradationRow,
};
use beamcover::refine::{build_candidates, greedy_cover_1d, greedy_cover_2d, verify_cover};
use beamcover::sweep::run_sweep;
use beamcover::{Error, ResolvedRun, RunConfig};

#[derive(Parser)]
#[command(
    name = "beamcover",
    version,
    about = "Phased-array coverage analysis, codebook refinement, and beam-sweep simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-angle coverage bounds and degradation curves
    Analyze(CommonArgs),
    /// Refine the candidate grid to a minimal covering codebook and verify it
    Refine(CommonArgs),
    /// Monte-Carlo beam sweep over a refined codebook
    Simulate(SimArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (TOML)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides output.dir)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Phase-shifter resolution in bits (overrides geometry.bits)
    #[arg(long, value_name = "N")]
    quantize_bits: Option<u32>,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Refined codebook CSV (default: OUT/codebook.csv)
    #[arg(long, value_name = "PATH")]
    codebook: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Uncoverable(_) => 3,
            _ => 2,
        };
        fail(code, e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Analyze(args) => load_run(&args).and_then(|run| cmd_analyze(&run)),
        Cmd::Refine(args) => load_run(&args).and_then(|run| cmd_refine(&run)),
        Cmd::Simulate(args) => {
            load_run(&args.common).and_then(|run| cmd_simulate(&run, args.codebook.as_deref()))
        }
    };
    if let Err(f) = result {
        eprintln!("error: {}", f.message);
        exit(f.code);
    }
}

fn load_run(args: &CommonArgs) -> Result<ResolvedRun, Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| fail(2, format!("cannot read {}: {e}", args.config.display())))?;
    let mut run = RunConfig::from_toml_str(&text)?.resolve()?;
    if let Some(out) = &args.out {
        run.out_dir = out.display().to_string();
        run.normalized.output.dir = Some(run.out_dir.clone());
    }
    if let Some(bits) = args.quantize_bits {
        run.bits = Some(PhaseShifterSpec::bits(bits)?);
        run.normalized.geometry.bits = Some(bits);
    }
    if !run.threshold.three_root_regime() {
        eprintln!(
            "warning: gamma_db = {} is outside the small-loss regime (\u{2264} 8 dB); the \
             closed-form coverage bounds are not certified there",
            fmt_g(run.threshold.gamma_db())
        );
    }
    let (a1, a2) = run.grid.axes();
    let mut max_steer = a1.min_deg().abs().max(a1.max_deg().abs());
    if let Some(a2) = a2 {
        max_steer = max_steer.max(a2.min_deg().abs()).max(a2.max_deg().abs());
    }
    if !run.geometry.grating_lobe_free(max_steer) {
        eprintln!(
            "warning: element spacing admits grating lobes when steering to {}\u{b0}; \
             coverage regions may alias",
            fmt_g(max_steer)
        );
    }
    Ok(run)
}

fn out_path(run: &ResolvedRun, name: &str) -> Result<PathBuf, Failure> {
    let dir = PathBuf::from(&run.out_dir);
    fs::create_dir_all(&dir)
        .map_err(|e| fail(2, format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.join(name))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| fail(2, format!("cannot write {}: {e}", path.display())))
}

fn curve_deltas(theta: f64, sweep: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = (2.0 * sweep / step).round() as i64;
    (0..=n)
        .map(move |k| -sweep + k as f64 * step)
        .filter(move |d| (theta + d).abs() <= 90.0)
}

fn cmd_analyze(run: &ResolvedRun) -> Result<(), Failure> {
    let geom = &run.geometry;
    let t = &run.threshold;
    let mut cov_rows: Vec<CoverageRow> = Vec::new();
    let mut deg_rows: Vec<DegradationRow> = Vec::new();
    for &theta in &run.analyze_thetas {
        match geom.kind {
            ArrayKind::Ula => {
                let ana = *delta_bounds_ula(geom, theta, t)?.line().expect("line region");
                let dir = Direction::ula(theta)?;
                let num = *numeric_coverage(geom, &dir, t, run.numeric_step_deg)?
                    .line()
                    .expect("line region");
                let d_edges = degradation_ula(geom, theta, ana.l_delta_deg)?
                    .min(degradation_ula(geom, theta, ana.u_delta_deg)?);
                cov_rows.push(CoverageRow {
                    theta_deg: theta,
                    l_analytic: ana.l_delta_deg,
                    u_analytic: ana.u_delta_deg,
                    l_numeric: num.l_delta_deg,
                    u_numeric: num.u_delta_deg,
                    degradation_at_edges: d_edges,
                    axis: None,
                });
                for delta in curve_deltas(theta, run.delta_sweep_deg, run.curve_step_deg) {
                    deg_rows.push(DegradationRow {
                        theta_deg: theta,
                        delta_deg: delta,
                        degradation: degradation_ula(geom, theta, delta)?,
                        axis: None,
                    });
                }
            }
            ArrayKind::Ura => {
                let region = delta_bounds_ura(geom, theta, theta, t)?;
                let (ax, ay) = region.rect().expect("rect region");
                let (ax, ay) = (*ax, *ay);
                let dir = Direction::ura(theta, theta)?;
                let numeric = numeric_coverage(geom, &dir, t, run.numeric_step_deg)?;
                let (nx, ny) = numeric.rect().expect("rect region");
                for (axis, ana, num) in [(1u8, ax, *nx), (2u8, ay, *ny)] {
                    let (d_l, d_u) = if axis == 1 {
                        (
                            degradation_ura(geom, theta, theta, ana.l_delta_deg, 0.0)?,
                            degradation_ura(geom, theta, theta, ana.u_delta_deg, 0.0)?,
                        )
                    } else {
                        (
                            degradation_ura(geom, theta, theta, 0.0, ana.l_delta_deg)?,
                            degradation_ura(geom, theta, theta, 0.0, ana.u_delta_deg)?,
                        )
                    };
                    cov_rows.push(CoverageRow {
                        theta_deg: theta,
                        l_analytic: ana.l_delta_deg,
                        u_analytic: ana.u_delta_deg,
                        l_numeric: num.l_delta_deg,
                        u_numeric: num.u_delta_deg,
                        degradation_at_edges: d_l.min(d_u),
                        axis: Some(axis),
                    });
                    for delta in curve_deltas(theta, run.delta_sweep_deg, run.curve_step_deg) {
                        let d = if axis == 1 {
                            degradation_ura(geom, theta, theta, delta, 0.0)?
                        } else {
                            degradation_ura(geom, theta, theta, 0.0, delta)?
                        };
                        deg_rows.push(DegradationRow {
                            theta_deg: theta,
                            delta_deg: delta,
                            degradation: d,
                            axis: Some(axis),
                        });
                    }
                }
            }
        }
    }
    let cov_path = out_path(run, "coverage.csv")?;
    write_file(&cov_path, &coverage_csv(&run.fingerprint, &cov_rows))?;
    let deg_path = out_path(run, "degradation.csv")?;
    write_file(&deg_path, &degradation_csv(&run.fingerprint, &deg_rows))?;
    println!(
        "analyze: {} angles -> {} and {}",
        run.analyze_thetas.len(),
        cov_path.display(),
        deg_path.display()
    );
    Ok(())
}

fn manifest_text(run: &ResolvedRun) -> String {
    let mut manifest = run.normalized.clone();
    manifest.meta = Some(beamcover::config::MetaConfig {
        version: Some(env!("CARGO_PKG_VERSION").to_string()),
        fingerprint: Some(run.fingerprint.clone()),
    });
    manifest.to_toml_string()
}

fn cmd_refine(run: &ResolvedRun) -> Result<(), Failure> {
    let geom = &run.geometry;
    let set = build_candidates(geom, &run.grid, &run.threshold, run.candidate_step_deg)?;
    let codebook = match geom.kind {
        ArrayKind::Ula => greedy_cover_1d(&set, &run.grid)?,
        ArrayKind::Ura => greedy_cover_2d(&set, &run.grid)?,
    };
    let report = verify_cover(&codebook, geom, &run.grid, &run.threshold, None)?;
    let quantized = match run.bits {
        Some(spec @ PhaseShifterSpec::Bits(bits)) => {
            Some((bits, verify_cover(&codebook, geom, &run.grid, &run.threshold, Some(spec))?))
        }
        _ => None,
    };
    write_file(&out_path(run, "codebook.csv")?, &codebook_csv(&codebook))?;
    write_file(&out_path(run, "manifest.toml")?, &manifest_text(run))?;
    let report_text = verify_report_text(
        &run.fingerprint,
        &run.threshold,
        codebook.len(),
        &report,
        quantized.as_ref().map(|(b, r)| (*b, r)),
    );
    write_file(&out_path(run, "verify_report.txt")?, &report_text)?;
    println!(
        "refine: {} entries cover {} grid points; min ratio {} (threshold {})",
        codebook.len(),
        report.n_points,
        fmt_g(report.min_ratio),
        fmt_g(run.threshold.min_ratio())
    );
    if report.fraction_meeting < 1.0 {
        return Err(fail(
            4,
            format!(
                "verification failed: only {} of grid points meet the gain threshold",
                fmt_g(report.fraction_meeting)
            ),
        ));
    }
    Ok(())
}

fn cmd_simulate(run: &ResolvedRun, codebook_path: Option<&Path>) -> Result<(), Failure> {
    let default_path = PathBuf::from(&run.out_dir).join("codebook.csv");
    let path = codebook_path.unwrap_or(&default_path);
    let text = fs::read_to_string(path)
        .map_err(|e| fail(2, format!("cannot read {}: {e}", path.display())))?;
    let (file_fp, mut codebook) =
        read_codebook_csv(&text, &run.geometry, &run.threshold, &run.grid)?;
    if file_fp != run.fingerprint {
        return Err(fail(
            5,
            format!(
                "codebook fingerprint {file_fp} does not match config fingerprint {}",
                run.fingerprint
            ),
        ));
    }
    if let Some(spec) = run.bits {
        for e in &mut codebook.entries {
            e.steering = beamcover::quantize_steering(&e.steering, spec);
        }
    }
    let report = run_sweep(
        &codebook,
        &run.geometry,
        &run.grid,
        run.n_trials,
        run.seed,
        run.noise_std_db,
    )?;
    write_file(
        &out_path(run, "trials.csv")?,
        &trials_csv(&run.fingerprint, &report, run.geometry.kind),
    )?;
    write_file(&out_path(run, "cdf.csv")?, &cdf_csv(&run.fingerprint, &report))?;
    write_file(&out_path(run, "summary.txt")?, &summary_text(&run.fingerprint, &report))?;
    println!(
        "simulate: {} trials, fraction within gamma {}",
        report.trials.len(),
        fmt_g(report.fraction_within_gamma)
    );
    Ok(())
}
