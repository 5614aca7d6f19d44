//! File surfaces: CSV and key=value report rendering, plus the codebook
//! reader. All floats are written with 10 significant digits, lines end in
//! LF, and every artifact opens with a `# fingerprint=` comment so any two
//! files from one run can be matched.

use std::fmt::Write as _;

use crate::array::{optimal_steering, ArrayGeometry, ArrayKind, Direction};
use crate::coverage::{delta_bounds_ula, delta_bounds_ura, ThresholdSpec};
use crate::error::{Error, Result};
use crate::refine::{run_fingerprint, CodebookEntry, CoverReport, RefinedCodebook, VisibilityGrid};
use crate::sweep::SweepReport;

/// Render with 10 significant digits, shortest form: plain decimal in the
/// comfortable range, exponential outside it, trailing zeros trimmed.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    const P: i32 = 10;
    let e = x.abs().log10().floor() as i32;
    if !(-4..P).contains(&e) {
        let s = format!("{:.*e}", (P - 1) as usize, x);
        let (mantissa, exp) = s.split_once('e').expect("exponential format has an e");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (P - 1 - e).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

fn fingerprint_line(fingerprint: &str) -> String {
    format!("# fingerprint={fingerprint}\n")
}

/// One analyzed pointing angle: closed-form and scanned bounds plus the
/// worse of the two edge degradations. `axis` is populated for URA runs.
#[derive(Clone, Copy, Debug)]
pub struct CoverageRow {
    pub theta_deg: f64,
    pub l_analytic: f64,
    pub u_analytic: f64,
    pub l_numeric: f64,
    pub u_numeric: f64,
    pub degradation_at_edges: f64,
    pub axis: Option<u8>,
}

pub fn coverage_csv(fingerprint: &str, rows: &[CoverageRow]) -> String {
    let with_axis = rows.iter().any(|r| r.axis.is_some());
    let mut out = fingerprint_line(fingerprint);
    out.push_str("theta_deg,l_delta_analytic,u_delta_analytic,l_delta_numeric,u_delta_numeric,degradation_at_edges");
    if with_axis {
        out.push_str(",axis");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            fmt_g(r.theta_deg),
            fmt_g(r.l_analytic),
            fmt_g(r.u_analytic),
            fmt_g(r.l_numeric),
            fmt_g(r.u_numeric),
            fmt_g(r.degradation_at_edges)
        );
        if with_axis {
            let _ = write!(out, ",{}", r.axis.unwrap_or(1));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct DegradationRow {
    pub theta_deg: f64,
    pub delta_deg: f64,
    pub degradation: f64,
    pub axis: Option<u8>,
}

pub fn degradation_csv(fingerprint: &str, rows: &[DegradationRow]) -> String {
    let with_axis = rows.iter().any(|r| r.axis.is_some());
    let mut out = fingerprint_line(fingerprint);
    out.push_str("theta_deg,delta_deg,degradation");
    if with_axis {
        out.push_str(",axis");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{}",
            fmt_g(r.theta_deg),
            fmt_g(r.delta_deg),
            fmt_g(r.degradation)
        );
        if with_axis {
            let _ = write!(out, ",{}", r.axis.unwrap_or(1));
        }
        out.push('\n');
    }
    out
}

const ULA_CODEBOOK_BASE: &str = "entry,theta_deg,l_delta_deg,u_delta_deg,l_clamped,u_clamped";
const URA_CODEBOOK_BASE: &str = "entry,theta_x_deg,theta_y_deg,x_l_delta_deg,x_u_delta_deg,x_l_clamped,x_u_clamped,y_l_delta_deg,y_u_delta_deg,y_l_clamped,y_u_clamped";

fn codebook_header(geom: &ArrayGeometry) -> String {
    let base = match geom.kind {
        ArrayKind::Ula => ULA_CODEBOOK_BASE,
        ArrayKind::Ura => URA_CODEBOOK_BASE,
    };
    let mut header = base.to_string();
    for n in 0..geom.elements() {
        let _ = write!(header, ",phase_{n}");
    }
    header
}

fn push_phases(out: &mut String, entry: &CodebookEntry) {
    for p in entry.steering.phases() {
        let _ = write!(out, ",{}", fmt_g(p));
    }
}

/// Phases are the stored (unquantized) weights; hardware quantization is
/// applied downstream at verification and simulation time.
pub fn codebook_csv(codebook: &RefinedCodebook) -> String {
    let mut out = fingerprint_line(&codebook.fingerprint);
    out.push_str(&codebook_header(&codebook.geometry));
    out.push('\n');
    match codebook.geometry.kind {
        ArrayKind::Ula => {
            for (k, e) in codebook.entries.iter().enumerate() {
                let theta = match e.pointing {
                    Direction::Ula { theta_deg } => theta_deg,
                    Direction::Ura { .. } => unreachable!("ULA codebook holds ULA pointings"),
                };
                let b = e.region.line().expect("ULA entries carry line regions");
                let _ = write!(
                    out,
                    "{},{},{},{},{},{}",
                    k,
                    fmt_g(theta),
                    fmt_g(b.l_delta_deg),
                    fmt_g(b.u_delta_deg),
                    u8::from(b.l_clamped),
                    u8::from(b.u_clamped)
                );
                push_phases(&mut out, e);
                out.push('\n');
            }
        }
        ArrayKind::Ura => {
            for (k, e) in codebook.entries.iter().enumerate() {
                let (tx, ty) = match e.pointing {
                    Direction::Ura { theta_x_deg, theta_y_deg } => (theta_x_deg, theta_y_deg),
                    Direction::Ula { .. } => unreachable!("URA codebook holds URA pointings"),
                };
                let (x, y) = e.region.rect().expect("URA entries carry rect regions");
                let _ = write!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    k,
                    fmt_g(tx),
                    fmt_g(ty),
                    fmt_g(x.l_delta_deg),
                    fmt_g(x.u_delta_deg),
                    u8::from(x.l_clamped),
                    u8::from(x.u_clamped),
                    fmt_g(y.l_delta_deg),
                    fmt_g(y.u_delta_deg),
                    u8::from(y.l_clamped),
                    u8::from(y.u_clamped)
                );
                push_phases(&mut out, e);
                out.push('\n');
            }
        }
    }
    out
}

fn csv_err(line_no: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("codebook CSV line {line_no}: {msg}"))
}

fn parse_field(line_no: usize, name: &str, raw: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| csv_err(line_no, format!("{name} is not a number: {raw:?}")))
}

/// Rebuild a codebook from its CSV. Pointing angles are authoritative;
/// steering weights and coverage regions are reconstructed from the geometry
/// and threshold, so a hand-edited bounds column cannot smuggle in a region
/// the math does not grant. Returns the fingerprint stamped in the file
/// alongside the rebuilt codebook (whose own fingerprint is recomputed).
pub fn read_codebook_csv(
    text: &str,
    geom: &ArrayGeometry,
    threshold: &ThresholdSpec,
    grid: &VisibilityGrid,
) -> Result<(String, RefinedCodebook)> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| csv_err(1, "empty file; expected `# fingerprint=` header"))?;
    let file_fingerprint = first
        .strip_prefix("# fingerprint=")
        .ok_or_else(|| csv_err(1, "expected `# fingerprint=` header"))?
        .trim()
        .to_string();
    if file_fingerprint.len() != 16 || !file_fingerprint.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(csv_err(1, format!("malformed fingerprint {file_fingerprint:?}")));
    }
    let (_, header) = lines.next().ok_or_else(|| csv_err(2, "missing header row"))?;
    let expected_header = codebook_header(geom);
    if header.trim() != expected_header {
        return Err(csv_err(
            2,
            format!("unexpected header for a {} codebook: {header:?}", geom.kind),
        ));
    }
    let n_fields = expected_header.split(',').count();
    let n_base = n_fields - geom.elements();
    let mut entries: Vec<CodebookEntry> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n_fields {
            return Err(csv_err(
                line_no,
                format!("expected {n_fields} fields, got {}", fields.len()),
            ));
        }
        let entry_no: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| csv_err(line_no, format!("entry index is not an integer: {:?}", fields[0])))?;
        if entry_no != entries.len() {
            return Err(csv_err(
                line_no,
                format!("entry index {entry_no} out of order; expected {}", entries.len()),
            ));
        }
        let (pointing, region) = match geom.kind {
            ArrayKind::Ula => {
                let theta = parse_field(line_no, "theta_deg", fields[1])?;
                // validate the remaining numeric columns even though bounds
                // get recomputed
                parse_field(line_no, "l_delta_deg", fields[2])?;
                parse_field(line_no, "u_delta_deg", fields[3])?;
                let pointing = Direction::ula(theta)
                    .map_err(|e| csv_err(line_no, e))?;
                let region = delta_bounds_ula(geom, theta, threshold)
                    .map_err(|e| csv_err(line_no, e))?;
                (pointing, region)
            }
            ArrayKind::Ura => {
                let tx = parse_field(line_no, "theta_x_deg", fields[1])?;
                let ty = parse_field(line_no, "theta_y_deg", fields[2])?;
                for (name, raw) in
                    [("x_l_delta_deg", fields[3]), ("x_u_delta_deg", fields[4]),
                     ("y_l_delta_deg", fields[7]), ("y_u_delta_deg", fields[8])]
                {
                    parse_field(line_no, name, raw)?;
                }
                let pointing = Direction::ura(tx, ty)
                    .map_err(|e| csv_err(line_no, e))?;
                let region = delta_bounds_ura(geom, tx, ty, threshold)
                    .map_err(|e| csv_err(line_no, e))?;
                (pointing, region)
            }
        };
        for (n, raw) in fields[n_base..].iter().enumerate() {
            parse_field(line_no, &format!("phase_{n}"), raw)?;
        }
        entries.push(CodebookEntry {
            steering: optimal_steering(geom, &pointing).map_err(|e| csv_err(line_no, e))?,
            pointing,
            region,
        });
    }
    let (a1, a2) = grid.axes();
    let mut grid_steps_deg = vec![a1.step_deg()];
    if let Some(a2) = a2 {
        grid_steps_deg.push(a2.step_deg());
    }
    let codebook = RefinedCodebook {
        geometry: *geom,
        threshold: *threshold,
        grid_steps_deg,
        fingerprint: run_fingerprint(geom, threshold, grid),
        entries,
    };
    Ok((file_fingerprint, codebook))
}

fn direction_fields(dir: &Direction) -> (f64, Option<f64>) {
    match *dir {
        Direction::Ula { theta_deg } => (theta_deg, None),
        Direction::Ura { theta_x_deg, theta_y_deg } => (theta_x_deg, Some(theta_y_deg)),
    }
}

pub fn trials_csv(fingerprint: &str, report: &SweepReport, kind: ArrayKind) -> String {
    let mut out = fingerprint_line(fingerprint);
    match kind {
        ArrayKind::Ula => {
            out.push_str("trial,theta_deg,best_entry,achievable_gain,max_gain,gap_db\n")
        }
        ArrayKind::Ura => out.push_str(
            "trial,theta_x_deg,theta_y_deg,best_entry,achievable_gain,max_gain,gap_db\n",
        ),
    }
    for t in &report.trials {
        let (a, b) = direction_fields(&t.direction);
        let _ = write!(out, "{},{}", t.trial_index, fmt_g(a));
        if let Some(b) = b {
            let _ = write!(out, ",{}", fmt_g(b));
        }
        let _ = writeln!(
            out,
            ",{},{},{},{}",
            t.best_entry_index,
            fmt_g(t.achievable_gain),
            fmt_g(t.max_gain),
            fmt_g(t.gap_db)
        );
    }
    out
}

pub fn cdf_csv(fingerprint: &str, report: &SweepReport) -> String {
    let mut out = fingerprint_line(fingerprint);
    out.push_str("gap_db,fraction\n");
    for (gap, frac) in &report.cdf {
        let _ = writeln!(out, "{},{}", fmt_g(*gap), fmt_g(*frac));
    }
    out
}

/// Key=value verification report; the quantized section appears only when a
/// phase-shifter resolution was supplied.
pub fn verify_report_text(
    fingerprint: &str,
    threshold: &ThresholdSpec,
    entries: usize,
    unquantized: &CoverReport,
    quantized: Option<(u32, &CoverReport)>,
) -> String {
    let mut out = fingerprint_line(fingerprint);
    let _ = writeln!(out, "entries={entries}");
    let _ = writeln!(out, "n_points={}", unquantized.n_points);
    let _ = writeln!(out, "gamma_db={}", fmt_g(threshold.gamma_db()));
    let _ = writeln!(out, "threshold_ratio={}", fmt_g(threshold.min_ratio()));
    fn section(out: &mut String, label: &str, report: &CoverReport) {
        let _ = writeln!(out, "{label}min_ratio={}", fmt_g(report.min_ratio));
        if let Some(dir) = &report.argmin {
            let (a, b) = direction_fields(dir);
            match b {
                None => {
                    let _ = writeln!(out, "{label}argmin_theta_deg={}", fmt_g(a));
                }
                Some(b) => {
                    let _ = writeln!(out, "{label}argmin_theta_x_deg={}", fmt_g(a));
                    let _ = writeln!(out, "{label}argmin_theta_y_deg={}", fmt_g(b));
                }
            }
        }
        let _ = writeln!(out, "{label}fraction_meeting={}", fmt_g(report.fraction_meeting));
    }
    section(&mut out, "", unquantized);
    if let Some((bits, q)) = quantized {
        let _ = writeln!(out, "quantized_bits={bits}");
        section(&mut out, "quantized_", q);
    }
    out
}

pub fn summary_text(fingerprint: &str, report: &SweepReport) -> String {
    let mut gaps: Vec<f64> = report.trials.iter().map(|t| t.gap_db).collect();
    gaps.sort_by(f64::total_cmp);
    let n = gaps.len();
    let mean = gaps.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 { gaps[n / 2] } else { 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]) };
    let max = *gaps.last().expect("a sweep report has at least one trial");
    let mut out = fingerprint_line(fingerprint);
    let _ = writeln!(out, "n_trials={n}");
    let _ = writeln!(out, "seed={}", report.rng_seed);
    match report.noise_std_db {
        Some(std) => {
            let _ = writeln!(out, "noise_std_db={}", fmt_g(std));
        }
        None => {
            let _ = writeln!(out, "noise_std_db=none");
        }
    }
    let _ = writeln!(out, "gamma_db={}", fmt_g(report.gamma_db));
    let _ = writeln!(out, "fraction_within_gamma={}", fmt_g(report.fraction_within_gamma));
    let _ = writeln!(out, "mean_gap_db={}", fmt_g(mean));
    let _ = writeln!(out, "median_gap_db={}", fmt_g(median));
    let _ = writeln!(out, "max_gap_db={}", fmt_g(max));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::refine::{build_candidates, greedy_cover_1d, greedy_cover_2d};
    use crate::sweep::run_sweep;

    #[test]
    fn ten_significant_digits_trimmed() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(-0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(-37.6), "-37.6");
        assert_eq!(fmt_g(0.4307), "0.4307");
        assert_eq!(fmt_g(6.357_817_512_3), "6.357817512");
        assert_eq!(fmt_g(0.501_187_233_627_272_2), "0.5011872336");
        assert_eq!(fmt_g(1e-7), "1e-7");
        assert_eq!(fmt_g(-2.5e12), "-2.5e12");
        assert_eq!(fmt_g(123_456_789_012.0), "1.23456789e11");
        assert_eq!(fmt_g(0.000_123_456), "0.000123456");
    }

    fn small_ula() -> (ArrayGeometry, VisibilityGrid, ThresholdSpec, RefinedCodebook) {
        let geom = ArrayGeometry::ula(4, 0.4307).unwrap();
        let grid = VisibilityGrid::line(-60.0, 60.0, 0.5).unwrap();
        let t = ThresholdSpec::from_db(3.0).unwrap();
        let set = build_candidates(&geom, &grid, &t, None).unwrap();
        let cb = greedy_cover_1d(&set, &grid).unwrap();
        (geom, grid, t, cb)
    }

    #[test]
    fn codebook_csv_round_trips() {
        let (geom, grid, t, cb) = small_ula();
        let text = codebook_csv(&cb);
        assert!(text.starts_with("# fingerprint="));
        assert!(text.ends_with('\n'));
        assert!(!text.contains("\r\n"));
        let (fp, rebuilt) = read_codebook_csv(&text, &geom, &t, &grid).unwrap();
        assert_eq!(fp, cb.fingerprint);
        assert_eq!(rebuilt.len(), cb.len());
        for (a, b) in rebuilt.entries.iter().zip(&cb.entries) {
            match (&a.pointing, &b.pointing) {
                (Direction::Ula { theta_deg: x }, Direction::Ula { theta_deg: y }) => {
                    assert!((x - y).abs() < 1e-9)
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn ura_codebook_round_trips() {
        let geom = ArrayGeometry::ura(4, 4, 0.4307, 0.4307).unwrap();
        let grid = VisibilityGrid::plane(-60.0, 60.0, 2.0, -60.0, 60.0, 2.0).unwrap();
        let t = ThresholdSpec::from_db(3.0).unwrap();
        let set = build_candidates(&geom, &grid, &t, None).unwrap();
        let cb = greedy_cover_2d(&set, &grid).unwrap();
        let text = codebook_csv(&cb);
        let (fp, rebuilt) = read_codebook_csv(&text, &geom, &t, &grid).unwrap();
        assert_eq!(fp, cb.fingerprint);
        assert_eq!(rebuilt.len(), cb.len());
    }

    #[test]
    fn corrupt_codebook_rows_report_their_line() {
        let (geom, grid, t, cb) = small_ula();
        let text = codebook_csv(&cb);
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        lines[2] = "0,not_a_number,0,0,0,0,0,0,0,0".to_string();
        let err = read_codebook_csv(&lines.join("\n"), &geom, &t, &grid).unwrap_err();
        assert!(err.to_string().contains("line 3"), "message: {err}");
        assert!(err.to_string().contains("theta_deg"), "message: {err}");

        let truncated = lines[0].clone() + "\n" + &lines[1] + "\n0,1.5,-7.0\n";
        let err = read_codebook_csv(&truncated, &geom, &t, &grid).unwrap_err();
        assert!(err.to_string().contains("line 3"), "message: {err}");
        assert!(err.to_string().contains("fields"), "message: {err}");

        let err = read_codebook_csv("no header\n", &geom, &t, &grid).unwrap_err();
        assert!(err.to_string().contains("line 1"), "message: {err}");
    }

    #[test]
    fn reports_render_deterministically() {
        let (geom, grid, t, cb) = small_ula();
        let report = crate::verify_cover(&cb, &geom, &grid, &t, None).unwrap();
        let a = verify_report_text(&cb.fingerprint, &t, cb.len(), &report, None);
        let b = verify_report_text(&cb.fingerprint, &t, cb.len(), &report, None);
        assert_eq!(a, b);
        assert!(a.contains("fraction_meeting=1\n"), "report:\n{a}");
        let sweep = run_sweep(&cb, &geom, &grid, 100, 3, None).unwrap();
        let s1 = summary_text(&cb.fingerprint, &sweep);
        assert!(s1.contains("fraction_within_gamma=1\n"), "summary:\n{s1}");
        assert!(s1.contains("noise_std_db=none"));
        let tr = trials_csv(&cb.fingerprint, &sweep, ArrayKind::Ula);
        assert_eq!(tr.lines().count(), 2 + 100);
        let cd = cdf_csv(&cb.fingerprint, &sweep);
        assert!(cd.starts_with("# fingerprint="));
        assert!(cd.lines().nth(1) == Some("gap_db,fraction"));
    }

    #[test]
    fn manifest_carries_meta_and_reingests() {
        let cfg = RunConfig::from_toml_str(
            "[geometry]\nkind = \"ula\"\nn1 = 4\nd_over_lambda = 0.4307\n\n[threshold]\ngamma_db = 3.0\n",
        )
        .unwrap();
        let run = cfg.resolve().unwrap();
        let mut manifest = run.normalized.clone();
        manifest.meta = Some(crate::config::MetaConfig {
            version: Some("1".into()),
            fingerprint: Some(run.fingerprint.clone()),
        });
        let text = manifest.to_toml_string();
        assert!(text.contains("[meta]"));
        assert!(text.contains(&run.fingerprint));
        let back = RunConfig::from_toml_str(&text).unwrap().resolve().unwrap();
        assert_eq!(back.fingerprint, run.fingerprint);
    }
}
