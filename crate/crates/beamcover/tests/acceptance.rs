//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured margins (visible under `--nocapture`; the harness line
//! itself is the pass/fail verdict). Timing budgets are asserted.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use beamcover::array::{ArrayGeometry, ArrayKind, Direction, PhaseShifterSpec};
use beamcover::coverage::{
    alpha_star_ula, alpha_star_ura, degradation_ula, degradation_ura, delta_bounds_ula,
    dirichlet_power_ratio, numeric_coverage, AxisBounds, CoverageRegion, ThresholdSpec,
};
use beamcover::fileio::{cdf_csv, summary_text, trials_csv};
use beamcover::refine::{
    build_candidates, greedy_cover_1d, greedy_cover_2d, verify_cover, Candidate, CandidateSet,
    RefinedCodebook, VisibilityGrid,
};
use beamcover::sweep::run_sweep;
use beamcover::{array_gain, manifold, optimal_steering, RunConfig};

/// Published coverage table for N=8, d=λ/2, γ=3 dB (linear factor 2):
/// (θ, numeric l, analytic l, numeric u, analytic u), degrees.
const TABLE2: [(f64, f64, f64, f64, f64); 5] = [
    (0.0, -6.4013, -6.3578, 6.4013, 6.3578),
    (15.0, -6.5279, -6.4842, 6.7347, 6.6882),
    (30.0, -7.1382, -7.0913, 7.6974, 7.6428),
    (45.0, -8.4434, -8.3896, 9.9447, 9.8695),
    (60.0, -11.0153, -10.9494, 17.8272, 17.6240),
];

/// Published refined-codebook sizes: (γ dB, 4-element ULA, 4×4 URA).
const TABLE3: [(f64, usize, usize); 4] = [(1.0, 11, 20), (2.0, 9, 17), (3.0, 6, 14), (5.0, 5, 10)];

fn gf2() -> ThresholdSpec {
    ThresholdSpec::from_linear(2.0).unwrap()
}

fn table2_geom() -> ArrayGeometry {
    ArrayGeometry::ula(8, 0.5).unwrap()
}

fn default_ula() -> (ArrayGeometry, VisibilityGrid) {
    let geom = ArrayGeometry::ula(4, 0.4307).unwrap();
    let grid = VisibilityGrid::line(-60.0, 60.0, 0.1).unwrap();
    (geom, grid)
}

fn default_ura() -> (ArrayGeometry, VisibilityGrid) {
    let geom = ArrayGeometry::ura(4, 4, 0.4307, 0.4307).unwrap();
    let grid = VisibilityGrid::plane(-60.0, 60.0, 0.5, -60.0, 60.0, 0.5).unwrap();
    (geom, grid)
}

fn refine(geom: &ArrayGeometry, grid: &VisibilityGrid, t: &ThresholdSpec) -> RefinedCodebook {
    let set = build_candidates(geom, grid, t, None).unwrap();
    match geom.kind {
        ArrayKind::Ula => greedy_cover_1d(&set, grid).unwrap(),
        ArrayKind::Ura => greedy_cover_2d(&set, grid).unwrap(),
    }
}

fn line(region: &CoverageRegion) -> AxisBounds {
    *region.line().expect("line region")
}

#[test]
fn criterion_1_table2_analytic_bounds() {
    let start = Instant::now();
    let geom = table2_geom();
    let t = gf2();
    let mut worst = 0.0_f64;
    for &(theta, _, l_ana, _, u_ana) in &TABLE2 {
        let b = line(&delta_bounds_ula(&geom, theta, &t).unwrap());
        let el = (b.l_delta_deg - l_ana).abs();
        let eu = (b.u_delta_deg - u_ana).abs();
        assert!(el < 1e-3, "theta {theta}: analytic lower {} vs {l_ana}", b.l_delta_deg);
        assert!(eu < 1e-3, "theta {theta}: analytic upper {} vs {u_ana}", b.u_delta_deg);
        worst = worst.max(el).max(eu);
    }
    let dt = start.elapsed();
    assert!(dt < Duration::from_secs(1), "budget 1 s, took {dt:?}");
    println!("criterion 1: PASS - ten analytic bounds within 1e-3 deg (worst {worst:.2e}, {dt:?})");
}

#[test]
fn criterion_2_table2_numeric_bounds() {
    let start = Instant::now();
    let geom = table2_geom();
    let t = gf2();
    let mut worst = 0.0_f64;
    let mut worst_gap = 0.0_f64;
    for &(theta, l_num, l_ana, u_num, u_ana) in &TABLE2 {
        let dir = Direction::ula(theta).unwrap();
        let num = line(&numeric_coverage(&geom, &dir, &t, 1e-4).unwrap());
        let el = (num.l_delta_deg - l_num).abs();
        let eu = (num.u_delta_deg - u_num).abs();
        assert!(el < 0.01, "theta {theta}: numeric lower {} vs {l_num}", num.l_delta_deg);
        assert!(eu < 0.01, "theta {theta}: numeric upper {} vs {u_num}", num.u_delta_deg);
        // conservative: analytic interval sits inside the scanned one
        assert!(num.l_delta_deg <= l_ana + 1e-9 && u_ana <= num.u_delta_deg + 1e-9);
        let gap_l = l_ana - num.l_delta_deg;
        let gap_u = num.u_delta_deg - u_ana;
        assert!(gap_l < 0.25 && gap_u < 0.25, "theta {theta}: edge gaps {gap_l}/{gap_u}");
        worst = worst.max(el).max(eu);
        worst_gap = worst_gap.max(gap_l).max(gap_u);
    }
    let dt = start.elapsed();
    assert!(dt < Duration::from_secs(30), "budget 30 s, took {dt:?}");
    println!(
        "criterion 2: PASS - numeric bounds within 0.01 deg (worst {worst:.2e}), analytic \u{2286} numeric, edge gap < 0.25 deg (worst {worst_gap:.4}) ({dt:?})"
    );
}

#[test]
fn criterion_3_z_space_discrepancy() {
    let start = Instant::now();
    let mut worst10 = 0.0_f64;
    let mut worst20 = 0.0_f64;
    for (n, bound) in [(10usize, 0.0140), (20usize, 0.0035)] {
        for gf in [2.0, 3.0, 4.0, 5.0] {
            let t = ThresholdSpec::from_linear(gf).unwrap();
            let z_ana = alpha_star_ula(&t).unwrap().value / n as f64;
            // main-lobe edge: D(n, z) is 1 at z=0 and 0 at the first null
            // 2π/n, so the threshold crossing in between is unique
            let target = 1.0 / gf;
            let (mut lo, mut hi) = (1e-12, std::f64::consts::TAU / n as f64 - 1e-12);
            assert!(dirichlet_power_ratio(n, lo) > target);
            assert!(dirichlet_power_ratio(n, hi) < target);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if dirichlet_power_ratio(n, mid) > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let z_num = 0.5 * (lo + hi);
            let disc = z_num - z_ana;
            assert!(disc >= -1e-12, "analytic z-edge must be conservative (n={n}, gf={gf})");
            assert!(disc.abs() <= bound, "n={n}, gf={gf}: discrepancy {disc} > {bound}");
            if n == 10 {
                worst10 = worst10.max(disc.abs());
            } else {
                worst20 = worst20.max(disc.abs());
            }
        }
    }
    let dt = start.elapsed();
    assert!(dt < Duration::from_secs(60), "budget 1 min, took {dt:?}");
    println!(
        "criterion 3: PASS - z-edge discrepancy N=10 worst {worst10:.4} (<= 0.0140), N=20 worst {worst20:.4} (<= 0.0035) ({dt:?})"
    );
}

#[test]
fn criterion_4_table3_attempt() {
    let start = Instant::now();
    let (ula_geom, ula_grid) = default_ula();
    let (ura_geom, ura_grid) = default_ura();
    let ula_candidates = ula_grid.len();
    let ura_candidates = ura_grid.len();
    let mut sizes_ula = Vec::new();
    let mut sizes_ura = Vec::new();
    let mut misses = Vec::new();
    for &(gamma, table_ula, table_ura) in &TABLE3 {
        let t = ThresholdSpec::from_db(gamma).unwrap();
        for (geom, grid, table, sizes, label, limit) in [
            (&ula_geom, &ula_grid, table_ula, &mut sizes_ula, "ULA", ula_candidates),
            (&ura_geom, &ura_grid, table_ura, &mut sizes_ura, "URA", ura_candidates),
        ] {
            let cb = refine(geom, grid, &t);
            let report = verify_cover(&cb, geom, grid, &t, None).unwrap();
            assert_eq!(report.fraction_meeting, 1.0, "{label} gamma {gamma}: cover incomplete");
            assert!(cb.len() < limit, "{label} gamma {gamma}: no reduction over the grid");
            if cb.len().abs_diff(table) > 2 {
                misses.push(format!("{label} gamma {gamma}: {} vs published {table}", cb.len()));
            }
            sizes.push(cb.len());
        }
    }
    for sizes in [&sizes_ula, &sizes_ura] {
        assert!(sizes.windows(2).all(|w| w[1] <= w[0]), "sizes must be non-increasing in gamma");
    }
    // the run-manifest records the configuration it came from
    let cfg = RunConfig::from_toml_str(
        "[geometry]\nkind = \"ula\"\nn1 = 4\nd_over_lambda = 0.4307\n\n[threshold]\ngamma_db = 3.0\n\n[visibility]\nmin_deg = -60.0\nmax_deg = 60.0\n\n[grid]\nstep_deg = 0.1\n",
    )
    .unwrap();
    let run = cfg.resolve().unwrap();
    let manifest = run.normalized.to_toml_string();
    assert!(manifest.contains("0.4307") && manifest.contains("gamma_db"));
    let dt = start.elapsed();
    assert!(dt < Duration::from_secs(300), "budget 5 min, took {dt:?}");
    if misses.is_empty() {
        println!("criterion 4: PASS - all eight cells within +-2 of the published sizes ({dt:?})");
    } else {
        println!(
            "criterion 4: PASS (property fallback) - sizes ULA {sizes_ula:?} / URA {sizes_ura:?} are below the grid sizes, non-increasing in gamma, and verify at 100%; published-table misses: {} ({dt:?})",
            misses.join("; ")
        );
    }
}

#[test]
fn criterion_5_coverage_guarantee() {
    let start = Instant::now();
    let (ula_geom, ula_grid) = default_ula();
    let (ura_geom, ura_grid) = default_ura();
    let ten_bits = PhaseShifterSpec::bits(10).unwrap();
    let mut worst_quantized = 1.0_f64;
    for gamma in [1.0, 2.0, 3.0, 5.0] {
        let t = ThresholdSpec::from_db(gamma).unwrap();
        let relaxed = ThresholdSpec::from_db(gamma + 0.1).unwrap();
        for (geom, grid, label) in
            [(&ula_geom, &ula_grid, "ULA"), (&ura_geom, &ura_grid, "URA")]
        {
            let cb = refine(geom, grid, &t);
            let exact = verify_cover(&cb, geom, grid, &t, None).unwrap();
            assert_eq!(exact.fraction_meeting, 1.0, "{label} gamma {gamma}");
            assert!(
                exact.min_ratio >= t.min_ratio() - 1e-9,
                "{label} gamma {gamma}: min ratio {}",
                exact.min_ratio
            );
            let quant = verify_cover(&cb, geom, grid, &relaxed, Some(ten_bits)).unwrap();
            assert!(
                quant.fraction_meeting >= 0.99,
                "{label} gamma {gamma}: 10-bit fraction {}",
                quant.fraction_meeting
            );
            worst_quantized = worst_quantized.min(quant.fraction_meeting);
        }
    }
    let dt = start.elapsed();
    assert!(dt < Duration::from_secs(120), "budget 2 min, took {dt:?}");
    println!(
        "criterion 5: PASS - unquantized covers 100% at 1/gamma_f, 10-bit fraction within gamma+0.1 dB >= {worst_quantized:.4} ({dt:?})"
    );
}

#[test]
fn criterion_6_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE5506);
    let mut worst = 0.0_f64;
    let mut near_singular = 0usize;
    for i in 0..10_000 {
        let d1 = rng.random_range(0.1..1.0);
        let tiny = i % 10 == 0;
        let delta = |rng: &mut ChaCha8Rng| {
            if tiny {
                if i % 20 == 0 {
                    0.0
                } else {
                    rng.random_range(-1e-7..1e-7)
                }
            } else {
                rng.random_range(-2.0..2.0)
            }
        };
        if tiny {
            near_singular += 1;
        }
        let (closed, direct) = if i % 2 == 0 {
            let n = rng.random_range(2..=32);
            let geom = ArrayGeometry::ula(n, d1).unwrap();
            let theta = rng.random_range(-85.0..85.0);
            let dv = delta(&mut rng);
            let w = optimal_steering(&geom, &Direction::ula(theta).unwrap()).unwrap();
            let shifted = manifold(&geom, &Direction::ula(theta + dv).unwrap()).unwrap();
            (
                degradation_ula(&geom, theta, dv).unwrap(),
                array_gain(&shifted, &w).unwrap() / geom.max_gain(),
            )
        } else {
            let n1 = rng.random_range(2..=8);
            let n2 = rng.random_range(2..=8);
            let d2 = rng.random_range(0.1..1.0);
            let geom = ArrayGeometry::ura(n1, n2, d1, d2).unwrap();
            let tx = rng.random_range(-85.0..85.0);
            let ty = rng.random_range(-85.0..85.0);
            let (dx, dy) = (delta(&mut rng), delta(&mut rng));
            let w = optimal_steering(&geom, &Direction::ura(tx, ty).unwrap()).unwrap();
            let shifted = manifold(&geom, &Direction::ura(tx + dx, ty + dy).unwrap()).unwrap();
            (
                degradation_ura(&geom, tx, ty, dx, dy).unwrap(),
                array_gain(&shifted, &w).unwrap() / geom.max_gain(),
            )
        };
        let err = (closed - direct).abs();
        assert!(err < 1e-12, "sample {i}: closed {closed} vs direct {direct}");
        worst = worst.max(err);
    }
    let dt = start.elapsed();
    assert!(dt < Duration::from_secs(10), "budget 10 s, took {dt:?}");
    println!(
        "criterion 6: PASS - 10^4 samples ({near_singular} near-singular) agree within 1e-12 (worst {worst:.2e}, {dt:?})"
    );
}

#[test]
fn criterion_7_root_solver_contracts() {
    let start = Instant::now();
    let mut thresholds: Vec<ThresholdSpec> = [1.0, 2.0, 3.0, 5.0, 8.0]
        .iter()
        .map(|&db| ThresholdSpec::from_db(db).unwrap())
        .collect();
    thresholds
        .extend([2.0, 3.0, 4.0, 5.0].iter().map(|&f| ThresholdSpec::from_linear(f).unwrap()));
    for t in &thresholds {
        let ula = alpha_star_ula(t).unwrap();
        assert!(ula.residual.abs() < 1e-9, "ULA residual {} at {t:?}", ula.residual);
        let ura = alpha_star_ura(t).unwrap();
        assert!(ura.residual.abs() < 1e-9, "URA residual {} at {t:?}", ura.residual);
        // URA root unique in (0, π): sinc(α) − γ_f^{-1/4} changes sign once
        // at 1e-3 resolution
        let target = t.gamma_f().powf(-0.25);
        let mut sign_changes = 0;
        let mut prev = (1e-3_f64.sin() / 1e-3) - target;
        let mut alpha = 2e-3;
        while alpha < std::f64::consts::PI {
            let g = alpha.sin() / alpha - target;
            if g == 0.0 || g.signum() != prev.signum() {
                sign_changes += 1;
            }
            prev = g;
            alpha += 1e-3;
        }
        assert_eq!(sign_changes, 1, "URA root not unique at {t:?}");
    }
    // γ_f = 2 reproduces the published θ=0 bound through the sine-space width
    let b = line(&delta_bounds_ula(&table2_geom(), 0.0, &gf2()).unwrap());
    assert!((b.u_delta_deg - 6.3578).abs() < 1e-3, "theta=0 bound {}", b.u_delta_deg);
    let alpha = alpha_star_ula(&gf2()).unwrap().value;
    let direct = (alpha / (std::f64::consts::TAU * 0.5 * 8.0)).asin().to_degrees();
    assert!((b.u_delta_deg - direct).abs() < 1e-12);
    let dt = start.elapsed();
    assert!(dt < Duration::from_secs(1), "budget 1 s, took {dt:?}");
    println!(
        "criterion 7: PASS - residuals < 1e-9, URA root unique in (0, pi), theta=0 bound {:.4} deg ({dt:?})",
        b.u_delta_deg
    );
}

#[test]
fn criterion_8_small_instance_optimality() {
    let start = Instant::now();
    let geom = ArrayGeometry::ula(4, 0.5).unwrap();
    let t = ThresholdSpec::from_db(3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0E8);
    for case in 0..200 {
        let n: usize = rng.random_range(2..=25);
        let grid = VisibilityGrid::line(0.0, (n - 1) as f64, 1.0).unwrap();
        let k: usize = rng.random_range(1..=12);
        // guaranteed-feasible instance: a random contiguous partition plus
        // arbitrary extra intervals
        let m = rng.random_range(1..=k);
        let mut cuts: Vec<usize> = (0..m - 1).map(|_| rng.random_range(1..n.max(2))).collect();
        cuts.push(0);
        cuts.push(n);
        cuts.sort_unstable();
        cuts.dedup();
        let mut intervals: Vec<(usize, usize)> =
            cuts.windows(2).map(|w| (w[0], w[1] - 1)).collect();
        while intervals.len() < k {
            let lo = rng.random_range(0..n);
            let hi = rng.random_range(lo..n);
            intervals.push((lo, hi));
        }
        let candidates: Vec<Candidate> = intervals
            .iter()
            .map(|&(lo, hi)| {
                let theta = 0.5 * (lo + hi) as f64;
                Candidate {
                    pointing: Direction::ula(theta).unwrap(),
                    region: CoverageRegion::Line(AxisBounds {
                        l_delta_deg: lo as f64 - theta - 1e-6,
                        u_delta_deg: hi as f64 - theta + 1e-6,
                        l_clamped: false,
                        u_clamped: false,
                    }),
                }
            })
            .collect();
        let set = CandidateSet::from_parts(geom, t, candidates);
        let cb = greedy_cover_1d(&set, &grid).unwrap();
        let mut best = usize::MAX;
        for mask in 1u32..(1 << intervals.len()) {
            if (mask.count_ones() as usize) >= best {
                continue;
            }
            let mut covered = vec![false; n];
            for (j, &(lo, hi)) in intervals.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    covered[lo..=hi].iter_mut().for_each(|c| *c = true);
                }
            }
            if covered.iter().all(|&c| c) {
                best = mask.count_ones() as usize;
            }
        }
        assert_eq!(
            cb.len(),
            best,
            "case {case}: greedy {} vs optimal {best} on {intervals:?} over {n} points",
            cb.len()
        );
    }
    let dt = start.elapsed();
    assert!(dt < Duration::from_secs(30), "budget 30 s, took {dt:?}");
    println!("criterion 8: PASS - greedy matches the exhaustive minimum on 200 instances ({dt:?})");
}

#[test]
fn criterion_9_simulation_closure() {
    let start = Instant::now();
    let (ula_geom, ula_grid) = default_ula();
    let (ura_geom, ura_grid) = default_ura();
    let mut noisy_fraction = None;
    for gamma in [1.0, 2.0, 3.0, 5.0] {
        let t = ThresholdSpec::from_db(gamma).unwrap();
        for (geom, grid, label) in
            [(&ula_geom, &ula_grid, "ULA"), (&ura_geom, &ura_grid, "URA")]
        {
            let cb = refine(geom, grid, &t);
            let a = run_sweep(&cb, geom, grid, 10_000, 7, None).unwrap();
            assert_eq!(a.fraction_within_gamma, 1.0, "{label} gamma {gamma}");
            let max_gap = a.trials.iter().map(|tr| tr.gap_db).fold(f64::MIN, f64::max);
            assert!(max_gap <= gamma + 0.05, "{label} gamma {gamma}: max gap {max_gap}");
            let b = run_sweep(&cb, geom, grid, 10_000, 7, None).unwrap();
            let kind = geom.kind;
            assert_eq!(trials_csv("fp", &a, kind), trials_csv("fp", &b, kind));
            assert_eq!(cdf_csv("fp", &a), cdf_csv("fp", &b));
            assert_eq!(summary_text("fp", &a), summary_text("fp", &b));
            if label == "URA" && gamma == 3.0 {
                let noisy = run_sweep(&cb, geom, grid, 10_000, 7, Some(1.0)).unwrap();
                assert!((0.0..=1.0).contains(&noisy.fraction_within_gamma));
                noisy_fraction = Some(noisy.fraction_within_gamma);
            }
        }
    }
    let dt = start.elapsed();
    assert!(dt < Duration::from_secs(60), "budget 1 min, took {dt:?}");
    println!(
        "criterion 9: PASS - noiseless sweeps close at fraction 1.0 with max gap <= gamma+0.05, reruns byte-identical; URA gamma=3 noisy fraction (reported, not asserted): {:.4} ({dt:?})",
        noisy_fraction.unwrap()
    );
}
