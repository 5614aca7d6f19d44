//! How far a beam can be steered off target before the gain loss budget is
//! spent: degradation ratios, the α* root solvers, closed-form coverage
//! bounds, and a brute-force scanning oracle to validate them.
//!
//! The degradation ratio for an N-element ULA reduces to a normalized
//! Dirichlet kernel in the phase deviation z = 2π(d/λ)(sin(θ+Δ) − sinθ):
//!
//! D(z) = (1/N²)(1 − cos Nz)/(1 − cos z) = (sin(Nz/2)/(N sin(z/2)))²
//!
//! A URA factors into the product of two such kernels, one per axis.
//! The allowed-loss budget γ (dB) enters as γ_f = 10^{γ/10}; coverage is the
//! angular interval where D ≥ 1/γ_f.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::array::{optimal_steering, ArrayGeometry, ArrayKind, Direction};
use crate::error::{Error, Result};

/// Gain-loss budget. Constructed from dB or from the linear factor directly;
/// stores dB, derives γ_f = 10^{γ/10}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdSpec {
    gamma_db: f64,
}

impl ThresholdSpec {
    pub fn from_db(gamma_db: f64) -> Result<Self> {
        if !gamma_db.is_finite() || gamma_db <= 0.0 {
            return Err(Error::InvalidThreshold(format!(
                "gamma_db must be positive and finite so that gamma_f > 1 (got {gamma_db})"
            )));
        }
        Ok(Self { gamma_db })
    }

    pub fn from_linear(gamma_f: f64) -> Result<Self> {
        if !gamma_f.is_finite() || gamma_f <= 1.0 {
            return Err(Error::InvalidThreshold(format!("gamma_f must exceed 1 (got {gamma_f})")));
        }
        Ok(Self { gamma_db: 10.0 * gamma_f.log10() })
    }

    pub fn gamma_db(&self) -> f64 {
        self.gamma_db
    }

    pub fn gamma_f(&self) -> f64 {
        10f64.powf(self.gamma_db / 10.0)
    }

    /// Smallest acceptable gain ratio, 1/γ_f.
    pub fn min_ratio(&self) -> f64 {
        1.0 / self.gamma_f()
    }

    /// Budgets above 8 dB leave the regime where the ULA root equation has
    /// exactly three roots; callers should warn but may proceed.
    pub fn three_root_regime(&self) -> bool {
        self.gamma_db <= 8.0
    }
}

/// Root of a coverage-budget equation together with the equation residual at
/// the returned value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaStar {
    pub value: f64,
    pub kind: ArrayKind,
    pub residual: f64,
}

/// Smallest strictly positive root of 1 − cos(α) − α²/(2γ_f) = 0.
///
/// Scans outward from 0 in 0.01 rad steps for the first sign change past the
/// initial rise, then bisects. The 1 − cos term is evaluated as 2sin²(α/2) so
/// the scan stays well-conditioned arbitrarily close to 0.
pub fn alpha_star_ula(threshold: &ThresholdSpec) -> Result<AlphaStar> {
    let gf = threshold.gamma_f();
    let f = |a: f64| 2.0 * (a / 2.0).sin().powi(2) - a * a / (2.0 * gf);
    const STEP: f64 = 0.01;
    // f < 0 for α > 2√γ_f, so the sign change arrives well before π·γ_f
    let limit = PI * gf + STEP;
    let mut prev = 0.0;
    let mut a = STEP;
    while f(a) > 0.0 {
        prev = a;
        a += STEP;
        if a > limit {
            return Err(Error::RootSearch(format!(
                "no sign change of the ULA root equation below {limit:.3} rad (gamma_f = {gf})"
            )));
        }
    }
    let root = bisect(f, prev, a);
    let residual = 1.0 - root.cos() - root * root / (2.0 * gf);
    Ok(AlphaStar { value: root, kind: ArrayKind::Ula, residual })
}

/// Unique root of sin(α)/α = γ_f^{−1/4} in (0, π); sin(α)/α is strictly
/// decreasing there, so plain bisection suffices.
pub fn alpha_star_ura(threshold: &ThresholdSpec) -> Result<AlphaStar> {
    let target = threshold.gamma_f().powf(-0.25);
    let g = |a: f64| a.sin() / a - target;
    let root = bisect(g, 1e-12, PI);
    let residual = root.sin() / root - target;
    Ok(AlphaStar { value: root, kind: ArrayKind::Ura, residual })
}

/// Bisection on [lo, hi] with f(lo) ≥ 0 > f(hi), run to f64 exhaustion
/// (well inside the 1e-10 residual contract), capped at 200 iterations.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// An off-pointing query with its derived phase deviation(s) in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeviationQuery {
    Ula {
        theta_deg: f64,
        delta_deg: f64,
        z: f64,
    },
    Ura {
        theta_x_deg: f64,
        theta_y_deg: f64,
        delta_x_deg: f64,
        delta_y_deg: f64,
        z1_bar: f64,
        z2_bar: f64,
    },
}

fn check_visible(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || !(-90.0..=90.0).contains(&v) {
        return Err(Error::AngleOutOfRange { name, value_deg: v, min_deg: -90.0, max_deg: 90.0 });
    }
    Ok(())
}

fn phase_deviation(d_over_lambda: f64, theta_deg: f64, delta_deg: f64) -> f64 {
    TAU * d_over_lambda * ((theta_deg + delta_deg).to_radians().sin() - theta_deg.to_radians().sin())
}

impl DeviationQuery {
    pub fn ula(geom: &ArrayGeometry, theta_deg: f64, delta_deg: f64) -> Result<Self> {
        if geom.kind != ArrayKind::Ula {
            return Err(Error::InvalidGeometry("ULA deviation query on non-ULA geometry".into()));
        }
        check_visible("theta_deg", theta_deg)?;
        check_visible("theta_deg + delta_deg", theta_deg + delta_deg)?;
        let z = phase_deviation(geom.d1_over_lambda, theta_deg, delta_deg);
        Ok(DeviationQuery::Ula { theta_deg, delta_deg, z })
    }

    pub fn ura(
        geom: &ArrayGeometry,
        theta_x_deg: f64,
        theta_y_deg: f64,
        delta_x_deg: f64,
        delta_y_deg: f64,
    ) -> Result<Self> {
        if geom.kind != ArrayKind::Ura {
            return Err(Error::InvalidGeometry("URA deviation query on non-URA geometry".into()));
        }
        check_visible("theta_x_deg", theta_x_deg)?;
        check_visible("theta_y_deg", theta_y_deg)?;
        check_visible("theta_x_deg + delta_x_deg", theta_x_deg + delta_x_deg)?;
        check_visible("theta_y_deg + delta_y_deg", theta_y_deg + delta_y_deg)?;
        Ok(DeviationQuery::Ura {
            theta_x_deg,
            theta_y_deg,
            delta_x_deg,
            delta_y_deg,
            z1_bar: phase_deviation(geom.d1_over_lambda, theta_x_deg, delta_x_deg),
            z2_bar: phase_deviation(geom.d2_over_lambda, theta_y_deg, delta_y_deg),
        })
    }
}

/// Squared normalized Dirichlet kernel (sin(Nz/2)/(N sin(z/2)))².
///
/// The removable singularity at z = 0 (and at any full-turn alignment where
/// sin(z/2) vanishes) returns the analytic limit 1 exactly.
pub fn dirichlet_power_ratio(n: usize, z: f64) -> f64 {
    if z.abs() < 1e-9 {
        return 1.0;
    }
    let half = (z / 2.0).sin();
    if half == 0.0 {
        return 1.0;
    }
    let r = (n as f64 * z / 2.0).sin() / (n as f64 * half);
    r * r
}

/// Achievable-to-maximum gain ratio D_θ(Δ) for a ULA, closed form.
pub fn degradation_ula(geom: &ArrayGeometry, theta_deg: f64, delta_deg: f64) -> Result<f64> {
    match DeviationQuery::ula(geom, theta_deg, delta_deg)? {
        DeviationQuery::Ula { z, .. } => Ok(dirichlet_power_ratio(geom.n1, z)),
        DeviationQuery::Ura { .. } => unreachable!(),
    }
}

/// URA degradation: the product of the per-axis kernels in z̄1, z̄2.
pub fn degradation_ura(
    geom: &ArrayGeometry,
    theta_x_deg: f64,
    theta_y_deg: f64,
    delta_x_deg: f64,
    delta_y_deg: f64,
) -> Result<f64> {
    match DeviationQuery::ura(geom, theta_x_deg, theta_y_deg, delta_x_deg, delta_y_deg)? {
        DeviationQuery::Ura { z1_bar, z2_bar, .. } => {
            Ok(dirichlet_power_ratio(geom.n1, z1_bar) * dirichlet_power_ratio(geom.n2, z2_bar))
        }
        DeviationQuery::Ula { .. } => unreachable!(),
    }
}

/// One axis of a coverage region: the deviation interval [l, u] around the
/// pointing angle, with flags marking edges that were cut by the ±90° limit
/// rather than by the gain budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisBounds {
    pub l_delta_deg: f64,
    pub u_delta_deg: f64,
    pub l_clamped: bool,
    pub u_clamped: bool,
}

impl AxisBounds {
    /// Absolute interval [θ + l, θ + u] covered around a pointing angle.
    pub fn absolute(&self, theta_deg: f64) -> (f64, f64) {
        (theta_deg + self.l_delta_deg, theta_deg + self.u_delta_deg)
    }

    pub fn width_deg(&self) -> f64 {
        self.u_delta_deg - self.l_delta_deg
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoverageRegion {
    Line(AxisBounds),
    Rect { x: AxisBounds, y: AxisBounds },
}

impl CoverageRegion {
    pub fn line(&self) -> Option<&AxisBounds> {
        match self {
            CoverageRegion::Line(b) => Some(b),
            CoverageRegion::Rect { .. } => None,
        }
    }

    pub fn rect(&self) -> Option<(&AxisBounds, &AxisBounds)> {
        match self {
            CoverageRegion::Line(_) => None,
            CoverageRegion::Rect { x, y } => Some((x, y)),
        }
    }
}

/// The sine-space half-width of the coverage interval maps back to angles
/// through arcsin; arguments past ±1 mean the budget outlasts the visible
/// range and the edge clamps to ±90°.
fn axis_bounds(theta_deg: f64, half_width_sin: f64) -> AxisBounds {
    let st = theta_deg.to_radians().sin();
    let (u_delta_deg, u_clamped) = if st + half_width_sin > 1.0 {
        (90.0 - theta_deg, true)
    } else {
        ((st + half_width_sin).asin().to_degrees() - theta_deg, false)
    };
    let (l_delta_deg, l_clamped) = if st - half_width_sin < -1.0 {
        (-90.0 - theta_deg, true)
    } else {
        ((st - half_width_sin).asin().to_degrees() - theta_deg, false)
    };
    AxisBounds { l_delta_deg, u_delta_deg, l_clamped, u_clamped }
}

/// Closed-form ULA coverage interval around θ:
/// [arcsin(−α*λ/(2πdN) + sinθ) − θ, arcsin(α*λ/(2πdN) + sinθ) − θ].
pub fn delta_bounds_ula(
    geom: &ArrayGeometry,
    theta_deg: f64,
    threshold: &ThresholdSpec,
) -> Result<CoverageRegion> {
    if geom.kind != ArrayKind::Ula {
        return Err(Error::InvalidGeometry("delta_bounds_ula requires a ULA geometry".into()));
    }
    check_visible("theta_deg", theta_deg)?;
    let alpha = alpha_star_ula(threshold)?;
    let s = alpha.value / (TAU * geom.d1_over_lambda * geom.n1 as f64);
    Ok(CoverageRegion::Line(axis_bounds(theta_deg, s)))
}

/// Closed-form URA coverage rectangle: per-axis intervals with sine-space
/// half-width α*λ/(π d_i N_i). Note π, not 2π: Lemma 2 certifies
/// z̄_i ∈ [−2α*/N_i, 2α*/N_i].
pub fn delta_bounds_ura(
    geom: &ArrayGeometry,
    theta_x_deg: f64,
    theta_y_deg: f64,
    threshold: &ThresholdSpec,
) -> Result<CoverageRegion> {
    if geom.kind != ArrayKind::Ura {
        return Err(Error::InvalidGeometry("delta_bounds_ura requires a URA geometry".into()));
    }
    check_visible("theta_x_deg", theta_x_deg)?;
    check_visible("theta_y_deg", theta_y_deg)?;
    let alpha = alpha_star_ura(threshold)?;
    let sx = alpha.value / (PI * geom.d1_over_lambda * geom.n1 as f64);
    let sy = alpha.value / (PI * geom.d2_over_lambda * geom.n2 as f64);
    Ok(CoverageRegion::Rect {
        x: axis_bounds(theta_x_deg, sx),
        y: axis_bounds(theta_y_deg, sy),
    })
}

/// Dispatch on direction kind.
pub fn delta_bounds(
    geom: &ArrayGeometry,
    dir: &Direction,
    threshold: &ThresholdSpec,
) -> Result<CoverageRegion> {
    match *dir {
        Direction::Ula { theta_deg } => delta_bounds_ula(geom, theta_deg, threshold),
        Direction::Ura { theta_x_deg, theta_y_deg } => {
            delta_bounds_ura(geom, theta_x_deg, theta_y_deg, threshold)
        }
    }
}

pub const DEFAULT_SCAN_STEP_DEG: f64 = 1e-4;

/// Brute-force coverage oracle: steer at `direction`, then walk Δ outward
/// from 0 in `scan_step_deg` increments, evaluating the exact direct-sum gain
/// ratio until it drops below 1/γ_f, independently per side (and per axis for
/// a URA, with the other axis held at the pointing angle). Edges that reach
/// ±90° without exhausting the budget come back clamped.
pub fn numeric_coverage(
    geom: &ArrayGeometry,
    direction: &Direction,
    threshold: &ThresholdSpec,
    scan_step_deg: f64,
) -> Result<CoverageRegion> {
    if !(scan_step_deg > 0.0) || !scan_step_deg.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "scan_step_deg must be positive (got {scan_step_deg})"
        )));
    }
    let w = optimal_steering(geom, direction)?;
    let min_ratio = threshold.min_ratio();
    let max_gain = geom.max_gain();
    let beta = geom.path_gain;

    // direct sum |a(θ+Δ)·w|²/(Nβ²) without per-step allocation
    let eval = |angles: (f64, f64)| -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        match geom.kind {
            ArrayKind::Ula => {
                let psi = TAU * geom.d1_over_lambda * angles.0.to_radians().sin();
                for (m, wm) in w.weights.iter().enumerate() {
                    acc += Complex64::from_polar(beta, m as f64 * psi) * wm;
                }
            }
            ArrayKind::Ura => {
                let psi1 = TAU * geom.d1_over_lambda * angles.0.to_radians().sin();
                let psi2 = TAU * geom.d2_over_lambda * angles.1.to_radians().sin();
                let mut it = w.weights.iter();
                for m1 in 0..geom.n1 {
                    for m2 in 0..geom.n2 {
                        let wm = it.next().expect("weight length equals n1*n2");
                        acc += Complex64::from_polar(beta, m1 as f64 * psi1 + m2 as f64 * psi2)
                            * wm;
                    }
                }
            }
        }
        acc.norm_sqr() / max_gain
    };

    let scan_axis = |theta: f64, other: f64, axis_is_x: bool| -> AxisBounds {
        let place = |t: f64| if axis_is_x { (t, other) } else { (other, t) };
        let walk = |sign: f64| -> (f64, bool) {
            let limit = if sign > 0.0 { 90.0 - theta } else { -90.0 - theta };
            let mut last = 0.0;
            let mut k = 1u64;
            loop {
                let d = sign * k as f64 * scan_step_deg;
                if d.abs() >= limit.abs() {
                    if eval(place(theta + limit)) >= min_ratio {
                        return (limit, true);
                    }
                    return (last, false);
                }
                if eval(place(theta + d)) < min_ratio {
                    return (last, false);
                }
                last = d;
                k += 1;
            }
        };
        let (u, u_cl) = walk(1.0);
        let (l, l_cl) = walk(-1.0);
        AxisBounds { l_delta_deg: l, u_delta_deg: u, l_clamped: l_cl, u_clamped: u_cl }
    };

    match *direction {
        Direction::Ula { theta_deg } => Ok(CoverageRegion::Line(scan_axis(theta_deg, 0.0, true))),
        Direction::Ura { theta_x_deg, theta_y_deg } => Ok(CoverageRegion::Rect {
            x: scan_axis(theta_x_deg, theta_y_deg, true),
            y: scan_axis(theta_y_deg, theta_x_deg, false),
        }),
    }
}
