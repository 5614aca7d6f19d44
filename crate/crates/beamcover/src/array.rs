//! Array geometry, manifold vectors, and phase-shifter steering weights.
//!
//! Angles cross every public boundary in degrees; radians stay internal.
//! Manifolds carry the path gain β, steering weights carry the 1/√N
//! normalization, and the beamforming gain is the plain (non-conjugated)
//! inner product squared, so steering weights store negated manifold phases.
//!
//! # Example
//! ```
//! use beamcover::array::{ArrayGeometry, Direction, manifold, optimal_steering, array_gain};
//!
//! let geom = ArrayGeometry::ula(8, 0.5).unwrap();
//! let dir = Direction::ula(17.0).unwrap();
//! let a = manifold(&geom, &dir).unwrap();
//! let w = optimal_steering(&geom, &dir).unwrap();
//! let g = array_gain(&a, &w).unwrap();
//! assert!((g - 8.0).abs() < 1e-9);
//! ```

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArrayKind {
    Ula,
    Ura,
}

impl fmt::Display for ArrayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrayKind::Ula => write!(f, "ula"),
            ArrayKind::Ura => write!(f, "ura"),
        }
    }
}

/// Element layout plus per-element path gain β.
///
/// `n1` is the ULA element count or the URA first-axis count; `n2` is fixed
/// to 1 for a ULA. Spacings are the dimensionless ratios d/λ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrayGeometry {
    pub kind: ArrayKind,
    pub n1: usize,
    pub n2: usize,
    pub d1_over_lambda: f64,
    pub d2_over_lambda: f64,
    pub path_gain: f64,
}

/// d/λ from a physical spacing and carrier frequency.
pub fn spacing_to_d_over_lambda(spacing_m: f64, carrier_ghz: f64) -> f64 {
    spacing_m * carrier_ghz * 1e9 / SPEED_OF_LIGHT_M_PER_S
}

impl ArrayGeometry {
    pub fn ula(n: usize, d_over_lambda: f64) -> Result<Self> {
        Self::new(ArrayKind::Ula, n, 1, d_over_lambda, d_over_lambda, 1.0)
    }

    pub fn ura(n1: usize, n2: usize, d1_over_lambda: f64, d2_over_lambda: f64) -> Result<Self> {
        Self::new(ArrayKind::Ura, n1, n2, d1_over_lambda, d2_over_lambda, 1.0)
    }

    pub fn ula_from_spacing(n: usize, spacing_m: f64, carrier_ghz: f64) -> Result<Self> {
        if !(spacing_m > 0.0) || !(carrier_ghz > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "spacing_m and carrier_ghz must be positive (got {spacing_m}, {carrier_ghz})"
            )));
        }
        Self::ula(n, spacing_to_d_over_lambda(spacing_m, carrier_ghz))
    }

    pub fn ura_from_spacing(n1: usize, n2: usize, spacing_m: f64, carrier_ghz: f64) -> Result<Self> {
        if !(spacing_m > 0.0) || !(carrier_ghz > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "spacing_m and carrier_ghz must be positive (got {spacing_m}, {carrier_ghz})"
            )));
        }
        let d = spacing_to_d_over_lambda(spacing_m, carrier_ghz);
        Self::ura(n1, n2, d, d)
    }

    pub fn new(
        kind: ArrayKind,
        n1: usize,
        n2: usize,
        d1_over_lambda: f64,
        d2_over_lambda: f64,
        path_gain: f64,
    ) -> Result<Self> {
        if n1 < 1 || n2 < 1 {
            return Err(Error::InvalidGeometry(format!(
                "element counts must be >= 1 (got n1={n1}, n2={n2})"
            )));
        }
        if kind == ArrayKind::Ula && n2 != 1 {
            return Err(Error::InvalidGeometry(format!("ULA requires n2 = 1 (got {n2})")));
        }
        if !(d1_over_lambda > 0.0) || !d1_over_lambda.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "d1_over_lambda must be positive and finite (got {d1_over_lambda})"
            )));
        }
        if !(d2_over_lambda > 0.0) || !d2_over_lambda.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "d2_over_lambda must be positive and finite (got {d2_over_lambda})"
            )));
        }
        if !(path_gain > 0.0) || !path_gain.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "path_gain must be positive and finite (got {path_gain})"
            )));
        }
        Ok(Self { kind, n1, n2, d1_over_lambda, d2_over_lambda, path_gain })
    }

    pub fn with_path_gain(mut self, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "path_gain must be positive and finite (got {beta})"
            )));
        }
        self.path_gain = beta;
        Ok(self)
    }

    pub fn elements(&self) -> usize {
        self.n1 * self.n2
    }

    /// Peak achievable gain N·β² (N1·N2·β² for a URA).
    pub fn max_gain(&self) -> f64 {
        self.elements() as f64 * self.path_gain * self.path_gain
    }

    /// True when both spacings satisfy d/λ ≤ 1/(1 + |sin(max steering angle)|),
    /// so no grating lobe enters the visible region over the steering range.
    pub fn grating_lobe_free(&self, max_steer_deg: f64) -> bool {
        let limit = 1.0 / (1.0 + max_steer_deg.to_radians().sin().abs());
        let eps = 1e-12;
        match self.kind {
            ArrayKind::Ula => self.d1_over_lambda <= limit + eps,
            ArrayKind::Ura => {
                self.d1_over_lambda <= limit + eps && self.d2_over_lambda <= limit + eps
            }
        }
    }
}

/// Phase-shifter resolution. `Unquantized` is the M = ∞ case: the full
/// continuum of phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PhaseShifterSpec {
    Unquantized,
    Bits(u32),
}

impl PhaseShifterSpec {
    pub fn bits(m: u32) -> Result<Self> {
        if !(1..=32).contains(&m) {
            return Err(Error::InvalidParameter(format!(
                "phase shifter bits must be in 1..=32 (got {m})"
            )));
        }
        Ok(PhaseShifterSpec::Bits(m))
    }

    /// 2^M selectable phases, or None for the unquantized continuum.
    pub fn levels(&self) -> Option<u64> {
        match self {
            PhaseShifterSpec::Unquantized => None,
            PhaseShifterSpec::Bits(m) => Some(1u64 << m),
        }
    }
}

/// A pointing direction. ULA directions are a single angle off boresight;
/// URA directions are the (θ_x, θ_y) pair of Lemma 2's per-axis
/// parametrization, each within ±90°.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Direction {
    Ula { theta_deg: f64 },
    Ura { theta_x_deg: f64, theta_y_deg: f64 },
}

fn check_angle(name: &'static str, value_deg: f64) -> Result<()> {
    if !value_deg.is_finite() || !(-90.0..=90.0).contains(&value_deg) {
        return Err(Error::AngleOutOfRange { name, value_deg, min_deg: -90.0, max_deg: 90.0 });
    }
    Ok(())
}

impl Direction {
    pub fn ula(theta_deg: f64) -> Result<Self> {
        check_angle("theta_deg", theta_deg)?;
        Ok(Direction::Ula { theta_deg })
    }

    pub fn ura(theta_x_deg: f64, theta_y_deg: f64) -> Result<Self> {
        check_angle("theta_x_deg", theta_x_deg)?;
        check_angle("theta_y_deg", theta_y_deg)?;
        Ok(Direction::Ura { theta_x_deg, theta_y_deg })
    }

    pub fn kind(&self) -> ArrayKind {
        match self {
            Direction::Ula { .. } => ArrayKind::Ula,
            Direction::Ura { .. } => ArrayKind::Ura,
        }
    }

    /// Component angles: one for a ULA, (θ_x, θ_y) for a URA.
    pub fn angles(&self) -> Vec<f64> {
        match *self {
            Direction::Ula { theta_deg } => vec![theta_deg],
            Direction::Ura { theta_x_deg, theta_y_deg } => vec![theta_x_deg, theta_y_deg],
        }
    }

    /// Azimuth-elevation pair for a URA direction. Fails when the (θ_x, θ_y)
    /// pair lies outside the physical cone sin²θ_x + sin²θ_y ≤ 1, which the
    /// corners of a wide rectangular grid do.
    pub fn azel_deg(&self) -> Result<(f64, f64)> {
        match *self {
            Direction::Ula { .. } => Err(Error::InvalidParameter(
                "azimuth-elevation form is defined for URA directions only".into(),
            )),
            Direction::Ura { theta_x_deg, theta_y_deg } => xy_to_azel(theta_x_deg, theta_y_deg),
        }
    }
}

/// (θ1, θ2) azimuth-elevation to the (θ_x, θ_y) per-axis form, via
/// sin θ_x = sin θ2 sin θ1 and sin θ_y = sin θ2 cos θ1.
pub fn azel_to_xy(theta1_deg: f64, theta2_deg: f64) -> Result<(f64, f64)> {
    if !theta1_deg.is_finite() || !(-180.0..=180.0).contains(&theta1_deg) {
        return Err(Error::AngleOutOfRange {
            name: "theta1_deg",
            value_deg: theta1_deg,
            min_deg: -180.0,
            max_deg: 180.0,
        });
    }
    check_angle("theta2_deg", theta2_deg)?;
    let (s1, c1) = theta1_deg.to_radians().sin_cos();
    let s2 = theta2_deg.to_radians().sin();
    let sx = (s2 * s1).clamp(-1.0, 1.0);
    let sy = (s2 * c1).clamp(-1.0, 1.0);
    Ok((sx.asin().to_degrees(), sy.asin().to_degrees()))
}

/// Inverse of [`azel_to_xy`]: θ1 = atan2(sin θ_x, sin θ_y), θ2 from the norm.
/// θ2 comes out in [0°, 90°], θ1 in (−180°, 180°].
pub fn xy_to_azel(theta_x_deg: f64, theta_y_deg: f64) -> Result<(f64, f64)> {
    check_angle("theta_x_deg", theta_x_deg)?;
    check_angle("theta_y_deg", theta_y_deg)?;
    let sx = theta_x_deg.to_radians().sin();
    let sy = theta_y_deg.to_radians().sin();
    let r = sx.hypot(sy);
    if r > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "({theta_x_deg} deg, {theta_y_deg} deg) lies outside the visible cone: \
             sin^2 + sin^2 = {:.6} > 1",
            r * r
        )));
    }
    let theta1 = sx.atan2(sy).to_degrees();
    let theta2 = r.min(1.0).asin().to_degrees();
    Ok((theta1, theta2))
}

/// Per-element unit-modulus weights with the 1/√N normalization and the
/// direction they were built to point at.
#[derive(Clone, Debug, PartialEq)]
pub struct SteeringVector {
    pub weights: Vec<Complex64>,
    pub pointing: Direction,
    pub quantized_bits: Option<u32>,
}

impl SteeringVector {
    /// Weight phases in radians, normalized to [0, 2π).
    pub fn phases(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.arg().rem_euclid(TAU)).collect()
    }

    /// Rebuild from stored phases; magnitudes are pinned to 1/√N.
    pub fn from_phases(phases: &[f64], pointing: Direction, quantized_bits: Option<u32>) -> Self {
        let norm = 1.0 / (phases.len() as f64).sqrt();
        let weights = phases.iter().map(|&p| Complex64::from_polar(norm, p)).collect();
        SteeringVector { weights, pointing, quantized_bits }
    }
}

/// ULA manifold β·[1, e^{j2π(d/λ)sinθ}, …, e^{j(N−1)2π(d/λ)sinθ}].
pub fn manifold_ula(geom: &ArrayGeometry, theta_deg: f64) -> Result<Vec<Complex64>> {
    if geom.kind != ArrayKind::Ula {
        return Err(Error::InvalidGeometry("manifold_ula requires a ULA geometry".into()));
    }
    check_angle("theta_deg", theta_deg)?;
    let psi = TAU * geom.d1_over_lambda * theta_deg.to_radians().sin();
    Ok((0..geom.n1)
        .map(|m| Complex64::from_polar(geom.path_gain, m as f64 * psi))
        .collect())
}

/// URA manifold as the Kronecker product of the two axis factors, flattened
/// with the second axis fastest: element (m1, m2) lands at m1·N2 + m2.
/// Axis 1 (n1, d1) responds to θ_x, axis 2 (n2, d2) to θ_y.
pub fn manifold_ura(geom: &ArrayGeometry, dir: &Direction) -> Result<Vec<Complex64>> {
    if geom.kind != ArrayKind::Ura {
        return Err(Error::InvalidGeometry("manifold_ura requires a URA geometry".into()));
    }
    let (tx, ty) = match *dir {
        Direction::Ura { theta_x_deg, theta_y_deg } => (theta_x_deg, theta_y_deg),
        Direction::Ula { .. } => {
            return Err(Error::InvalidParameter(
                "manifold_ura requires a URA direction".into(),
            ))
        }
    };
    check_angle("theta_x_deg", tx)?;
    check_angle("theta_y_deg", ty)?;
    let psi1 = TAU * geom.d1_over_lambda * tx.to_radians().sin();
    let psi2 = TAU * geom.d2_over_lambda * ty.to_radians().sin();
    let mut out = Vec::with_capacity(geom.elements());
    for m1 in 0..geom.n1 {
        for m2 in 0..geom.n2 {
            out.push(Complex64::from_polar(
                geom.path_gain,
                m1 as f64 * psi1 + m2 as f64 * psi2,
            ));
        }
    }
    Ok(out)
}

/// Manifold for either kind; the direction kind must match the geometry.
pub fn manifold(geom: &ArrayGeometry, dir: &Direction) -> Result<Vec<Complex64>> {
    match (geom.kind, dir) {
        (ArrayKind::Ula, Direction::Ula { theta_deg }) => manifold_ula(geom, *theta_deg),
        (ArrayKind::Ura, Direction::Ura { .. }) => manifold_ura(geom, dir),
        _ => Err(Error::InvalidParameter(format!(
            "direction kind {} does not match geometry kind {}",
            dir.kind(),
            geom.kind
        ))),
    }
}

/// Phase-conjugate beamforming toward `pointing`: w_n = (1/√N)e^{−j·arg(a_n)}.
/// Achieves the gain ceiling (Σ|a_n|)²/N = Nβ² at the pointing direction.
pub fn optimal_steering(geom: &ArrayGeometry, pointing: &Direction) -> Result<SteeringVector> {
    let a = manifold(geom, pointing)?;
    let norm = 1.0 / (a.len() as f64).sqrt();
    let mut weights = Vec::with_capacity(a.len());
    for (i, an) in a.iter().enumerate() {
        if an.norm() == 0.0 {
            return Err(Error::DegenerateManifold { index: i });
        }
        weights.push(Complex64::from_polar(norm, -an.arg()));
    }
    Ok(SteeringVector { weights, pointing: *pointing, quantized_bits: None })
}

/// Snap each weight phase to the nearest of the 2^M shifter levels, measured
/// on the circle; an exact midpoint goes to the smaller phase. Magnitudes are
/// untouched. `Unquantized` returns the input unchanged.
pub fn quantize_steering(v: &SteeringVector, spec: PhaseShifterSpec) -> SteeringVector {
    let m = match spec {
        PhaseShifterSpec::Unquantized => {
            return SteeringVector { quantized_bits: None, ..v.clone() };
        }
        PhaseShifterSpec::Bits(m) => m,
    };
    let levels = 1u64 << m;
    let step = TAU / levels as f64;
    let weights = v
        .weights
        .iter()
        .map(|w| {
            let x = w.arg().rem_euclid(TAU) / step;
            // round half down so midpoint ties pick the lower level
            let k = (x - 0.5).ceil() as i64;
            let q = k.rem_euclid(levels as i64) as f64;
            Complex64::from_polar(w.norm(), q * step)
        })
        .collect();
    SteeringVector { weights, pointing: v.pointing, quantized_bits: Some(m) }
}

/// Beamforming gain |Σ_n a_n·w_n|². The steering weights already carry the
/// conjugated phases, so this is a plain inner product.
pub fn array_gain(manifold: &[Complex64], v: &SteeringVector) -> Result<f64> {
    gain_with_weights(manifold, &v.weights)
}

/// [`array_gain`] against a raw weight slice.
pub fn gain_with_weights(manifold: &[Complex64], weights: &[Complex64]) -> Result<f64> {
    if manifold.len() != weights.len() {
        return Err(Error::DimensionMismatch { manifold: manifold.len(), weights: weights.len() });
    }
    let sum: Complex64 = manifold.iter().zip(weights).map(|(a, w)| a * w).sum();
    Ok(sum.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn ula_boresight_manifold_is_all_ones() {
        let g = ArrayGeometry::ula(8, 0.5).unwrap();
        let a = manifold_ula(&g, 0.0).unwrap();
        assert_eq!(a.len(), 8);
        for an in a {
            assert!((an - Complex64::new(1.0, 0.0)).norm() < TOL);
        }
    }

    #[test]
    fn ula_manifold_at_30_degrees_steps_by_quarter_turn() {
        // 2π(d/λ)sin30° = π/2 per element at d/λ = 0.5
        let g = ArrayGeometry::ula(4, 0.5).unwrap();
        let a = manifold_ula(&g, 30.0).unwrap();
        let expect = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for (got, want) in a.iter().zip(expect) {
            assert!((got - want).norm() < 1e-9, "got {got}, want {want}");
        }
    }

    #[test]
    fn ura_manifold_theta_x_drives_the_slow_axis() {
        let g = ArrayGeometry::ura(2, 2, 0.5, 0.5).unwrap();
        let d = Direction::ura(90.0, 0.0).unwrap();
        let a = manifold_ura(&g, &d).unwrap();
        // elements ordered (m1,m2) = (0,0),(0,1),(1,0),(1,1); θ_x phases m1·π
        let expect = [1.0, 1.0, -1.0, -1.0];
        for (got, want) in a.iter().zip(expect) {
            assert!((got - Complex64::new(want, 0.0)).norm() < 1e-9, "got {got}, want {want}");
        }
        // θ_y drives the fast axis
        let d = Direction::ura(0.0, 90.0).unwrap();
        let a = manifold_ura(&g, &d).unwrap();
        let expect = [1.0, -1.0, 1.0, -1.0];
        for (got, want) in a.iter().zip(expect) {
            assert!((got - Complex64::new(want, 0.0)).norm() < 1e-9, "got {got}, want {want}");
        }
    }

    #[test]
    fn ura_manifold_matches_kronecker_of_axis_factors() {
        let g = ArrayGeometry::ura(3, 2, 0.4307, 0.4307).unwrap();
        let d = Direction::ura(25.0, -40.0).unwrap();
        let a = manifold_ura(&g, &d).unwrap();
        let p1 = TAU * 0.4307 * 25f64.to_radians().sin();
        let p2 = TAU * 0.4307 * (-40f64).to_radians().sin();
        let v1: Vec<Complex64> = (0..3).map(|m| Complex64::from_polar(1.0, m as f64 * p1)).collect();
        let v2: Vec<Complex64> = (0..2).map(|m| Complex64::from_polar(1.0, m as f64 * p2)).collect();
        for m1 in 0..3 {
            for m2 in 0..2 {
                let want = v1[m1] * v2[m2];
                let got = a[m1 * 2 + m2];
                assert!((got - want).norm() < TOL);
            }
        }
    }

    #[test]
    fn path_gain_scales_manifold_and_peak_gain() {
        let g = ArrayGeometry::ula(4, 0.5).unwrap().with_path_gain(2.0).unwrap();
        let a = manifold_ula(&g, 10.0).unwrap();
        assert!((a[0].norm() - 2.0).abs() < TOL);
        assert!((g.max_gain() - 16.0).abs() < TOL);
        let d = Direction::ula(10.0).unwrap();
        let w = optimal_steering(&g, &d).unwrap();
        let gain = array_gain(&a, &w).unwrap();
        assert!((gain - 16.0).abs() < 1e-9, "gain {gain}");
    }

    #[test]
    fn optimal_steering_has_exact_modulus_and_hits_the_ceiling() {
        let g = ArrayGeometry::ura(4, 4, 0.4307, 0.4307).unwrap();
        let d = Direction::ura(20.0, -35.0).unwrap();
        let w = optimal_steering(&g, &d).unwrap();
        let norm = 1.0 / 4.0;
        for wn in &w.weights {
            assert!((wn.norm() - norm).abs() < TOL);
        }
        let a = manifold(&g, &d).unwrap();
        let gain = array_gain(&a, &w).unwrap();
        assert!((gain - 16.0).abs() < 1e-9);
    }

    #[test]
    fn gain_is_invariant_to_global_manifold_phase() {
        let g = ArrayGeometry::ula(8, 0.5).unwrap();
        let d = Direction::ula(42.0).unwrap();
        let a = manifold(&g, &d).unwrap();
        let w = optimal_steering(&g, &d).unwrap();
        let rot = Complex64::from_polar(1.0, 1.234);
        let a_rot: Vec<Complex64> = a.iter().map(|x| x * rot).collect();
        let g0 = array_gain(&a, &w).unwrap();
        let g1 = array_gain(&a_rot, &w).unwrap();
        assert!((g0 - g1).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = ArrayGeometry::ula(8, 0.5).unwrap();
        let a = manifold_ula(&g, 0.0).unwrap();
        let small = ArrayGeometry::ula(4, 0.5).unwrap();
        let w = optimal_steering(&small, &Direction::ula(0.0).unwrap()).unwrap();
        match array_gain(&a, &w) {
            Err(Error::DimensionMismatch { manifold: 8, weights: 4 }) => {}
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn quantize_one_bit_tie_goes_to_lower_level() {
        let g = ArrayGeometry::ula(2, 0.5).unwrap();
        let v = SteeringVector::from_phases(
            &[std::f64::consts::FRAC_PI_2, std::f64::consts::PI * 1.5],
            Direction::ula(0.0).unwrap(),
            None,
        );
        let _ = g;
        let q = quantize_steering(&v, PhaseShifterSpec::bits(1).unwrap());
        let ph = q.phases();
        // π/2 is midway between 0 and π: lower phase wins. 3π/2 is midway
        // between π and 2π: π wins.
        assert!(ph[0].abs() < TOL, "got {}", ph[0]);
        assert!((ph[1] - std::f64::consts::PI).abs() < TOL, "got {}", ph[1]);
        assert_eq!(q.quantized_bits, Some(1));
    }

    #[test]
    fn quantize_preserves_modulus_and_unquantized_is_identity() {
        let g = ArrayGeometry::ula(16, 0.5).unwrap();
        let d = Direction::ula(33.3).unwrap();
        let v = optimal_steering(&g, &d).unwrap();
        let q = quantize_steering(&v, PhaseShifterSpec::bits(3).unwrap());
        for (a, b) in v.weights.iter().zip(&q.weights) {
            assert!((a.norm() - b.norm()).abs() < TOL);
        }
        let same = quantize_steering(&v, PhaseShifterSpec::Unquantized);
        assert_eq!(same.weights, v.weights);
        assert_eq!(same.quantized_bits, None);
    }

    #[test]
    fn ten_bit_quantization_loss_is_tiny_on_a_16_element_ura() {
        let g = ArrayGeometry::ura(4, 4, 0.4307, 0.4307).unwrap();
        let d = Direction::ura(17.0, -23.0).unwrap();
        let a = manifold(&g, &d).unwrap();
        let v = optimal_steering(&g, &d).unwrap();
        let q = quantize_steering(&v, PhaseShifterSpec::bits(10).unwrap());
        let loss_db = 10.0 * (array_gain(&a, &v).unwrap() / array_gain(&a, &q).unwrap()).log10();
        assert!(loss_db < 0.01, "loss {loss_db} dB");
        assert!(loss_db >= -1e-12);
    }

    #[test]
    fn azel_to_xy_spec_case_and_axes() {
        let (tx, ty) = azel_to_xy(90.0, 30.0).unwrap();
        assert!((tx - 30.0).abs() < 1e-9);
        assert!(ty.abs() < 1e-9);
        let (tx, ty) = azel_to_xy(0.0, 45.0).unwrap();
        assert!(tx.abs() < 1e-9);
        assert!((ty - 45.0).abs() < 1e-9);
    }

    #[test]
    fn xy_to_azel_rejects_points_outside_the_cone() {
        assert!(xy_to_azel(60.0, 60.0).is_err());
        assert!(xy_to_azel(90.0, 1.0).is_err());
    }

    #[test]
    fn direction_angles_are_range_checked() {
        assert!(Direction::ula(-90.0).is_ok());
        assert!(Direction::ula(90.1).is_err());
        assert!(Direction::ura(0.0, 91.0).is_err());
        assert!(matches!(
            Direction::ula(f64::NAN),
            Err(Error::AngleOutOfRange { name: "theta_deg", .. })
        ));
    }

    #[test]
    fn geometry_validation() {
        assert!(ArrayGeometry::ula(0, 0.5).is_err());
        assert!(ArrayGeometry::ula(4, 0.0).is_err());
        assert!(ArrayGeometry::ula(4, -0.5).is_err());
        assert!(ArrayGeometry::new(ArrayKind::Ula, 4, 2, 0.5, 0.5, 1.0).is_err());
        assert!(ArrayGeometry::ura(4, 4, 0.5, 0.0).is_err());
        assert!(ArrayGeometry::ula(4, 0.5).unwrap().with_path_gain(0.0).is_err());
    }

    #[test]
    fn grating_lobe_rule() {
        // 1/(1+sin60°) = 0.5359
        let g = ArrayGeometry::ula(8, 0.5).unwrap();
        assert!(g.grating_lobe_free(60.0));
        let g = ArrayGeometry::ula(8, 0.6).unwrap();
        assert!(!g.grating_lobe_free(60.0));
        assert!(g.grating_lobe_free(30.0)); // 1/(1+0.5) = 0.667
    }

    #[test]
    fn spacing_constructor_uses_exact_speed_of_light() {
        let g = ArrayGeometry::ura_from_spacing(4, 4, 0.00515, 25.1).unwrap();
        // 0.00515 * 25.1e9 / 299792458
        assert!((g.d1_over_lambda - 0.431181_5).abs() < 1e-6, "got {}", g.d1_over_lambda);
        assert!(ArrayGeometry::ula_from_spacing(4, 0.0, 25.1).is_err());
    }

    proptest! {
        #[test]
        fn gain_never_exceeds_the_ceiling(
            theta in -90.0f64..90.0,
            point in -90.0f64..90.0,
            n in 1usize..24,
            dl in 0.05f64..1.0,
        ) {
            let g = ArrayGeometry::ula(n, dl).unwrap();
            let a = manifold_ula(&g, theta).unwrap();
            let w = optimal_steering(&g, &Direction::ula(point).unwrap()).unwrap();
            let gain = array_gain(&a, &w).unwrap();
            prop_assert!(gain <= g.max_gain() + 1e-9);
            prop_assert!(gain >= -1e-12);
        }

        #[test]
        fn quantized_weights_stay_on_shifter_levels(
            phases in proptest::collection::vec(0.0f64..TAU, 1..16),
            m in 1u32..12,
        ) {
            let v = SteeringVector::from_phases(&phases, Direction::ula(0.0).unwrap(), None);
            let q = quantize_steering(&v, PhaseShifterSpec::bits(m).unwrap());
            let step = TAU / (1u64 << m) as f64;
            for p in q.phases() {
                let k = p / step;
                prop_assert!((k - k.round()).abs() < 1e-9);
                // nearest-level distance on the circle
            }
            for (a, b) in v.phases().iter().zip(q.phases()) {
                let mut d = (a - b).abs() % TAU;
                if d > TAU / 2.0 { d = TAU - d; }
                prop_assert!(d <= step / 2.0 + 1e-9);
            }
        }

        #[test]
        fn xy_azel_roundtrip_within_1e9_degrees(
            tx in -89.0f64..89.0,
            ty in -89.0f64..89.0,
        ) {
            let sx = tx.to_radians().sin();
            let sy = ty.to_radians().sin();
            prop_assume!(sx * sx + sy * sy <= 1.0 - 1e-9);
            let (t1, t2) = xy_to_azel(tx, ty).unwrap();
            let (rx, ry) = azel_to_xy(t1, t2).unwrap();
            prop_assert!((rx - tx).abs() < 1e-9, "x: {} -> {}", tx, rx);
            prop_assert!((ry - ty).abs() < 1e-9, "y: {} -> {}", ty, ry);
        }
    }
}
