//! Codebook refinement: discretize the visibility range, attach a coverage
//! region to every candidate pointing direction, then pick a small subset
//! whose regions cover every grid point.
//!
//! Both pickers are greedy set cover specialized to contiguous regions. In
//! one dimension (intervals on a line) greedy is exactly optimal; on a plane
//! (axis-aligned rectangles) it is the classic ln(n)-approximation.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::array::{manifold, optimal_steering, quantize_steering, ArrayGeometry, ArrayKind, Direction, PhaseShifterSpec, SteeringVector};
use crate::coverage::{delta_bounds_ula, delta_bounds_ura, CoverageRegion, ThresholdSpec};
use crate::error::{Error, Result};
use crate::gain_with_weights;

/// Slack when assigning grid points to coverage regions; regions are closed
/// intervals, so a point computed onto the edge must count as inside.
const EDGE_EPS_DEG: f64 = 1e-9;

/// Uniformly spaced, strictly increasing angles on one axis.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisGrid {
    angles: Vec<f64>,
    step_deg: f64,
}

impl AxisGrid {
    pub fn new(min_deg: f64, max_deg: f64, step_deg: f64) -> Result<Self> {
        if !min_deg.is_finite() || !max_deg.is_finite() || min_deg > max_deg {
            return Err(Error::InvalidGrid(format!(
                "axis range [{min_deg}, {max_deg}] is empty or not finite"
            )));
        }
        if min_deg < -90.0 || max_deg > 90.0 {
            return Err(Error::InvalidGrid(format!(
                "axis range [{min_deg}, {max_deg}] exceeds the visible ±90°"
            )));
        }
        if !(step_deg > 0.0) || !step_deg.is_finite() {
            return Err(Error::InvalidGrid(format!("axis step must be positive (got {step_deg})")));
        }
        let span = max_deg - min_deg;
        let n_exact = span / step_deg;
        let n_round = n_exact.round();
        // land exactly on max when the span is an integer number of steps
        let n = if (n_exact - n_round).abs() <= 1e-6 {
            n_round as usize
        } else {
            n_exact.floor() as usize
        };
        let angles = (0..=n).map(|k| min_deg + k as f64 * step_deg).collect();
        Ok(Self { angles, step_deg })
    }

    /// Wrap an explicit angle list; spacing must be uniform within 1e-9.
    pub fn from_angles(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidGrid("axis needs at least one angle".into()));
        }
        if angles.iter().any(|a| !a.is_finite() || a.abs() > 90.0) {
            return Err(Error::InvalidGrid("axis angles must be finite and within ±90°".into()));
        }
        let step_deg = if angles.len() >= 2 { angles[1] - angles[0] } else { 0.0 };
        for w in angles.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidGrid("axis angles must be strictly increasing".into()));
            }
            if ((w[1] - w[0]) - step_deg).abs() > 1e-9 {
                return Err(Error::InvalidGrid(format!(
                    "axis spacing is not uniform: {} vs {}",
                    w[1] - w[0],
                    step_deg
                )));
            }
        }
        Ok(Self { angles, step_deg })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn step_deg(&self) -> f64 {
        self.step_deg
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn min_deg(&self) -> f64 {
        self.angles[0]
    }

    pub fn max_deg(&self) -> f64 {
        *self.angles.last().expect("axis is never empty")
    }

    /// Indices of the grid angles falling inside [lo, hi] (closed, with edge
    /// slack); None when the interval misses the grid entirely.
    fn index_range(&self, lo_deg: f64, hi_deg: f64) -> Option<(usize, usize)> {
        let lo = self.angles.partition_point(|a| *a < lo_deg - EDGE_EPS_DEG);
        let hi = self.angles.partition_point(|a| *a <= hi_deg + EDGE_EPS_DEG);
        if lo >= hi {
            None
        } else {
            Some((lo, hi - 1))
        }
    }
}

/// The discretized visibility range: a line of angles for a ULA, a Cartesian
/// product of two axes for a URA, plus the covered mask the greedy passes
/// consume. Plane points are stored row-major with the second axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub enum VisibilityGrid {
    Line { axis: AxisGrid, covered: Vec<bool> },
    Plane { axis1: AxisGrid, axis2: AxisGrid, covered: Vec<bool> },
}

impl VisibilityGrid {
    pub fn line(min_deg: f64, max_deg: f64, step_deg: f64) -> Result<Self> {
        Ok(Self::from_axis(AxisGrid::new(min_deg, max_deg, step_deg)?))
    }

    pub fn from_axis(axis: AxisGrid) -> Self {
        let covered = vec![false; axis.len()];
        VisibilityGrid::Line { axis, covered }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn plane(
        min1_deg: f64,
        max1_deg: f64,
        step1_deg: f64,
        min2_deg: f64,
        max2_deg: f64,
        step2_deg: f64,
    ) -> Result<Self> {
        Ok(Self::from_axes(
            AxisGrid::new(min1_deg, max1_deg, step1_deg)?,
            AxisGrid::new(min2_deg, max2_deg, step2_deg)?,
        ))
    }

    pub fn from_axes(axis1: AxisGrid, axis2: AxisGrid) -> Self {
        let covered = vec![false; axis1.len() * axis2.len()];
        VisibilityGrid::Plane { axis1, axis2, covered }
    }

    pub fn kind(&self) -> ArrayKind {
        match self {
            VisibilityGrid::Line { .. } => ArrayKind::Ula,
            VisibilityGrid::Plane { .. } => ArrayKind::Ura,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            VisibilityGrid::Line { covered, .. } | VisibilityGrid::Plane { covered, .. } => {
                covered.len()
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn covered(&self) -> &[bool] {
        match self {
            VisibilityGrid::Line { covered, .. } | VisibilityGrid::Plane { covered, .. } => covered,
        }
    }

    pub fn axes(&self) -> (&AxisGrid, Option<&AxisGrid>) {
        match self {
            VisibilityGrid::Line { axis, .. } => (axis, None),
            VisibilityGrid::Plane { axis1, axis2, .. } => (axis1, Some(axis2)),
        }
    }

    /// Direction of the idx-th grid point (row-major for a plane).
    pub fn point(&self, idx: usize) -> Direction {
        match self {
            VisibilityGrid::Line { axis, .. } => Direction::Ula { theta_deg: axis.angles[idx] },
            VisibilityGrid::Plane { axis1, axis2, .. } => {
                let (i, j) = (idx / axis2.len(), idx % axis2.len());
                Direction::Ura { theta_x_deg: axis1.angles[i], theta_y_deg: axis2.angles[j] }
            }
        }
    }
}

/// A pointing direction together with the coverage region its beam earns.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub pointing: Direction,
    pub region: CoverageRegion,
}

impl Candidate {
    /// Absolute covered interval on the line (ULA candidates only).
    fn line_span(&self) -> Option<(f64, f64)> {
        match (&self.pointing, &self.region) {
            (Direction::Ula { theta_deg }, CoverageRegion::Line(b)) => Some(b.absolute(*theta_deg)),
            _ => None,
        }
    }

    /// Absolute covered rectangle on the plane (URA candidates only).
    fn rect_span(&self) -> Option<((f64, f64), (f64, f64))> {
        match (&self.pointing, &self.region) {
            (
                Direction::Ura { theta_x_deg, theta_y_deg },
                CoverageRegion::Rect { x, y },
            ) => Some((x.absolute(*theta_x_deg), y.absolute(*theta_y_deg))),
            _ => None,
        }
    }
}

/// Candidate beams sorted by where their coverage starts, the order the 1-D
/// greedy scan expects.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    pub geometry: ArrayGeometry,
    pub threshold: ThresholdSpec,
    pub candidates: Vec<Candidate>,
}

fn sort_candidates(candidates: &mut [Candidate]) {
    candidates.sort_by(|a, b| {
        let ka = candidate_sort_key(a);
        let kb = candidate_sort_key(b);
        ka.partial_cmp(&kb).expect("candidate angles are finite")
    });
}

fn candidate_sort_key(c: &Candidate) -> (f64, f64, f64, f64) {
    if let Some((lo, _)) = c.line_span() {
        let theta = match c.pointing {
            Direction::Ula { theta_deg } => theta_deg,
            Direction::Ura { .. } => unreachable!(),
        };
        (lo, theta, 0.0, 0.0)
    } else if let Some(((xlo, _), (ylo, _))) = c.rect_span() {
        let (tx, ty) = match c.pointing {
            Direction::Ura { theta_x_deg, theta_y_deg } => (theta_x_deg, theta_y_deg),
            Direction::Ula { .. } => unreachable!(),
        };
        (xlo, ylo, tx, ty)
    } else {
        (f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY)
    }
}

impl CandidateSet {
    /// Assemble a set from explicit candidates (synthetic instances, tests);
    /// sorts into the canonical coverage-start order.
    pub fn from_parts(
        geometry: ArrayGeometry,
        threshold: ThresholdSpec,
        mut candidates: Vec<Candidate>,
    ) -> Self {
        sort_candidates(&mut candidates);
        Self { geometry, threshold, candidates }
    }
}

/// One candidate per grid angle (or per `candidate_step_deg` if given, which
/// must not exceed the grid step), each carrying its closed-form coverage
/// region.
pub fn build_candidates(
    geom: &ArrayGeometry,
    visibility: &VisibilityGrid,
    threshold: &ThresholdSpec,
    candidate_step_deg: Option<f64>,
) -> Result<CandidateSet> {
    if geom.kind != visibility.kind() {
        return Err(Error::InvalidGeometry(format!(
            "{} geometry cannot target a {} visibility grid",
            geom.kind,
            visibility.kind()
        )));
    }
    if visibility.is_empty() {
        return Err(Error::InvalidGrid("visibility grid is empty".into()));
    }
    let candidate_axis = |axis: &AxisGrid| -> Result<AxisGrid> {
        match candidate_step_deg {
            None => Ok(axis.clone()),
            Some(s) => {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "candidate_step_deg must be positive (got {s})"
                    )));
                }
                if axis.len() > 1 && s > axis.step_deg() + 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "candidate_step_deg {} exceeds the grid step {}",
                        s,
                        axis.step_deg()
                    )));
                }
                AxisGrid::new(axis.min_deg(), axis.max_deg(), s)
            }
        }
    };
    let mut candidates = Vec::new();
    match visibility {
        VisibilityGrid::Line { axis, .. } => {
            for &theta in candidate_axis(axis)?.angles() {
                candidates.push(Candidate {
                    pointing: Direction::Ula { theta_deg: theta },
                    region: delta_bounds_ula(geom, theta, threshold)?,
                });
            }
        }
        VisibilityGrid::Plane { axis1, axis2, .. } => {
            let a1 = candidate_axis(axis1)?;
            let a2 = candidate_axis(axis2)?;
            for &tx in a1.angles() {
                for &ty in a2.angles() {
                    candidates.push(Candidate {
                        pointing: Direction::Ura { theta_x_deg: tx, theta_y_deg: ty },
                        region: delta_bounds_ura(geom, tx, ty, threshold)?,
                    });
                }
            }
        }
    }
    sort_candidates(&mut candidates);
    Ok(CandidateSet { geometry: *geom, threshold: *threshold, candidates })
}

/// A selected beam: its weights, where it points, and what it covers.
#[derive(Clone, Debug, PartialEq)]
pub struct CodebookEntry {
    pub steering: SteeringVector,
    pub pointing: Direction,
    pub region: CoverageRegion,
}

/// Greedy-refined codebook. Entries appear in selection order; by
/// construction each entry was the first to cover some grid point, so none
/// is redundant under that order.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinedCodebook {
    pub geometry: ArrayGeometry,
    pub threshold: ThresholdSpec,
    pub grid_steps_deg: Vec<f64>,
    pub fingerprint: String,
    pub entries: Vec<CodebookEntry>,
}

impl RefinedCodebook {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Canonical 16-hex-digit digest of everything that determines a refinement
/// run: geometry, loss budget, and the visibility grid. Phase-shifter bits
/// and simulation settings are deliberately excluded; they do not change
/// which beams get selected.
pub fn run_fingerprint(
    geom: &ArrayGeometry,
    threshold: &ThresholdSpec,
    grid: &VisibilityGrid,
) -> String {
    let mut canon = String::new();
    write!(
        canon,
        "kind={};n1={};n2={};d1={:?};d2={:?};beta={:?};gamma_db={:?}",
        geom.kind,
        geom.n1,
        geom.n2,
        geom.d1_over_lambda,
        geom.d2_over_lambda,
        geom.path_gain,
        threshold.gamma_db()
    )
    .expect("writing to a String cannot fail");
    let (a1, a2) = grid.axes();
    for axis in std::iter::once(a1).chain(a2) {
        write!(canon, ";axis={:?},{:?},{:?}", axis.min_deg(), axis.max_deg(), axis.step_deg())
            .expect("writing to a String cannot fail");
    }
    let digest = Sha256::digest(canon.as_bytes());
    let mut hex = String::with_capacity(16);
    for b in &digest[..8] {
        write!(hex, "{b:02x}").expect("writing to a String cannot fail");
    }
    hex
}

/// Minimal interval cover of a line grid.
///
/// Repeatedly: take the smallest uncovered angle, choose among the candidates
/// containing it the one whose coverage extends over the most consecutive
/// grid points from there (ties to the smaller pointing angle), mark, repeat.
pub fn greedy_cover_1d(
    candidates: &CandidateSet,
    grid: &VisibilityGrid,
) -> Result<RefinedCodebook> {
    let (axis, covered0) = match grid {
        VisibilityGrid::Line { axis, covered } => (axis, covered),
        VisibilityGrid::Plane { .. } => {
            return Err(Error::InvalidGrid("1-D greedy cover needs a line grid".into()))
        }
    };
    if candidates.geometry.kind != ArrayKind::Ula {
        return Err(Error::InvalidGeometry("1-D greedy cover needs ULA candidates".into()));
    }
    // (pointing angle, covered index range); candidates missing the grid drop out
    let spans: Vec<(f64, usize, usize, &Candidate)> = candidates
        .candidates
        .iter()
        .filter_map(|c| {
            let (lo, hi) = c.line_span()?;
            let (lo_i, hi_i) = axis.index_range(lo, hi)?;
            let theta = match c.pointing {
                Direction::Ula { theta_deg } => theta_deg,
                Direction::Ura { .. } => unreachable!(),
            };
            Some((theta, lo_i, hi_i, c))
        })
        .collect();

    let mut covered = covered0.clone();
    let mut entries = Vec::new();
    while let Some(pivot) = covered.iter().position(|c| !c) {
        let mut best: Option<(usize, f64, &Candidate)> = None;
        for &(theta, lo_i, hi_i, c) in &spans {
            if lo_i <= pivot && pivot <= hi_i {
                let better = match best {
                    None => true,
                    Some((best_hi, best_theta, _)) => {
                        hi_i > best_hi || (hi_i == best_hi && theta < best_theta)
                    }
                };
                if better {
                    best = Some((hi_i, theta, c));
                }
            }
        }
        let Some((hi_i, _, chosen)) = best else {
            return Err(Error::Uncoverable(format!(
                "no candidate covers grid angle {}°",
                axis.angles()[pivot]
            )));
        };
        for slot in &mut covered[pivot..=hi_i] {
            *slot = true;
        }
        entries.push(CodebookEntry {
            steering: optimal_steering(&candidates.geometry, &chosen.pointing)?,
            pointing: chosen.pointing,
            region: chosen.region,
        });
    }
    Ok(RefinedCodebook {
        geometry: candidates.geometry,
        threshold: candidates.threshold,
        grid_steps_deg: vec![axis.step_deg()],
        fingerprint: run_fingerprint(&candidates.geometry, &candidates.threshold, grid),
        entries,
    })
}

/// Rectangle cover of a plane grid.
///
/// Pivot = uncovered point with the smallest first-axis index, then smallest
/// second-axis index. Among candidates whose rectangle contains the pivot,
/// pick the one wiping out the most still-uncovered points (ties to the
/// lexicographically smaller pointing pair); uncovered counts per rectangle
/// come from a prefix-sum matrix rebuilt after every selection.
pub fn greedy_cover_2d(
    candidates: &CandidateSet,
    grid: &VisibilityGrid,
) -> Result<RefinedCodebook> {
    let (axis1, axis2, covered0) = match grid {
        VisibilityGrid::Plane { axis1, axis2, covered } => (axis1, axis2, covered),
        VisibilityGrid::Line { .. } => {
            return Err(Error::InvalidGrid("2-D greedy cover needs a plane grid".into()))
        }
    };
    if candidates.geometry.kind != ArrayKind::Ura {
        return Err(Error::InvalidGeometry("2-D greedy cover needs URA candidates".into()));
    }
    let (n1, n2) = (axis1.len(), axis2.len());
    struct RectSpan<'a> {
        tx: f64,
        ty: f64,
        i: (usize, usize),
        j: (usize, usize),
        candidate: &'a Candidate,
    }
    let spans: Vec<RectSpan> = candidates
        .candidates
        .iter()
        .filter_map(|c| {
            let ((xlo, xhi), (ylo, yhi)) = c.rect_span()?;
            let i = axis1.index_range(xlo, xhi)?;
            let j = axis2.index_range(ylo, yhi)?;
            let (tx, ty) = match c.pointing {
                Direction::Ura { theta_x_deg, theta_y_deg } => (theta_x_deg, theta_y_deg),
                Direction::Ula { .. } => unreachable!(),
            };
            Some(RectSpan { tx, ty, i, j, candidate: c })
        })
        .collect();

    let mut covered = covered0.clone();
    let mut prefix = vec![0i64; (n1 + 1) * (n2 + 1)];
    let mut entries = Vec::new();
    while let Some(flat) = covered.iter().position(|c| !c) {
        let (pi, pj) = (flat / n2, flat % n2);
        // prefix[i][j] = number of uncovered points in rows < i, cols < j
        for i in 0..n1 {
            for j in 0..n2 {
                let unc = i64::from(!covered[i * n2 + j]);
                prefix[(i + 1) * (n2 + 1) + (j + 1)] = unc
                    + prefix[i * (n2 + 1) + (j + 1)]
                    + prefix[(i + 1) * (n2 + 1) + j]
                    - prefix[i * (n2 + 1) + j];
            }
        }
        let uncovered_in = |i: (usize, usize), j: (usize, usize)| -> i64 {
            prefix[(i.1 + 1) * (n2 + 1) + (j.1 + 1)]
                - prefix[i.0 * (n2 + 1) + (j.1 + 1)]
                - prefix[(i.1 + 1) * (n2 + 1) + j.0]
                + prefix[i.0 * (n2 + 1) + j.0]
        };
        let mut best: Option<(i64, f64, f64, &RectSpan)> = None;
        for span in &spans {
            if span.i.0 <= pi && pi <= span.i.1 && span.j.0 <= pj && pj <= span.j.1 {
                let cnt = uncovered_in(span.i, span.j);
                let better = match &best {
                    None => true,
                    Some((bc, btx, bty, _)) => {
                        cnt > *bc
                            || (cnt == *bc
                                && (span.tx < *btx || (span.tx == *btx && span.ty < *bty)))
                    }
                };
                if better {
                    best = Some((cnt, span.tx, span.ty, span));
                }
            }
        }
        let Some((_, _, _, chosen)) = best else {
            return Err(Error::Uncoverable(format!(
                "no candidate covers grid point ({}°, {}°)",
                axis1.angles()[pi],
                axis2.angles()[pj]
            )));
        };
        for i in chosen.i.0..=chosen.i.1 {
            for slot in &mut covered[i * n2 + chosen.j.0..=i * n2 + chosen.j.1] {
                *slot = true;
            }
        }
        entries.push(CodebookEntry {
            steering: optimal_steering(&candidates.geometry, &chosen.candidate.pointing)?,
            pointing: chosen.candidate.pointing,
            region: chosen.candidate.region,
        });
    }
    Ok(RefinedCodebook {
        geometry: candidates.geometry,
        threshold: candidates.threshold,
        grid_steps_deg: vec![axis1.step_deg(), axis2.step_deg()],
        fingerprint: run_fingerprint(&candidates.geometry, &candidates.threshold, grid),
        entries,
    })
}

/// Exhaustive coverage audit of a codebook against a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverReport {
    pub n_points: usize,
    /// Worst best-entry gain ratio over the grid; 0 for an empty codebook.
    pub min_ratio: f64,
    pub argmin: Option<Direction>,
    /// Fraction of grid points whose best ratio is ≥ 1/γ_f − 1e-9.
    pub fraction_meeting: f64,
    pub best_entry: Vec<Option<usize>>,
    pub best_ratio: Vec<f64>,
}

/// Evaluate, for every grid point, the exact direct-sum gain ratio of every
/// codebook entry (optionally with the entries' phases quantized first) and
/// report the per-point best. Never fails on coverage shortfalls; an empty
/// codebook simply reports 0%.
pub fn verify_cover(
    codebook: &RefinedCodebook,
    geom: &ArrayGeometry,
    grid: &VisibilityGrid,
    threshold: &ThresholdSpec,
    quantize: Option<PhaseShifterSpec>,
) -> Result<CoverReport> {
    if codebook.geometry != *geom {
        return Err(Error::GeometryMismatch(format!(
            "codebook was refined for {} n1={} n2={} d1/λ={} d2/λ={}, not the geometry under audit",
            codebook.geometry.kind,
            codebook.geometry.n1,
            codebook.geometry.n2,
            codebook.geometry.d1_over_lambda,
            codebook.geometry.d2_over_lambda
        )));
    }
    if geom.kind != grid.kind() {
        return Err(Error::InvalidGrid(format!(
            "{} geometry cannot be audited on a {} grid",
            geom.kind,
            grid.kind()
        )));
    }
    let weights: Vec<Vec<num_complex::Complex64>> = codebook
        .entries
        .iter()
        .map(|e| match quantize {
            Some(spec) => quantize_steering(&e.steering, spec).weights,
            None => e.steering.weights.clone(),
        })
        .collect();

    let n_points = grid.len();
    let max_gain = geom.max_gain();
    let floor = threshold.min_ratio() - 1e-9;
    let mut best_entry = Vec::with_capacity(n_points);
    let mut best_ratio = Vec::with_capacity(n_points);
    let mut min_ratio = f64::INFINITY;
    let mut argmin = None;
    let mut meeting = 0usize;
    for idx in 0..n_points {
        let dir = grid.point(idx);
        let a = manifold(geom, &dir)?;
        let mut point_best: Option<(usize, f64)> = None;
        for (k, w) in weights.iter().enumerate() {
            let ratio = gain_with_weights(&a, w)? / max_gain;
            if point_best.is_none_or(|(_, r)| ratio > r) {
                point_best = Some((k, ratio));
            }
        }
        let (entry, ratio) = match point_best {
            Some((k, r)) => (Some(k), r),
            None => (None, 0.0),
        };
        if ratio < min_ratio {
            min_ratio = ratio;
            argmin = Some(dir);
        }
        if ratio >= floor {
            meeting += 1;
        }
        best_entry.push(entry);
        best_ratio.push(ratio);
    }
    if !min_ratio.is_finite() {
        min_ratio = 0.0;
    }
    Ok(CoverReport {
        n_points,
        min_ratio,
        argmin,
        fraction_meeting: if n_points == 0 { 0.0 } else { meeting as f64 / n_points as f64 },
        best_entry,
        best_ratio,
    })
}
