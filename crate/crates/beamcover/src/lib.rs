//! Analog beam codebooks for phased arrays: where a beam's gain holds up,
//! how few beams cover a visibility range, and how a swept codebook behaves
//! under measurement noise.
//!
//! The crate is organized bottom-up:
//!
//! - [`array`]: geometries, manifolds, steering vectors, gain
//! - [`coverage`]: degradation kernels, α* roots, per-beam coverage regions
//! - [`refine`]: visibility grids, candidate beams, greedy set cover
//! - [`sweep`]: noisy beam-sweep simulation over a refined codebook
//! - [`config`]: TOML run configuration and fingerprinting
//! - [`fileio`]: CSV and report writers, codebook reader

pub mod array;
pub mod coverage;
pub mod error;
pub mod fileio;
pub mod refine;
pub mod config;
pub mod sweep;

pub use config::{ResolvedRun, RunConfig};

pub use array::{
    array_gain, azel_to_xy, gain_with_weights, manifold, manifold_ula, manifold_ura,
    optimal_steering, quantize_steering, spacing_to_d_over_lambda, xy_to_azel, ArrayGeometry,
    ArrayKind, Direction, PhaseShifterSpec, SteeringVector, SPEED_OF_LIGHT_M_PER_S,
};
pub use coverage::{
    alpha_star_ula, alpha_star_ura, degradation_ula, degradation_ura, delta_bounds,
    delta_bounds_ula, delta_bounds_ura, dirichlet_power_ratio, numeric_coverage, AlphaStar,
    AxisBounds, CoverageRegion, DeviationQuery, ThresholdSpec, DEFAULT_SCAN_STEP_DEG,
};
pub use error::{Error, Result};
pub use fileio::{
    cdf_csv, codebook_csv, coverage_csv, degradation_csv, fmt_g, read_codebook_csv, summary_text,
    trials_csv, verify_report_text, CoverageRow, DegradationRow,
};
pub use refine::{
    build_candidates, greedy_cover_1d, greedy_cover_2d, run_fingerprint, verify_cover, AxisGrid,
    Candidate, CandidateSet, CodebookEntry, CoverReport, RefinedCodebook, VisibilityGrid,
};
pub use sweep::{empirical_cdf, run_sweep, SweepReport, SweepTrial};
