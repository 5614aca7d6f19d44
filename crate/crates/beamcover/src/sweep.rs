//! Monte-Carlo beam sweep: draw directions over the visibility grid, test
//! every codebook entry, pick the apparent best, and score the true gain of
//! the pick against the theoretical maximum.
//!
//! Measurement noise enters only where it does in hardware: the per-entry
//! power readings that drive the selection. The reported gap always uses
//! true gains, so a noisy sweep can select a worse beam but never misreport
//! the gain of what it selected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::array::{manifold, ArrayGeometry, Direction};
use crate::error::{Error, Result};
use crate::gain_with_weights;
use crate::refine::{RefinedCodebook, VisibilityGrid};

/// One sweep: a drawn direction, the entry the sweep picked, and the gain gap
/// relative to the maximum Nβ² benchmark.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTrial {
    pub trial_index: u64,
    pub direction: Direction,
    pub best_entry_index: usize,
    pub achievable_gain: f64,
    pub max_gain: f64,
    pub gap_db: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub trials: Vec<SweepTrial>,
    pub gamma_db: f64,
    /// |{gap_db ≤ γ}| / n, with 1e-9 dB slack for boundary rounding.
    pub fraction_within_gamma: f64,
    /// Right-continuous empirical distribution of gap_db.
    pub cdf: Vec<(f64, f64)>,
    pub rng_seed: u64,
    pub noise_std_db: Option<f64>,
}

/// Independent per-trial RNG stream: decorrelate (seed, trial) with a
/// splitmix64 round so trial k's draws never depend on how many draws earlier
/// trials consumed (schedule-independent under parallel execution).
fn substream_seed(seed: u64, trial_index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(trial_index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sweep the codebook over `n_trials` directions drawn uniformly on the
/// visibility grid (per-axis independent for a plane). With noise, each
/// entry's measured dB gain is perturbed by N(0, noise_std_db²) before the
/// argmax; ties go to the lower entry index.
pub fn run_sweep(
    codebook: &RefinedCodebook,
    geom: &ArrayGeometry,
    grid: &VisibilityGrid,
    n_trials: u64,
    seed: u64,
    noise_std_db: Option<f64>,
) -> Result<SweepReport> {
    if codebook.entries.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    if codebook.geometry != *geom {
        return Err(Error::GeometryMismatch(
            "codebook was refined for a different geometry than the sweep target".into(),
        ));
    }
    if geom.kind != grid.kind() {
        return Err(Error::InvalidGrid(format!(
            "{} geometry cannot sweep a {} grid",
            geom.kind,
            grid.kind()
        )));
    }
    if n_trials == 0 {
        return Err(Error::InvalidParameter("n_trials must be at least 1".into()));
    }
    let noise = match noise_std_db {
        None => None,
        Some(std) => {
            if !std.is_finite() || std < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "noise_std_db must be non-negative (got {std})"
                )));
            }
            Some(Normal::new(0.0, std).expect("validated std dev"))
        }
    };

    let (axis1, axis2) = grid.axes();
    let max_gain = geom.max_gain();
    let mut trials = Vec::with_capacity(n_trials as usize);
    for trial_index in 0..n_trials {
        let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, trial_index));
        let direction = match axis2 {
            None => Direction::Ula {
                theta_deg: axis1.angles()[rng.random_range(0..axis1.len())],
            },
            Some(a2) => Direction::Ura {
                theta_x_deg: axis1.angles()[rng.random_range(0..axis1.len())],
                theta_y_deg: a2.angles()[rng.random_range(0..a2.len())],
            },
        };
        let a = manifold(geom, &direction)?;
        let mut best_idx = 0usize;
        let mut best_metric = f64::NEG_INFINITY;
        let mut best_true = 0.0f64;
        for (k, entry) in codebook.entries.iter().enumerate() {
            let true_gain = gain_with_weights(&a, &entry.steering.weights)?;
            let metric = match &noise {
                None => true_gain,
                // selection sees the noisy dB reading, never the true gain
                Some(n) => 10.0 * true_gain.max(f64::MIN_POSITIVE).log10() + n.sample(&mut rng),
            };
            if metric > best_metric {
                best_metric = metric;
                best_idx = k;
                best_true = true_gain;
            }
        }
        let gap_db = 10.0 * (max_gain / best_true).log10();
        trials.push(SweepTrial {
            trial_index,
            direction,
            best_entry_index: best_idx,
            achievable_gain: best_true,
            max_gain,
            gap_db,
        });
    }

    let gamma_db = codebook.threshold.gamma_db();
    let within = trials.iter().filter(|t| t.gap_db <= gamma_db + 1e-9).count();
    let gaps: Vec<f64> = trials.iter().map(|t| t.gap_db).collect();
    Ok(SweepReport {
        fraction_within_gamma: within as f64 / trials.len() as f64,
        cdf: empirical_cdf(&gaps)?,
        trials,
        gamma_db,
        rng_seed: seed,
        noise_std_db,
    })
}

/// Standard empirical CDF: for each distinct value v, the fraction of samples
/// ≤ v, sorted ascending.
pub fn empirical_cdf(gaps: &[f64]) -> Result<Vec<(f64, f64)>> {
    if gaps.is_empty() {
        return Err(Error::InvalidParameter("empirical_cdf needs at least one sample".into()));
    }
    if gaps.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter("empirical_cdf samples must be finite".into()));
    }
    let mut sorted = gaps.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut cdf: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match cdf.last_mut() {
            Some(last) if last.0 == *v => last.1 = frac,
            _ => cdf.push((*v, frac)),
        }
    }
    Ok(cdf)
}
