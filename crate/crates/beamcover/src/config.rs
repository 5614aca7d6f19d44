//! Run configuration: a TOML file with nested sections, strict about unknown
//! keys, resolved into validated library types before any computation.
//!
//! A refine run writes back a fully normalized copy of its configuration as
//! the run manifest (plus a `[meta]` section carrying the fingerprint), and
//! that manifest is itself a valid config that reproduces the run.

use serde::{Deserialize, Serialize};

use crate::array::{spacing_to_d_over_lambda, ArrayGeometry, ArrayKind, PhaseShifterSpec};
use crate::coverage::{ThresholdSpec, DEFAULT_SCAN_STEP_DEG};
use crate::error::{Error, Result};
use crate::refine::{run_fingerprint, VisibilityGrid};

pub const DEFAULT_VISIBILITY_DEG: f64 = 60.0;
pub const DEFAULT_LINE_STEP_DEG: f64 = 0.1;
pub const DEFAULT_PLANE_STEP_DEG: f64 = 0.5;
pub const DEFAULT_ANALYZE_THETAS: [f64; 5] = [0.0, 15.0, 30.0, 45.0, 60.0];
pub const DEFAULT_DELTA_SWEEP_DEG: f64 = 20.0;
pub const DEFAULT_CURVE_STEP_DEG: f64 = 0.1;
pub const DEFAULT_N_TRIALS: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub threshold: ThresholdConfig,
    #[serde(default)]
    pub visibility: VisibilityConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub analyze: AnalyzeConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<MetaConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// "ula" or "ura"
    pub kind: String,
    pub n1: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    /// Element spacing, either directly as d/λ or as meters at a carrier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_over_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2_over_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_gain: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub gamma_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct VisibilityConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min2_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max2_deg: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step2_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_step_deg: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_sweep_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_step_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric_step_deg: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_std_db: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MetaConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
}

/// Everything a command needs, validated and with defaults filled in.
#[derive(Clone, Debug)]
pub struct ResolvedRun {
    pub geometry: ArrayGeometry,
    pub bits: Option<PhaseShifterSpec>,
    pub threshold: ThresholdSpec,
    pub grid: VisibilityGrid,
    pub candidate_step_deg: Option<f64>,
    pub analyze_thetas: Vec<f64>,
    pub delta_sweep_deg: f64,
    pub curve_step_deg: f64,
    pub numeric_step_deg: f64,
    pub n_trials: u64,
    pub seed: u64,
    pub noise_std_db: Option<f64>,
    pub out_dir: String,
    pub fingerprint: String,
    /// The config with every default spelled out; written as the manifest.
    pub normalized: RunConfig,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| cfg_err(format!("config parse error: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let g = &self.geometry;
        let kind = match g.kind.as_str() {
            "ula" => ArrayKind::Ula,
            "ura" => ArrayKind::Ura,
            other => {
                return Err(cfg_err(format!(
                    "geometry.kind must be \"ula\" or \"ura\" (got \"{other}\")"
                )))
            }
        };
        let d1 = match (g.d_over_lambda, g.spacing_m, g.carrier_ghz) {
            (Some(d), None, None) => d,
            (None, Some(m), Some(ghz)) => spacing_to_d_over_lambda(m, ghz),
            (None, None, None) => {
                return Err(cfg_err(
                    "geometry needs either geometry.d_over_lambda or both geometry.spacing_m and geometry.carrier_ghz",
                ))
            }
            (None, Some(_), None) | (None, None, Some(_)) => {
                return Err(cfg_err(
                    "geometry.spacing_m and geometry.carrier_ghz must be given together",
                ))
            }
            _ => {
                return Err(cfg_err(
                    "geometry.d_over_lambda conflicts with geometry.spacing_m/carrier_ghz; give exactly one spacing",
                ))
            }
        };
        let geometry = match kind {
            ArrayKind::Ula => {
                if g.n2.is_some_and(|n| n != 1) {
                    return Err(cfg_err("geometry.n2 must be 1 (or absent) for a ULA"));
                }
                if g.d2_over_lambda.is_some() {
                    return Err(cfg_err("geometry.d2_over_lambda is a URA field"));
                }
                ArrayGeometry::ula(g.n1, d1)?
            }
            ArrayKind::Ura => {
                let n2 = g.n2.ok_or_else(|| cfg_err("geometry.n2 is required for a URA"))?;
                ArrayGeometry::ura(g.n1, n2, d1, g.d2_over_lambda.unwrap_or(d1))?
            }
        };
        let geometry = match g.path_gain {
            Some(b) => geometry.with_path_gain(b)?,
            None => geometry,
        };
        let bits = g.bits.map(PhaseShifterSpec::bits).transpose()?;

        let threshold = ThresholdSpec::from_db(self.threshold.gamma_db)?;

        let v = &self.visibility;
        let min1 = v.min_deg.unwrap_or(-DEFAULT_VISIBILITY_DEG);
        let max1 = v.max_deg.unwrap_or(DEFAULT_VISIBILITY_DEG);
        let gr = &self.grid;
        let (grid, step1, step2) = match kind {
            ArrayKind::Ula => {
                if v.min2_deg.is_some() || v.max2_deg.is_some() {
                    return Err(cfg_err(
                        "visibility.min2_deg/max2_deg are URA fields; a ULA has one axis",
                    ));
                }
                if gr.step2_deg.is_some() {
                    return Err(cfg_err("grid.step2_deg is a URA field; a ULA has one axis"));
                }
                let step = gr.step_deg.unwrap_or(DEFAULT_LINE_STEP_DEG);
                (VisibilityGrid::line(min1, max1, step)?, step, None)
            }
            ArrayKind::Ura => {
                let min2 = v.min2_deg.unwrap_or(-DEFAULT_VISIBILITY_DEG);
                let max2 = v.max2_deg.unwrap_or(DEFAULT_VISIBILITY_DEG);
                let s1 = gr.step_deg.unwrap_or(DEFAULT_PLANE_STEP_DEG);
                let s2 = gr.step2_deg.unwrap_or(s1);
                (VisibilityGrid::plane(min1, max1, s1, min2, max2, s2)?, s1, Some(s2))
            }
        };
        if let Some(cs) = gr.candidate_step_deg {
            if !(cs > 0.0) || !cs.is_finite() {
                return Err(cfg_err(format!(
                    "grid.candidate_step_deg must be positive (got {cs})"
                )));
            }
        }

        let a = &self.analyze;
        let analyze_thetas =
            a.theta_deg.clone().unwrap_or_else(|| DEFAULT_ANALYZE_THETAS.to_vec());
        if analyze_thetas.is_empty() {
            return Err(cfg_err("analyze.theta_deg must not be empty"));
        }
        let delta_sweep_deg = a.delta_sweep_deg.unwrap_or(DEFAULT_DELTA_SWEEP_DEG);
        if !(delta_sweep_deg > 0.0) || !delta_sweep_deg.is_finite() {
            return Err(cfg_err("analyze.delta_sweep_deg must be positive"));
        }
        let curve_step_deg = a.curve_step_deg.unwrap_or(DEFAULT_CURVE_STEP_DEG);
        if !(curve_step_deg > 0.0) || !curve_step_deg.is_finite() {
            return Err(cfg_err("analyze.curve_step_deg must be positive"));
        }
        let numeric_step_deg = a.numeric_step_deg.unwrap_or(DEFAULT_SCAN_STEP_DEG);
        if !(numeric_step_deg > 0.0) || !numeric_step_deg.is_finite() {
            return Err(cfg_err("analyze.numeric_step_deg must be positive"));
        }

        let s = &self.simulate;
        let n_trials = s.n_trials.unwrap_or(DEFAULT_N_TRIALS);
        if n_trials == 0 {
            return Err(cfg_err("simulate.n_trials must be at least 1"));
        }
        if let Some(std) = s.noise_std_db {
            if !std.is_finite() || std < 0.0 {
                return Err(cfg_err(format!(
                    "simulate.noise_std_db must be non-negative (got {std})"
                )));
            }
        }
        let seed = s.seed.unwrap_or(0);

        let out_dir = self.output.dir.clone().unwrap_or_else(|| "out".to_string());
        let fingerprint = run_fingerprint(&geometry, &threshold, &grid);

        let normalized = RunConfig {
            geometry: GeometryConfig {
                kind: g.kind.clone(),
                n1: geometry.n1,
                n2: match kind {
                    ArrayKind::Ula => None,
                    ArrayKind::Ura => Some(geometry.n2),
                },
                d_over_lambda: Some(geometry.d1_over_lambda),
                d2_over_lambda: match kind {
                    ArrayKind::Ula => None,
                    ArrayKind::Ura => Some(geometry.d2_over_lambda),
                },
                spacing_m: None,
                carrier_ghz: None,
                bits: g.bits,
                path_gain: Some(geometry.path_gain),
            },
            threshold: self.threshold.clone(),
            visibility: VisibilityConfig {
                min_deg: Some(min1),
                max_deg: Some(max1),
                min2_deg: match kind {
                    ArrayKind::Ula => None,
                    ArrayKind::Ura => Some(v.min2_deg.unwrap_or(-DEFAULT_VISIBILITY_DEG)),
                },
                max2_deg: match kind {
                    ArrayKind::Ula => None,
                    ArrayKind::Ura => Some(v.max2_deg.unwrap_or(DEFAULT_VISIBILITY_DEG)),
                },
            },
            grid: GridConfig {
                step_deg: Some(step1),
                step2_deg: step2,
                candidate_step_deg: gr.candidate_step_deg,
            },
            analyze: AnalyzeConfig {
                theta_deg: Some(analyze_thetas.clone()),
                delta_sweep_deg: Some(delta_sweep_deg),
                curve_step_deg: Some(curve_step_deg),
                numeric_step_deg: Some(numeric_step_deg),
            },
            simulate: SimulateConfig {
                n_trials: Some(n_trials),
                seed: Some(seed),
                noise_std_db: s.noise_std_db,
            },
            output: OutputConfig { dir: Some(out_dir.clone()) },
            meta: None,
        };

        Ok(ResolvedRun {
            geometry,
            bits,
            threshold,
            grid,
            candidate_step_deg: gr.candidate_step_deg,
            analyze_thetas,
            delta_sweep_deg,
            curve_step_deg,
            numeric_step_deg,
            n_trials,
            seed,
            noise_std_db: s.noise_std_db,
            out_dir,
            fingerprint,
            normalized,
        })
    }
}
