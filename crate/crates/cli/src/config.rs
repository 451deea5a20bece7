//! TOML experiment configs.

use std::path::{Path, PathBuf};

use persistence_core::geometry::ConvexBody;
use persistence_core::sampler::{AngularSpec, RVModel, TailBalance};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub output_dir: Option<PathBuf>,
    pub model: Option<ModelSpec>,
    pub body: Option<BodySpec>,
    pub exponent: Option<ExponentBlock>,
    pub estimate: Option<EstimateBlock>,
    pub path: Option<PathBlock>,
    pub bench: Option<BenchBlock>,
    pub sample: Option<SampleBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    Multivariate,
    OneDimensional,
    NonstandardProduct,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub mode: ModeSpec,
    pub dimension: Option<usize>,
    pub alpha: Option<f64>,
    pub radial_scale: Option<f64>,
    pub bulk_fraction: Option<f64>,
    pub angular: Option<AngularConfig>,
    pub tail_balance: Option<BalanceSpec>,
    #[serde(default)]
    pub components: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AngularConfig {
    Uniform,
    VonMisesFisher { mean_direction: Vec<f64>, concentration: f64 },
    PiecewiseDensity { weights: Vec<f64> },
    /// Finitely many atoms; accepted by `exponent` only, with a warning.
    Atomic { directions: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BalanceSpec {
    pub p_minus: f64,
    pub alpha_minus: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub alpha: f64,
    pub radial_scale: f64,
    pub bulk_fraction: f64,
    pub tail_balance: Option<BalanceSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BodySpec {
    /// Rows `[a_1, …, a_d, b]` for `⟨a, x⟩ + b ≤ 0`.
    Polytope { halfspaces: Vec<Vec<f64>> },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentBlock {
    pub deltas: Option<Vec<f64>>,
    #[serde(default = "default_grid")]
    pub grid_density: usize,
    pub tol: Option<f64>,
}

fn default_grid() -> usize {
    64
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Geometric { c1: u64, r_ref: Option<f64> },
    Upper { c1: u64, eta: f64, r_ref: Option<f64> },
    Lower { c1: u64, rho: f64, r_ref: Option<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateBlock {
    pub n_grid: Vec<u64>,
    pub effort: usize,
    #[serde(default = "default_macros")]
    pub macros: usize,
    pub schedule: ScheduleSpec,
}

fn default_macros() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathBlock {
    pub a: f64,
    pub b: f64,
    pub c1: u64,
    pub n: u64,
    #[serde(default = "default_points")]
    pub points: usize,
    pub alpha: Option<f64>,
    #[serde(default)]
    pub svg: bool,
}

fn default_points() -> usize {
    200
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchBlock {
    pub checks: Vec<String>,
    pub epsilon: Option<f64>,
    pub rho: Option<f64>,
    pub delta: Option<f64>,
    pub c1: Option<f64>,
    pub i_range: Option<[u32; 2]>,
    pub eta: Option<f64>,
    pub reps: Option<u64>,
    pub m: Option<u64>,
    pub x: Option<f64>,
    pub constant_bound: Option<f64>,
    pub n_grid: Option<Vec<u64>>,
    pub far_radius: Option<f64>,
    pub directions: Option<Vec<Vec<f64>>>,
    pub samples: Option<usize>,
    pub k: Option<usize>,
    pub n: Option<u64>,
    pub effort: Option<usize>,
    pub grid_density: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBlock {
    pub count: usize,
}

/// Parsed config plus the SHA-256 of its source text.
pub struct Loaded {
    pub config: ExperimentConfig,
    pub digest: String,
    pub stem: String,
}

pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig =
        toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "config".into());
    Ok(Loaded { config, digest: hex::encode(Sha256::digest(text.as_bytes())), stem })
}

impl ModelSpec {
    /// Number of atoms when the angular law is atomic.
    pub fn atoms(&self) -> Option<usize> {
        match &self.angular {
            Some(AngularConfig::Atomic { directions }) => Some(directions.len()),
            _ => None,
        }
    }

    /// Smallest tail index, without building the sampler.
    pub fn alpha(&self) -> Result<f64, Failure> {
        match self.mode {
            ModeSpec::NonstandardProduct => self
                .components
                .iter()
                .map(|c| c.alpha)
                .reduce(f64::min)
                .ok_or_else(|| Failure::Config("product model needs components".into())),
            _ => self.alpha.ok_or_else(|| Failure::Config("model.alpha is required".into())),
        }
    }

    /// Checks the hypotheses of the exponent formula that the config can state.
    pub fn check_hypotheses(&self) -> Result<(), Failure> {
        let alphas: Vec<f64> = match self.mode {
            ModeSpec::NonstandardProduct => self.components.iter().map(|c| c.alpha).collect(),
            _ => vec![self.alpha()?],
        };
        if let Some(a) = alphas.iter().find(|a| !(**a > 1.0)) {
            return Err(Failure::Hypothesis(format!("tail index alpha > 1 (finite mean) is required, got {a}")));
        }
        if let Some(AngularConfig::PiecewiseDensity { weights }) = &self.angular {
            if weights.iter().any(|w| !(*w > 0.0)) {
                return Err(Failure::Hypothesis("angular density must be positive on the whole sphere".into()));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<RVModel, Failure> {
        self.check_hypotheses()?;
        let model = match self.mode {
            ModeSpec::OneDimensional => {
                if self.dimension.is_some_and(|d| d != 1) {
                    return Err(Failure::Config("one-dimensional mode needs dimension = 1".into()));
                }
                let alpha = self.alpha()?;
                RVModel::one_dimensional(
                    alpha,
                    required(self.radial_scale, "model.radial_scale")?,
                    required(self.bulk_fraction, "model.bulk_fraction")?,
                    balance(self.tail_balance, alpha),
                )
            }
            ModeSpec::Multivariate => {
                let angular = match self.angular.clone().unwrap_or(AngularConfig::Uniform) {
                    AngularConfig::Uniform => AngularSpec::Uniform,
                    AngularConfig::VonMisesFisher { mean_direction, concentration } => {
                        AngularSpec::VonMisesFisher { mean_direction, concentration }
                    }
                    AngularConfig::PiecewiseDensity { weights } => AngularSpec::PiecewiseDensity { weights },
                    AngularConfig::Atomic { .. } => {
                        return Err(Failure::Hypothesis(
                            "atomic angular measures cannot be simulated; the exponent formula needs an absolutely continuous angular law".into(),
                        ))
                    }
                };
                RVModel::multivariate(
                    required(self.dimension, "model.dimension")?,
                    self.alpha()?,
                    required(self.radial_scale, "model.radial_scale")?,
                    required(self.bulk_fraction, "model.bulk_fraction")?,
                    angular,
                )
            }
            ModeSpec::NonstandardProduct => {
                let comps = self
                    .components
                    .iter()
                    .map(|c| RVModel::one_dimensional(c.alpha, c.radial_scale, c.bulk_fraction, balance(c.tail_balance, c.alpha)))
                    .collect::<Result<Vec<_>, _>>()?;
                RVModel::nonstandard(comps)
            }
        }?;
        Ok(model)
    }

    pub fn dimension(&self) -> Option<usize> {
        match self.mode {
            ModeSpec::OneDimensional => Some(1),
            ModeSpec::NonstandardProduct => Some(self.components.len()),
            ModeSpec::Multivariate => self.dimension,
        }
    }
}

fn balance(spec: Option<BalanceSpec>, alpha: f64) -> TailBalance {
    spec.map(|b| TailBalance { p_minus: b.p_minus, alpha_minus: b.alpha_minus })
        .unwrap_or_else(|| TailBalance::symmetric(alpha))
}

fn required<T>(v: Option<T>, name: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Config(format!("{name} is required")))
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody, Failure> {
        let body = match self {
            BodySpec::Polytope { halfspaces } => {
                let mut normals = Vec::with_capacity(halfspaces.len());
                let mut offsets = Vec::with_capacity(halfspaces.len());
                for row in halfspaces {
                    let (b, a) = row
                        .split_last()
                        .ok_or_else(|| Failure::Config("empty half-space row".into()))?;
                    normals.push(a.to_vec());
                    offsets.push(*b);
                }
                ConvexBody::polytope(normals, offsets)
            }
            BodySpec::Box { lo, hi } => ConvexBody::cuboid(lo.clone(), hi.clone()),
            BodySpec::Ball { center, radius } => ConvexBody::ball(center.clone(), *radius),
        }?;
        Ok(body)
    }

    /// `[(a_j, b_j)]` for axis-aligned boxes in the positive orthant.
    pub fn positive_box(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            BodySpec::Box { lo, hi } if lo.iter().all(|l| *l > 0.0) => Some(lo.iter().copied().zip(hi.iter().copied()).collect()),
            _ => None,
        }
    }
}

impl ExperimentConfig {
    pub fn model_spec(&self) -> Result<&ModelSpec, Failure> {
        self.model.as_ref().ok_or_else(|| Failure::Config("[model] block is required".into()))
    }

    pub fn body_spec(&self) -> Result<&BodySpec, Failure> {
        self.body.as_ref().ok_or_else(|| Failure::Config("[body] block is required".into()))
    }

    pub fn model_and_body(&self) -> Result<(RVModel, ConvexBody), Failure> {
        let model = self.model_spec()?.build()?;
        let body = self.body_spec()?.build()?;
        if model.dimension != body.dimension() {
            return Err(Failure::Config(format!(
                "model dimension {} differs from body dimension {}",
                model.dimension,
                body.dimension()
            )));
        }
        Ok((model, body))
    }
}
