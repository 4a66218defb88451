//! Config file schemas for the CLI. Schemas are strict: unknown keys are
//! rejected with the offending key named, and the `version` field pins the
//! file format.

use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::models::{
    AmplitudeFamily, DerivKind, DisplacementFamily, ParametricFamily, PhaseFamily,
    RotatedSqueezedFamily, SqueezeParamFamily, VacuumFamily, DEFAULT_FD_STEP,
};
use crate::modes::Grid;

pub const CONFIG_VERSION: u32 = 1;

fn default_version() -> u32 {
    CONFIG_VERSION
}

fn check_version(version: u32) -> Result<()> {
    if version != CONFIG_VERSION {
        return Err(Error::Config(format!(
            "unsupported config version {version}, expected {CONFIG_VERSION}"
        )));
    }
    Ok(())
}

/// Load and strictly parse a JSON config file.
pub fn load<T: DeserializeOwned + Validated>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: T = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    value.validate()?;
    Ok(value)
}

/// Post-parse validation hook.
pub trait Validated {
    fn validate(&self) -> Result<()>;
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Arc<Grid>> {
        Grid::uniform(self.min, self.max, self.points)
    }
}

fn default_grid() -> GridConfig {
    GridConfig { min: -8.0, max: 8.0, points: 1024 }
}

/// Resolve `squeeze_db` / `sigma_sq` into a variance. Both present is an
/// error; neither means vacuum.
fn resolve_sigma_sq(squeeze_db: Option<f64>, sigma_sq: Option<f64>) -> Result<f64> {
    match (squeeze_db, sigma_sq) {
        (Some(_), Some(_)) => Err(Error::Config(
            "give either squeeze_db or sigma_sq, not both".into(),
        )),
        (Some(db), None) => Ok(10f64.powf(-db / 10.0)),
        (None, Some(s)) => Ok(s),
        (None, None) => Ok(1.0),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseParams {
    #[serde(rename = "N")]
    n: f64,
    #[serde(default)]
    squeeze_db: Option<f64>,
    #[serde(default)]
    sigma_sq: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DisplacementParams {
    #[serde(rename = "N")]
    n: f64,
    w: f64,
    #[serde(default)]
    squeeze_db: Option<f64>,
    #[serde(default)]
    sigma_sq: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmplitudeParams {
    #[serde(rename = "N")]
    n: f64,
    m: f64,
    #[serde(default)]
    squeeze_db: Option<f64>,
    #[serde(default)]
    sigma_sq: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RotatedSqueezedParams {
    #[serde(rename = "N")]
    n: f64,
    #[serde(default)]
    squeeze_db: Option<f64>,
    #[serde(default)]
    sigma_sq: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyParams {}

fn parse_params<T: DeserializeOwned>(model: &str, params: &serde_json::Value) -> Result<T> {
    serde_json::from_value(params.clone())
        .map_err(|e| Error::Config(format!("params for model '{model}': {e}")))
}

/// Names of all built-in models.
pub const BUILTIN_MODELS: [&str; 6] = [
    "phase",
    "displacement",
    "amplitude",
    "squeeze-param",
    "rotated-squeezed",
    "vacuum",
];

/// Instantiate a built-in family from its config name and params.
pub fn build_family(model: &str, params: &serde_json::Value) -> Result<Box<dyn ParametricFamily>> {
    let params = if params.is_null() {
        serde_json::json!({})
    } else {
        params.clone()
    };
    match model {
        "phase" => {
            let p: PhaseParams = parse_params(model, &params)?;
            Ok(Box::new(PhaseFamily::new(p.n, resolve_sigma_sq(p.squeeze_db, p.sigma_sq)?)?))
        }
        "displacement" => {
            let p: DisplacementParams = parse_params(model, &params)?;
            Ok(Box::new(DisplacementFamily::new(
                p.n,
                p.w,
                resolve_sigma_sq(p.squeeze_db, p.sigma_sq)?,
            )?))
        }
        "amplitude" => {
            let p: AmplitudeParams = parse_params(model, &params)?;
            Ok(Box::new(AmplitudeFamily::new(
                p.n,
                p.m,
                resolve_sigma_sq(p.squeeze_db, p.sigma_sq)?,
            )?))
        }
        "squeeze-param" => {
            let _: EmptyParams = parse_params(model, &params)?;
            Ok(Box::new(SqueezeParamFamily))
        }
        "rotated-squeezed" => {
            let p: RotatedSqueezedParams = parse_params(model, &params)?;
            Ok(Box::new(RotatedSqueezedFamily::new(
                p.n,
                resolve_sigma_sq(p.squeeze_db, p.sigma_sq)?,
            )?))
        }
        "vacuum" => {
            let _: EmptyParams = parse_params(model, &params)?;
            Ok(Box::new(VacuumFamily))
        }
        other => Err(Error::Config(format!(
            "unknown model '{other}'; expected one of {BUILTIN_MODELS:?}"
        ))),
    }
}

fn resolve_derivatives(derivatives: &Option<String>, fd_step: Option<f64>) -> Result<DerivKind> {
    match derivatives.as_deref() {
        None | Some("analytic") => Ok(DerivKind::Analytic),
        Some("numeric") => Ok(DerivKind::Numeric {
            h: fd_step.unwrap_or(DEFAULT_FD_STEP),
            richardson: true,
        }),
        Some(other) => Err(Error::Config(format!(
            "derivatives must be \"analytic\" or \"numeric\", got \"{other}\""
        ))),
    }
}

/// `bound` command config: model + repetition count.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub model: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default = "default_grid")]
    pub grid: GridConfig,
    #[serde(default)]
    pub derivatives: Option<String>,
    #[serde(default)]
    pub fd_step: Option<f64>,
    #[serde(default = "one")]
    pub q: u64,
}

fn one() -> u64 {
    1
}

impl Validated for BoundConfig {
    fn validate(&self) -> Result<()> {
        check_version(self.version)
    }
}

impl BoundConfig {
    pub fn deriv_kind(&self) -> Result<DerivKind> {
        resolve_derivatives(&self.derivatives, self.fd_step)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HgRef {
    pub hg: usize,
}

/// Local-oscillator mode selector.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LoModeConfig {
    Named(String),
    Hg(HgRef),
}

impl Default for LoModeConfig {
    fn default() -> Self {
        LoModeConfig::Named("detection".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoConfig {
    #[serde(default)]
    pub mode: LoModeConfig,
    #[serde(default)]
    pub phase: f64,
    #[serde(default = "default_lo_photons")]
    pub photons: f64,
}

fn default_lo_photons() -> f64 {
    1e8
}

impl Default for LoConfig {
    fn default() -> Self {
        LoConfig { mode: LoModeConfig::default(), phase: 0.0, photons: default_lo_photons() }
    }
}

/// Sweep over one parameter: an explicit value list or a (log-)range.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub from: Option<f64>,
    #[serde(default)]
    pub to: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub log: Option<bool>,
}

impl SweepSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if let Some(values) = &self.values {
            if values.is_empty() {
                return Err(Error::Config("sweep values may not be empty".into()));
            }
            return Ok(values.clone());
        }
        let (Some(from), Some(to), Some(points)) = (self.from, self.to, self.points) else {
            return Err(Error::Config(
                "sweep needs either values or from/to/points".into(),
            ));
        };
        if points < 2 {
            return Err(Error::Config("sweep needs at least 2 points".into()));
        }
        let log = self.log.unwrap_or(false);
        if log && (from <= 0.0 || to <= 0.0) {
            return Err(Error::Config("log sweep needs positive endpoints".into()));
        }
        let n = points as f64 - 1.0;
        Ok((0..points)
            .map(|i| {
                let t = i as f64 / n;
                if log {
                    (from.ln() + t * (to.ln() - from.ln())).exp()
                } else {
                    from + t * (to - from)
                }
            })
            .collect())
    }
}

/// `simulate` command config: model + experiment.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub model: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default = "default_grid")]
    pub grid: GridConfig,
    #[serde(default)]
    pub derivatives: Option<String>,
    #[serde(default)]
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub lo: LoConfig,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_theta_true")]
    pub theta_true: f64,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

fn default_samples() -> u64 {
    1
}

fn default_repetitions() -> u64 {
    100_000
}

fn default_seed() -> u64 {
    42
}

fn default_theta_true() -> f64 {
    0.01
}

impl Validated for SimulateConfig {
    fn validate(&self) -> Result<()> {
        check_version(self.version)
    }
}

impl SimulateConfig {
    pub fn deriv_kind(&self) -> Result<DerivKind> {
        resolve_derivatives(&self.derivatives, self.fd_step)
    }
}

/// `allocate` command config.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocateConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    /// Squeezing of each bank member in dB (`σ² = 10^(−dB/10)`).
    pub bank_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub detection_index: usize,
}

fn default_trials() -> u64 {
    1000
}

impl Validated for AllocateConfig {
    fn validate(&self) -> Result<()> {
        check_version(self.version)?;
        if self.bank_db.is_empty() {
            return Err(Error::Config("bank_db may not be empty".into()));
        }
        Ok(())
    }
}

/// `oracle-check` command config.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheckConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    /// A built-in model name, or "all".
    #[serde(default = "default_all")]
    pub model: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default = "default_grid")]
    pub grid: GridConfig,
    #[serde(default = "default_random_families")]
    pub random_families: u64,
    #[serde(default = "default_random_pairs")]
    pub random_pairs: u64,
    #[serde(default = "default_audit_seed")]
    pub seed: u64,
    #[serde(default = "default_overlap_step")]
    pub fd_step: f64,
}

fn default_all() -> String {
    "all".into()
}

fn default_random_families() -> u64 {
    50
}

fn default_random_pairs() -> u64 {
    200
}

fn default_audit_seed() -> u64 {
    7
}

fn default_overlap_step() -> f64 {
    1e-3
}

impl Validated for OracleCheckConfig {
    fn validate(&self) -> Result<()> {
        check_version(self.version)
    }
}

/// `sweep` command config: bound reports over a parameter sweep.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub model: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default = "default_grid")]
    pub grid: GridConfig,
    #[serde(default)]
    pub derivatives: Option<String>,
    #[serde(default)]
    pub fd_step: Option<f64>,
    #[serde(default = "one")]
    pub q: u64,
    pub sweep: SweepSpec,
}

impl Validated for SweepConfig {
    fn validate(&self) -> Result<()> {
        check_version(self.version)
    }
}

impl SweepConfig {
    pub fn deriv_kind(&self) -> Result<DerivKind> {
        resolve_derivatives(&self.derivatives, self.fd_step)
    }
}

/// `modes` command config: dump the detection basis.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub model: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default = "default_grid")]
    pub grid: GridConfig,
    #[serde(default)]
    pub derivatives: Option<String>,
    #[serde(default)]
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
}

impl Validated for ModesConfig {
    fn validate(&self) -> Result<()> {
        check_version(self.version)
    }
}

impl ModesConfig {
    pub fn deriv_kind(&self) -> Result<DerivKind> {
        resolve_derivatives(&self.derivatives, self.fd_step)
    }
}

/// Set `params[param] = value`, for sweeps over model parameters.
pub fn override_param(
    params: &serde_json::Value,
    param: &str,
    value: f64,
) -> serde_json::Value {
    let mut out = if params.is_null() {
        serde_json::json!({})
    } else {
        params.clone()
    };
    if let Some(map) = out.as_object_mut() {
        map.insert(
            param.to_string(),
            serde_json::Number::from_f64(value)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
        );
    }
    out
}
