//! Experiment configuration: one JSON-serializable record per run.

use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use husimi_core::criteria::{BETA_MAX, BETA_MIN};
use husimi_core::frame::{Branch, NonLocalFrame};
use husimi_core::states::StateSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HUSIMI_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "husimi-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Regions,
    ExampleSweep,
    ResolutionSweep,
    SamplingStudy,
    Eval,
}

impl Experiment {
    pub fn label(self) -> &'static str {
        match self {
            Experiment::Regions => "regions",
            Experiment::ExampleSweep => "example-sweep",
            Experiment::ResolutionSweep => "resolution-sweep",
            Experiment::SamplingStudy => "sampling-study",
            Experiment::Eval => "eval",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub name: String,
    #[serde(default)]
    pub params: Value,
}

impl StateConfig {
    pub fn new(name: &str, params: Value) -> Self {
        Self {
            name: name.to_string(),
            params,
        }
    }

    pub fn spec(&self) -> husimi_core::Result<StateSpec<f64>> {
        StateSpec::from_name(&self.name, self.params.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameConfig {
    pub theta1: f64,
    pub theta2: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub branch: Branch,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            theta1: 0.0,
            theta2: 0.0,
            a1: 1.0,
            a2: 1.0,
            b1: 1.0,
            b2: 1.0,
            branch: Branch::Plus,
        }
    }
}

impl FrameConfig {
    pub fn build(&self) -> husimi_core::Result<NonLocalFrame<f64>> {
        NonLocalFrame::new(
            self.theta1,
            self.theta2,
            self.a1,
            self.a2,
            self.b1,
            self.b2,
            self.branch,
        )
    }
}

/// `lo, lo + step, …` up to `hi` inclusive, rounded to 1e-9.
pub fn stepped(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as i64;
    (0..=n).map(|k| ((lo + k as f64 * step) * 1e9).round() / 1e9).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Rényi–Wehrl orders.
    pub beta: Vec<f64>,
    /// Local squeezing values searched by the ξ-optimized witness.
    pub xi: Vec<f64>,
    /// Marginal-entropy orders of the STW criterion.
    pub alpha: Vec<f64>,
    /// Tile sizes of the resolution sweep table.
    pub delta: Vec<f64>,
    /// Squeezing parameters of the resolution sweep.
    pub lambda: Vec<f64>,
    /// `σ₋/σ₊` values of the ratio scan (at `σ₊ = 1`, `φ = 0`).
    pub sigma_ratio: Vec<f64>,
    pub sigma_plus: Vec<f64>,
    pub sigma_minus: Vec<f64>,
    /// Wigner-level moments of the region comparison.
    pub sigma_r2: Vec<f64>,
    pub sigma_s2: Vec<f64>,
    pub sigma_rs: Vec<f64>,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            beta: husimi_core::criteria::default_beta_grid(),
            xi: husimi_core::criteria::default_xi_grid(),
            alpha: husimi_core::criteria::default_alpha_grid(),
            delta: stepped(0.1, 4.0, 0.1),
            lambda: stepped(0.05, 0.95, 0.05),
            sigma_ratio: stepped(0.5, 2.0, 0.01),
            sigma_plus: stepped(0.5, 2.5, 0.25),
            sigma_minus: stepped(0.5, 2.5, 0.25),
            sigma_r2: stepped(0.1, 3.0, 0.1),
            sigma_s2: stepped(0.1, 3.0, 0.1),
            sigma_rs: stepped(-1.0, 1.0, 0.1),
        }
    }
}

/// One `(φ, ξ)` configuration of the example-state sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Setting {
    pub phi: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExampleConfig {
    pub settings: Vec<Setting>,
}

impl Default for ExampleConfig {
    fn default() -> Self {
        Self {
            settings: vec![
                Setting { phi: 0.0, xi: 1.0 },
                Setting { phi: 0.0, xi: 1.5 },
                Setting {
                    phi: FRAC_PI_4,
                    xi: 1.0,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolutionConfig {
    /// Ascending tile sizes scanned before bisecting for `δ*`.
    pub scan: Vec<f64>,
    /// Bisection stops once the bracket is narrower than this.
    pub resolution: f64,
}

impl Default for ResolutionConfig {
    fn default() -> Self {
        Self {
            scan: stepped(0.1, 10.0, 0.1),
            resolution: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub n: usize,
    pub reps: usize,
    /// Mixture components of the fit.
    pub k: usize,
    pub restarts: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            reps: 100,
            k: 2,
            restarts: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalCriterion {
    General,
    RenyiWehrl,
    SecondMoment,
    Dgcz,
    Mgvt,
    Stw,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Defaults to `general` with `f`, else `renyi-wehrl` with `beta`.
    pub criterion: Option<EvalCriterion>,
    /// Concave function, e.g. `wehrl`, `power:0.5`, `min:0.3`.
    pub f: Option<String>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    /// Sample CSV used instead of the named state.
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub state: Option<StateConfig>,
    #[serde(default)]
    pub frame: FrameConfig,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub example: ExampleConfig,
    #[serde(default)]
    pub resolution: ResolutionConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; falls back to `$HUSIMI_OUT_DIR`, then `husimi-out`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Validation failure pointing at the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {reason}")]
pub struct ConfigError {
    pub path: String,
    pub reason: String,
}

fn err(path: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.into(),
        reason: reason.into(),
    }
}

fn check_grid(path: &str, grid: &[f64], ok: impl Fn(f64) -> bool, rule: &str) -> Result<(), ConfigError> {
    if grid.is_empty() {
        return Err(err(path, "must be non-empty"));
    }
    for (i, &v) in grid.iter().enumerate() {
        if !v.is_finite() || !ok(v) {
            return Err(err(format!("{path}[{i}]"), format!("{v} {rule}")));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            state: None,
            frame: FrameConfig::default(),
            grids: Grids::default(),
            example: ExampleConfig::default(),
            resolution: ResolutionConfig::default(),
            sampling: SamplingConfig::default(),
            eval: EvalConfig::default(),
            seed: 0,
            output: None,
            format: Format::Csv,
        }
    }

    /// State used when none is configured.
    pub fn state_or_default(&self) -> StateConfig {
        self.state.clone().unwrap_or_else(|| match self.experiment {
            Experiment::SamplingStudy => StateConfig::new(
                "tmsv-mixture",
                serde_json::json!({ "lambda": 0.8, "displacement_r": 2.0, "weight_p": 0.3 }),
            ),
            _ => StateConfig::new("tmsv", serde_json::json!({ "lambda": 0.8 })),
        })
    }

    /// Output directory, resolved against the environment.
    pub fn output_dir(&self) -> PathBuf {
        self.output
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    /// Parses JSON, reporting the path of the first offending field.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            err(
                if path.is_empty() { ".".to_string() } else { path },
                e.into_inner().to_string(),
            )
        })
    }

    /// Checks every field the chosen experiment reads.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: f64| v > 0.0;
        let g = &self.grids;
        self.frame.build().map_err(|e| err("frame", e.to_string()))?;
        match self.experiment {
            Experiment::Regions => {
                check_grid("grids.sigma_r2", &g.sigma_r2, |_| true, "")?;
                check_grid("grids.sigma_s2", &g.sigma_s2, |_| true, "")?;
                check_grid("grids.sigma_rs", &g.sigma_rs, |_| true, "")?;
            }
            Experiment::ExampleSweep => {
                check_grid("grids.sigma_plus", &g.sigma_plus, positive, "must be positive")?;
                check_grid("grids.sigma_minus", &g.sigma_minus, positive, "must be positive")?;
                check_grid("grids.sigma_ratio", &g.sigma_ratio, positive, "must be positive")?;
                check_grid("grids.xi", &g.xi, positive, "must be positive")?;
                self.check_beta()?;
                check_grid("grids.alpha", &g.alpha, |a| a > 0.5, "must exceed 1/2")?;
                if self.example.settings.is_empty() {
                    return Err(err("example.settings", "must be non-empty"));
                }
                for (i, s) in self.example.settings.iter().enumerate() {
                    if !s.phi.is_finite() {
                        return Err(err(format!("example.settings[{i}].phi"), "must be finite"));
                    }
                    if !(s.xi > 0.0 && s.xi.is_finite()) {
                        return Err(err(format!("example.settings[{i}].xi"), "must be positive"));
                    }
                }
            }
            Experiment::ResolutionSweep => {
                check_grid(
                    "grids.lambda",
                    &g.lambda,
                    |l| (0.0..1.0).contains(&l),
                    "must lie in [0, 1)",
                )?;
                check_grid("grids.delta", &g.delta, positive, "must be positive")?;
                self.check_beta()?;
                check_grid("resolution.scan", &self.resolution.scan, positive, "must be positive")?;
                if self.resolution.scan.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(err("resolution.scan", "must be strictly increasing"));
                }
                if !(self.resolution.resolution > 0.0) {
                    return Err(err("resolution.resolution", "must be positive"));
                }
            }
            Experiment::SamplingStudy => {
                self.check_state()?;
                self.check_beta()?;
                self.check_sampling()?;
                if self.sampling.reps < 2 {
                    return Err(err("sampling.reps", "must be at least 2"));
                }
            }
            Experiment::Eval => self.check_eval()?,
        }
        Ok(())
    }

    fn check_beta(&self) -> Result<(), ConfigError> {
        check_grid(
            "grids.beta",
            &self.grids.beta,
            |b| (BETA_MIN..=BETA_MAX).contains(&b),
            &format!("outside [{BETA_MIN}, {BETA_MAX}]"),
        )
    }

    fn check_state(&self) -> Result<(), ConfigError> {
        let state = self.state_or_default();
        let spec = state.spec().map_err(|e| err("state", e.to_string()))?;
        spec.marginal(&self.frame.build().map_err(|e| err("frame", e.to_string()))?)
            .map(|_| ())
            .map_err(|e| err("state.params", e.to_string()))
    }

    fn check_sampling(&self) -> Result<(), ConfigError> {
        let s = &self.sampling;
        if s.k == 0 {
            return Err(err("sampling.k", "must be at least 1"));
        }
        if s.restarts == 0 {
            return Err(err("sampling.restarts", "must be at least 1"));
        }
        if s.n <= 10 * s.k {
            return Err(err("sampling.n", format!("must exceed 10·k = {}", 10 * s.k)));
        }
        Ok(())
    }

    fn check_eval(&self) -> Result<(), ConfigError> {
        let e = &self.eval;
        if let Some(b) = e.beta {
            if !(BETA_MIN..=BETA_MAX).contains(&b) {
                return Err(err("eval.beta", format!("{b} outside [{BETA_MIN}, {BETA_MAX}]")));
            }
        }
        if let Some(a) = e.alpha {
            if !(a > 0.5) {
                return Err(err("eval.alpha", format!("{a} must exceed 1/2")));
            }
        }
        if let Some(f) = &e.f {
            f.parse::<husimi_core::criteria::ConcaveFunction<f64>>()
                .map_err(|x| err("eval.f", x.to_string()))?;
        }
        if e.samples.is_some() {
            if self.sampling.k == 0 {
                return Err(err("sampling.k", "must be at least 1"));
            }
            if !matches!(e.criterion, None | Some(EvalCriterion::RenyiWehrl)) {
                return Err(err("eval.criterion", "sample input supports renyi-wehrl only"));
            }
            return Ok(());
        }
        self.check_state()?;
        match e.criterion {
            Some(EvalCriterion::General) if e.f.is_none() => Err(err("eval.f", "required by criterion general")),
            Some(EvalCriterion::Stw) if e.alpha.is_none() => Err(err("eval.alpha", "required by criterion stw")),
            _ => Ok(()),
        }
    }
}

/// Overlays `top` on `base`, recursing into objects.
pub fn merge_json(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge_json(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, t) => *slot = t,
    }
}
