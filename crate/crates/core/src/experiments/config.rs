//! Scenario configuration (TOML) and the built-in scenarios.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoders::InstantScenario;
use crate::error::{Error, Result};

/// How each trial's input is sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sampling {
    /// Point samples `x(t_k)` (sinc kernels, L2 metric).
    Point,
    /// Integrals over consecutive intervals, optionally leaky.
    Integral {
        #[serde(default)]
        leak: f64,
    },
    /// Differences `x(t_k) - x(t_{k-1})` (ramp kernels, Sobolev metric).
    Ramp,
    /// Level crossings; either a fixed spacing or a target crossing rate per unit time.
    LevelCrossing {
        #[serde(default)]
        spacing: Option<f64>,
        #[serde(default)]
        ratio: Option<f64>,
        #[serde(default)]
        offset: f64,
    },
}

/// Additive Gaussian sample noise, `snr_db` below the input power.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub snr_db: f64,
}

/// Reconstruction algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Frame,
    KaczmarzCyclic,
    KaczmarzRandom,
    Grochenig,
    Pocs,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Frame => "frame",
            Algorithm::KaczmarzCyclic => "kaczmarz_cyclic",
            Algorithm::KaczmarzRandom => "kaczmarz_random",
            Algorithm::Grochenig => "grochenig",
            Algorithm::Pocs => "pocs",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        [Algorithm::Frame, Algorithm::KaczmarzCyclic, Algorithm::KaczmarzRandom, Algorithm::Grochenig, Algorithm::Pocs]
            .into_iter()
            .find(|a| a.name() == name)
            .ok_or_else(|| Error::Config { field: "algo".into(), message: format!("unknown algorithm `{name}`") })
    }
}

/// One algorithm entry; `label` defaults to the algorithm name, or
/// `grochenig_relaxed` for a relaxed Grochenig run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub algo: Algorithm,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub label: Option<String>,
}

impl AlgorithmSpec {
    pub fn new(algo: Algorithm, lambda: Option<f64>) -> Self {
        Self { algo, lambda, label: None }
    }

    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match (self.algo, self.lambda) {
            (Algorithm::Grochenig, Some(l)) if l != 1.0 => "grochenig_relaxed".into(),
            (a, _) => a.name().into(),
        }
    }
}

/// Mixing matrix for multichannel scenarios; each channel draws its own instants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultichannelSpec {
    /// Row-major `M x N` matrix.
    pub matrix: Vec<Vec<f64>>,
}

/// Output locations; relative paths resolve against the working directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

fn default_rms() -> f64 {
    1.0
}

/// Full description of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub period: f64,
    /// Number of random inputs averaged.
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_rms")]
    pub signal_rms: f64,
    #[serde(default)]
    pub instants: Option<InstantScenario>,
    pub sampling: Sampling,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub iterations: usize,
    /// Iterations at which waveform snapshots are kept (level-crossing scenarios).
    #[serde(default)]
    pub snapshots: Vec<usize>,
    #[serde(default)]
    pub multichannel: Option<MultichannelSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn cfg_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config { field: field.into(), message: message.into() }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
            let at = e.span().map(|s| line_of(text, s.start)).map(|l| format!("line {l}: ")).unwrap_or_default();
            cfg_err("toml", format!("{at}{}", e.message()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenario.is_empty() {
            return Err(cfg_err("scenario", "must not be empty"));
        }
        if !(self.period >= 3.0 && self.period.is_finite()) {
            return Err(cfg_err("period", "must be at least 3"));
        }
        if self.trials == 0 {
            return Err(cfg_err("trials", "must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(cfg_err("iterations", "must be at least 1"));
        }
        if !(self.signal_rms > 0.0) {
            return Err(cfg_err("signal_rms", "must be positive"));
        }
        if self.algorithms.is_empty() {
            return Err(cfg_err("algorithms", "at least one algorithm is required"));
        }
        let level = matches!(self.sampling, Sampling::LevelCrossing { .. });
        if !level && self.instants.is_none() {
            return Err(cfg_err("instants", "required unless sampling is level_crossing"));
        }
        if let Sampling::LevelCrossing { spacing, ratio, .. } = self.sampling {
            match (spacing, ratio) {
                (Some(s), None) if s > 0.0 => {}
                (None, Some(r)) if r > 0.0 => {}
                _ => return Err(cfg_err("sampling", "level_crossing needs exactly one positive `spacing` or `ratio`")),
            }
        }
        if let Sampling::Integral { leak } = self.sampling {
            if !(leak >= 0.0) {
                return Err(cfg_err("sampling.leak", "must be non-negative"));
            }
        }
        if let Some(n) = &self.noise {
            if n.snr_db.is_nan() {
                return Err(cfg_err("noise.snr_db", "must be a number"));
            }
        }
        for a in &self.algorithms {
            if let Some(l) = a.lambda {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(cfg_err("algorithms.lambda", format!("{l} is not a positive relaxation")));
                }
            }
            let pointwise = matches!(self.sampling, Sampling::Point | Sampling::LevelCrossing { .. } | Sampling::Ramp);
            if a.algo == Algorithm::Grochenig && !pointwise {
                return Err(cfg_err("algorithms", "grochenig needs point values (point, ramp or level_crossing sampling)"));
            }
        }
        if let Some(mc) = &self.multichannel {
            let n = mc.matrix.first().map_or(0, Vec::len);
            if n == 0 || mc.matrix.iter().any(|r| r.len() != n) {
                return Err(cfg_err("multichannel.matrix", "must be a non-empty rectangular matrix"));
            }
            if !matches!(self.sampling, Sampling::Integral { leak } if leak == 0.0) {
                return Err(cfg_err("sampling", "multichannel scenarios use leak-free integral sampling"));
            }
            if self.algorithms.iter().any(|a| a.algo != Algorithm::Pocs) {
                return Err(cfg_err("algorithms", "multichannel scenarios support only `pocs`"));
            }
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("out").join(&self.scenario))
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Period and trial count for desk or full scale.
pub fn scale(full: bool) -> (f64, usize) {
    if full {
        (315.0, 100)
    } else {
        (63.0, 20)
    }
}

fn fig2(name: &str, instants: InstantScenario, relaxed: f64, noise: Option<NoiseSpec>, full: bool) -> ScenarioConfig {
    let (period, trials) = scale(full);
    ScenarioConfig {
        scenario: name.into(),
        period,
        trials,
        seed: 2024,
        signal_rms: 1.0,
        instants: Some(instants),
        sampling: Sampling::Point,
        noise,
        algorithms: vec![
            AlgorithmSpec::new(Algorithm::Frame, None),
            AlgorithmSpec::new(Algorithm::KaczmarzCyclic, None),
            AlgorithmSpec::new(Algorithm::KaczmarzRandom, None),
            AlgorithmSpec::new(Algorithm::Grochenig, None),
            AlgorithmSpec::new(Algorithm::Grochenig, Some(relaxed)),
        ],
        iterations: 30,
        snapshots: Vec::new(),
        multichannel: None,
        output: OutputSpec::default(),
    }
}

/// Point sampling with gaps uniform in `[0.3, 1]`.
pub fn fig2a(full: bool) -> ScenarioConfig {
    fig2("fig2a", InstantScenario::UniformGap { lo: 0.3, hi: 1.0 }, 1.3, None, full)
}

/// Clusters of three instants spaced 1/4, mean density 2.
pub fn fig2b(full: bool) -> ScenarioConfig {
    fig2("fig2b", InstantScenario::Clusters { intra_gap: 0.25, count: 3, ratio: 2.0 }, 1.45, None, full)
}

/// Gaps uniform in `[0, 0.5]` with 45 dB sample noise.
pub fn fig2c(full: bool) -> ScenarioConfig {
    let mut cfg = fig2("fig2c", InstantScenario::UniformGap { lo: 0.0, hi: 0.5 }, 1.05, Some(NoiseSpec { snr_db: 45.0 }), full);
    cfg.iterations = 60;
    cfg
}

/// Sub-Nyquist level crossings (0.77 crossings per unit time), single input.
pub fn fig3(full: bool) -> ScenarioConfig {
    let (period, _) = scale(full);
    ScenarioConfig {
        scenario: "fig3".into(),
        period,
        trials: 1,
        seed: 7,
        signal_rms: 1.0,
        instants: None,
        sampling: Sampling::LevelCrossing { spacing: None, ratio: Some(0.77), offset: 0.0 },
        noise: None,
        algorithms: vec![AlgorithmSpec::new(Algorithm::Grochenig, None)],
        iterations: 200,
        snapshots: vec![2, 20, 200],
        multichannel: None,
        output: OutputSpec::default(),
    }
}

/// Resolves `fig2a | fig2b | fig2c | fig3 | custom:<file>`.
pub fn builtin_or_custom(name: &str, full: bool) -> Result<ScenarioConfig> {
    match name {
        "fig2a" => Ok(fig2a(full)),
        "fig2b" => Ok(fig2b(full)),
        "fig2c" => Ok(fig2c(full)),
        "fig3" => Ok(fig3(full)),
        other => match other.strip_prefix("custom:") {
            Some(path) => {
                let mut cfg = ScenarioConfig::load(Path::new(path))?;
                if full {
                    let (period, trials) = scale(true);
                    cfg.period = period;
                    cfg.trials = cfg.trials.max(trials);
                }
                Ok(cfg)
            }
            None => Err(cfg_err("scenario", format!("unknown scenario `{other}`"))),
        },
    }
}
