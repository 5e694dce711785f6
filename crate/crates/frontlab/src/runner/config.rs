//! Experiment configuration. Every physical default (grids, steps, windows,
//! tolerances) lives here so a config file fully describes a run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::diffusive::{TimeCoefficient, DEFAULT_XI_MAX};
use crate::kpp2d::YBoundary;
use crate::scenarios::{Blend, Datum1D, Notch, OscillationSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Wave,
    Run1d,
    Run2d,
    Heat,
    Dirichlet,
    Suite,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Wave => "wave",
            Pipeline::Run1d => "run1d",
            Pipeline::Run2d => "run2d",
            Pipeline::Heat => "heat",
            Pipeline::Dirichlet => "dirichlet",
            Pipeline::Suite => "suite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub pipeline: Pipeline,
    pub name: String,
    #[serde(default)]
    pub wave: WaveConfig,
    pub run1d: Option<Run1dConfig>,
    pub run2d: Option<Run2dConfig>,
    pub heat: Option<HeatConfig>,
    pub dirichlet: Option<DirichletConfig>,
    pub suite: Option<SuiteConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveConfig {
    pub half_width: f64,
    pub step: f64,
    pub tail_window: [f64; 2],
    pub residual_max: f64,
    pub tail_deviation_max: f64,
    /// seconds
    pub runtime_max: f64,
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self {
            half_width: 40.0,
            step: 0.005,
            tail_window: [8.0, 12.0],
            residual_max: 1e-6,
            tail_deviation_max: 1e-2,
            runtime_max: 1.0,
        }
    }
}

/// Moving-frame x-grid and time stepping shared by the 1D and 2D runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepConfig {
    pub t_end: f64,
    pub x_min: f64,
    /// defaults to `60 + 4 sqrt(t_end)`
    pub x_max: Option<f64>,
    pub h: f64,
    pub dt: f64,
    pub level: f64,
    pub per_decade: usize,
    pub extra_times: Vec<f64>,
    /// times whose fields are written as raw dumps
    pub dump_times: Vec<f64>,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            t_end: 2000.0,
            x_min: -40.0,
            x_max: None,
            h: 0.1,
            dt: 0.008,
            level: 0.5,
            per_decade: 32,
            extra_times: vec![],
            dump_times: vec![],
        }
    }
}

impl StepConfig {
    pub fn x_max(&self) -> f64 {
        self.x_max.unwrap_or(60.0 + 4.0 * self.t_end.sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Run1dConfig {
    pub datum: Datum1D,
    pub steps: StepConfig,
    pub fit_window: [f64; 2],
    pub slope_range: [f64; 2],
    pub drift_times: [f64; 2],
    pub drift_max: f64,
    pub shape_time: f64,
    pub shape_max: f64,
}

impl Default for Run1dConfig {
    fn default() -> Self {
        Self {
            datum: Datum1D::Step { at: 0.0 },
            steps: StepConfig::default(),
            fit_window: [50.0, 2000.0],
            slope_range: [-1.65, -1.35],
            drift_times: [500.0, 2000.0],
            drift_max: 0.1,
            shape_time: 1000.0,
            shape_max: 0.02,
        }
    }
}

/// How the initial datum of a 2D run is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    HeavisideTrapped {
        x1: f64,
        x2: f64,
        #[serde(default = "sharp")]
        blend: Blend,
        notch: Option<Notch>,
    },
    TwoLimit {
        plus: Datum1D,
        minus: Datum1D,
        width: f64,
    },
    PeriodicY {
        base: Datum1D,
        amplitude: f64,
        period: f64,
        #[serde(default)]
        asymptotic: bool,
    },
    /// The desk sequence unless `sequence` is given.
    Oscillating {
        sequence: Option<OscillationSequence>,
    },
}

fn sharp() -> Blend {
    Blend::Sharp
}

/// Post-processing of a 2D run against a prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis2d {
    None,
    /// Front displacement against the log of the heat-evolved amplitude
    /// read off the diffusive zone at `extract_time`.
    Slaving {
        #[serde(default = "slaving_extract")]
        extract_time: f64,
        #[serde(default = "slaving_window")]
        window: [f64; 2],
        #[serde(default = "tenth")]
        tolerance: f64,
        #[serde(default = "heat_dt")]
        heat_dt: f64,
        #[serde(default = "xi_max")]
        xi_max: f64,
        /// step position of the y-independent reference run (diagnostic)
        reference_step: Option<f64>,
    },
    /// Front at `y = 0` against the merge of the two limiting 1D fronts.
    Merge {
        #[serde(default = "t2000")]
        time: f64,
        #[serde(default = "merge_window")]
        window: [f64; 2],
        #[serde(default = "tenth")]
        tolerance: f64,
    },
    /// Flatness and stationarity of a transversely periodic front.
    Periodic {
        #[serde(default = "t2000")]
        time: f64,
        #[serde(default = "t1000")]
        compare_time: f64,
        #[serde(default = "twentieth")]
        oscillation_max: f64,
        #[serde(default = "twentieth")]
        drift_max: f64,
    },
    /// Front at `y = 0` at the probe times of an oscillating scenario.
    Oscillation {
        #[serde(default = "oscillation_tolerance")]
        tolerance: f64,
        #[serde(default = "half")]
        contrast_fraction: f64,
    },
}

fn slaving_extract() -> f64 {
    100.0
}
fn slaving_window() -> [f64; 2] {
    [500.0, 2000.0]
}
fn merge_window() -> [f64; 2] {
    [1000.0, 2000.0]
}
fn tenth() -> f64 {
    0.1
}
fn twentieth() -> f64 {
    0.05
}
fn half() -> f64 {
    0.5
}
fn oscillation_tolerance() -> f64 {
    0.15
}
fn heat_dt() -> f64 {
    0.01
}
fn xi_max() -> f64 {
    DEFAULT_XI_MAX
}
fn t1000() -> f64 {
    1000.0
}
fn t2000() -> f64 {
    2000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Run2dConfig {
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub steps: StepConfig,
    pub y_min: f64,
    pub y_max: f64,
    pub y_cells: usize,
    #[serde(default = "neumann")]
    pub y_boundary: YBoundary,
    #[serde(default = "sandwich_tolerance")]
    pub sandwich_tolerance: f64,
    #[serde(default = "no_analysis")]
    pub analysis: Analysis2d,
}

fn neumann() -> YBoundary {
    YBoundary::Neumann
}
fn sandwich_tolerance() -> f64 {
    1e-8
}
fn no_analysis() -> Analysis2d {
    Analysis2d::None
}

/// Piecewise-constant data in the layout of
/// [`PiecewiseConstant`](crate::heat::PiecewiseConstant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseSpec {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default)]
    pub even: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatConfig {
    pub data: PiecewiseSpec,
    /// the data are set at `t = 1`
    #[serde(default = "t100")]
    pub t_end: f64,
    #[serde(default = "heat_h")]
    pub h: f64,
    #[serde(default = "heat_dt")]
    pub dt: f64,
    /// half-length of the grid; defaults to the outermost breakpoint plus
    /// `10 sqrt(t_end)`
    pub y_reach: Option<f64>,
    #[serde(default = "heat_tolerance")]
    pub tolerance: f64,
    /// closed-form check of the factorial oscillating sequence
    pub factorial: Option<FactorialCheck>,
}

fn t100() -> f64 {
    100.0
}
fn heat_h() -> f64 {
    0.05
}
fn heat_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FactorialCheck {
    /// pair index: probes `t_{2n}` and `t_{2n+1}` are checked
    pub pair: usize,
    pub contrast: f64,
    /// relative to the limits 1 and `M`
    pub tolerance: f64,
}

impl Default for FactorialCheck {
    fn default() -> Self {
        Self {
            pair: 8,
            contrast: 4.0,
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirichletCheck {
    /// null directions and spectral gap of the self-similar operators
    Spectral,
    /// principal/remainder split across several `epsilon`
    Scaling,
    /// decay of a transversely localized datum
    LocalizedDecay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletConfig {
    pub check: DirichletCheck,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub decay: DecayConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub h: f64,
    pub xi_max: f64,
    pub null_max: f64,
    /// random profiles for the Rayleigh quotient
    pub samples: usize,
    pub modes: usize,
    pub seed: u64,
    pub gap_min: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            h: 1e-3,
            xi_max: DEFAULT_XI_MAX,
            null_max: 1e-8,
            samples: 100,
            modes: 12,
            seed: 17,
            gap_min: 0.99,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    pub epsilons: Vec<f64>,
    pub weight_exponent: f64,
    pub bound: f64,
    pub potential: TimeCoefficient,
    pub drift: TimeCoefficient,
    pub forcing: TimeCoefficient,
    pub forcing_support: f64,
    /// coefficient of the `(xi^3 - 6 xi) e^{-xi^2/8}` part of the datum
    pub remainder: f64,
    /// even transverse profile of the datum
    pub profile: PiecewiseSpec,
    pub y_length: f64,
    pub h_y: f64,
    pub h_xi: f64,
    pub xi_max: f64,
    pub tau_end: f64,
    pub d_tau: f64,
    pub record_every: f64,
    pub beta_max: f64,
    pub beta_ratio_max: f64,
    pub remainder_window: [f64; 2],
    pub slaving_from: f64,
    pub slaving_max: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.05, 0.1, 0.2],
            weight_exponent: 0.4,
            bound: 1.0,
            potential: TimeCoefficient::cosine(1.0, 1.0),
            drift: TimeCoefficient::sine(1.0, 2.0),
            forcing: TimeCoefficient::cosine(1.0, 3.0),
            forcing_support: 2.0,
            remainder: 0.5,
            profile: PiecewiseSpec {
                breakpoints: vec![10.0],
                values: vec![2.0, 1.0],
                even: true,
            },
            y_length: 60.0,
            h_y: 0.05,
            h_xi: 0.1,
            xi_max: DEFAULT_XI_MAX,
            tau_end: 8.0,
            d_tau: 0.01,
            record_every: 0.25,
            beta_max: 10.0,
            beta_ratio_max: 3.0,
            remainder_window: [1.0, 8.0],
            slaving_from: 1.0,
            slaving_max: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    pub epsilon: f64,
    /// the datum is `xi e^{-xi^2/4}` on `0 <= y < support`
    pub support: f64,
    pub y_length: f64,
    pub h_y: f64,
    pub h_xi: f64,
    pub xi_max: f64,
    pub tau_end: f64,
    pub d_tau: f64,
    pub fraction_max: f64,
    /// the envelope comparison starts here
    pub envelope_from: f64,
    pub envelope_factor: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            support: 2.0,
            y_length: 200.0,
            h_y: 0.5,
            h_xi: 0.05,
            xi_max: DEFAULT_XI_MAX,
            tau_end: 6.0,
            d_tau: 0.01,
            fraction_max: 0.1,
            envelope_from: 1.0,
            envelope_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// member configs, relative to the suite file
    pub members: Vec<String>,
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive, got {v}")))
    }
}

fn ordered(key: &str, w: [f64; 2]) -> Result<(), ConfigError> {
    if w[0] < w[1] {
        Ok(())
    } else {
        Err(invalid(key, format!("needs lo < hi, got [{}, {}]", w[0], w[1])))
    }
}

fn within(key: &str, t: f64, steps: &StepConfig) -> Result<(), ConfigError> {
    if t >= 1.0 && t <= steps.t_end {
        Ok(())
    } else {
        Err(invalid(key, format!("time {t} outside the run [1, {}]", steps.t_end)))
    }
}

impl StepConfig {
    fn validate(&self, prefix: &str) -> Result<(), ConfigError> {
        let key = |k: &str| format!("{prefix}.steps.{k}");
        if !(self.t_end > 1.0) {
            return Err(invalid(&key("t_end"), "runs start at t = 1 and must end later"));
        }
        positive(&key("h"), self.h)?;
        positive(&key("dt"), self.dt)?;
        if !(self.x_max() > self.x_min + 10.0 * self.h) {
            return Err(invalid(&key("x_max"), "x-grid too short"));
        }
        if !(self.level > 0.05 && self.level < 0.95) {
            return Err(invalid(&key("level"), "must lie in (0.05, 0.95)"));
        }
        for t in self.extra_times.iter().chain(&self.dump_times) {
            within(&key("extra_times"), *t, self)?;
        }
        Ok(())
    }
}

impl Config {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(invalid("name", "must be a non-empty plain file name"));
        }
        let w = &self.wave;
        if !(w.half_width >= 30.0) {
            return Err(invalid("wave.half_width", "must be at least 30"));
        }
        if !(w.step > 0.0 && w.step <= 1e-2) {
            return Err(invalid("wave.step", "must lie in (0, 0.01]"));
        }
        ordered("wave.tail_window", w.tail_window)?;
        let section_missing =
            |s: &str| invalid(s, format!("pipeline \"{}\" needs a [{s}] table", self.pipeline.name()));
        match self.pipeline {
            Pipeline::Wave => Ok(()),
            Pipeline::Run1d => self.run1d.as_ref().ok_or_else(|| section_missing("run1d"))?.validate(),
            Pipeline::Run2d => self.run2d.as_ref().ok_or_else(|| section_missing("run2d"))?.validate(),
            Pipeline::Heat => self.heat.as_ref().ok_or_else(|| section_missing("heat"))?.validate(),
            Pipeline::Dirichlet => self
                .dirichlet
                .as_ref()
                .ok_or_else(|| section_missing("dirichlet"))?
                .validate(),
            Pipeline::Suite => {
                let s = self.suite.as_ref().ok_or_else(|| section_missing("suite"))?;
                if s.members.is_empty() {
                    return Err(invalid("suite.members", "empty suite"));
                }
                Ok(())
            }
        }
    }
}

impl Run1dConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        self.steps.validate("run1d")?;
        ordered("run1d.fit_window", self.fit_window)?;
        ordered("run1d.slope_range", self.slope_range)?;
        ordered("run1d.drift_times", self.drift_times)?;
        for t in self.fit_window.iter().chain(&self.drift_times) {
            within("run1d", *t, &self.steps)?;
        }
        within("run1d.shape_time", self.shape_time, &self.steps)
    }
}

impl Run2dConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        self.steps.validate("run2d")?;
        if !(self.y_max > self.y_min) {
            return Err(invalid("run2d.y_max", "must exceed y_min"));
        }
        if self.y_cells < 2 {
            return Err(invalid("run2d.y_cells", "needs at least two cells"));
        }
        let reflecting = matches!(
            self.analysis,
            Analysis2d::Slaving { .. } | Analysis2d::Merge { .. } | Analysis2d::Oscillation { .. }
        );
        if reflecting && self.y_boundary != YBoundary::Neumann {
            return Err(invalid("run2d.y_boundary", "this analysis needs the neumann boundary"));
        }
        if matches!(self.analysis, Analysis2d::Periodic { .. }) && self.y_boundary != YBoundary::Periodic {
            return Err(invalid(
                "run2d.y_boundary",
                "the periodic analysis needs the periodic boundary",
            ));
        }
        match &self.analysis {
            Analysis2d::None => {}
            Analysis2d::Slaving {
                extract_time,
                window,
                heat_dt,
                xi_max,
                ..
            } => {
                within("run2d.analysis.extract_time", *extract_time, &self.steps)?;
                ordered("run2d.analysis.window", *window)?;
                if !(window[0] >= *extract_time) {
                    return Err(invalid("run2d.analysis.window", "must start after the extraction time"));
                }
                within("run2d.analysis.window", window[1], &self.steps)?;
                positive("run2d.analysis.heat_dt", *heat_dt)?;
                if !(*xi_max >= 8.0) {
                    return Err(invalid("run2d.analysis.xi_max", "must be at least 8"));
                }
                if !matches!(self.scenario, ScenarioSpec::HeavisideTrapped { .. }) {
                    return Err(invalid("run2d.analysis", "slaving is read for trapped data"));
                }
            }
            Analysis2d::Merge { time, window, .. } => {
                within("run2d.analysis.time", *time, &self.steps)?;
                ordered("run2d.analysis.window", *window)?;
                within("run2d.analysis.window", window[0], &self.steps)?;
                within("run2d.analysis.window", window[1], &self.steps)?;
                if !matches!(self.scenario, ScenarioSpec::TwoLimit { .. }) {
                    return Err(invalid("run2d.analysis", "merge needs a two_limit scenario"));
                }
                if !(self.y_min < 0.0 && self.y_max > 0.0) {
                    return Err(invalid("run2d.y_min", "merge is read at y = 0, inside the grid"));
                }
            }
            Analysis2d::Periodic { time, compare_time, .. } => {
                within("run2d.analysis.time", *time, &self.steps)?;
                within("run2d.analysis.compare_time", *compare_time, &self.steps)?;
            }
            Analysis2d::Oscillation { .. } => {
                let ScenarioSpec::Oscillating { sequence } = &self.scenario else {
                    return Err(invalid("run2d.analysis", "oscillation needs an oscillating scenario"));
                };
                let seq = sequence.clone().unwrap_or_else(OscillationSequence::desk);
                for t in &seq.ts {
                    within("run2d.scenario.sequence.ts", *t, &self.steps)?;
                }
                if self.y_min != 0.0 {
                    return Err(invalid(
                        "run2d.y_min",
                        "oscillating data are even; the grid starts at y = 0",
                    ));
                }
            }
        }
        Ok(())
    }
}

impl PiecewiseSpec {
    pub fn build(&self, key: &str) -> Result<crate::heat::PiecewiseConstant, ConfigError> {
        crate::heat::PiecewiseConstant::new(self.breakpoints.clone(), self.values.clone(), self.even)
            .map_err(|e| invalid(key, e.to_string()))
    }
}

impl HeatConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        self.data.build("heat.data")?;
        if !(self.t_end > 1.0) {
            return Err(invalid("heat.t_end", "data are set at t = 1"));
        }
        positive("heat.h", self.h)?;
        positive("heat.dt", self.dt)?;
        if let Some(r) = self.y_reach {
            positive("heat.y_reach", r)?;
        }
        if let Some(f) = &self.factorial {
            if !(f.contrast > 1.0) {
                return Err(invalid("heat.factorial.contrast", "must exceed 1"));
            }
            if f.pair == 0 || f.pair > 40 {
                return Err(invalid("heat.factorial.pair", "must lie in 1..=40"));
            }
        }
        Ok(())
    }
}

impl DirichletConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        match self.check {
            DirichletCheck::Spectral => {
                let s = &self.spectral;
                positive("dirichlet.spectral.h", s.h)?;
                if !(s.xi_max >= 8.0) {
                    return Err(invalid("dirichlet.spectral.xi_max", "must be at least 8"));
                }
                if s.samples == 0 || s.modes == 0 {
                    return Err(invalid("dirichlet.spectral.samples", "needs samples and modes"));
                }
            }
            DirichletCheck::Scaling => {
                let s = &self.scaling;
                if s.epsilons.is_empty() || s.epsilons.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
                    return Err(invalid("dirichlet.scaling.epsilons", "need values in (0, 1]"));
                }
                positive("dirichlet.scaling.weight_exponent", s.weight_exponent)?;
                positive("dirichlet.scaling.h_y", s.h_y)?;
                positive("dirichlet.scaling.h_xi", s.h_xi)?;
                positive("dirichlet.scaling.d_tau", s.d_tau)?;
                ordered("dirichlet.scaling.remainder_window", s.remainder_window)?;
                let p = s.profile.build("dirichlet.scaling.profile")?;
                if !p.even_symmetric {
                    return Err(invalid(
                        "dirichlet.scaling.profile",
                        "the y-grid starts at 0; use even data",
                    ));
                }
            }
            DirichletCheck::LocalizedDecay => {
                let d = &self.decay;
                positive("dirichlet.decay.epsilon", d.epsilon)?;
                positive("dirichlet.decay.support", d.support)?;
                positive("dirichlet.decay.h_y", d.h_y)?;
                positive("dirichlet.decay.h_xi", d.h_xi)?;
                positive("dirichlet.decay.d_tau", d.d_tau)?;
                if !(d.tau_end > d.envelope_from) {
                    return Err(invalid("dirichlet.decay.tau_end", "must exceed envelope_from"));
                }
            }
        }
        Ok(())
    }
}
