//! Run configuration: one TOML document with a section per subcommand.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::estimates::{check_wrap_around, EstimatesSpec, RatioSetup};
use crate::experiments::illposed::GrowthFitSpec;
use crate::experiments::refinement::{DuhamelStudySpec, GaugeStudySpec};
use crate::gauge::InnerRoute;
use crate::solver::{Dealias, NonlinearForm, NonlinearSign, SolverConfig};
use crate::spectral::{Field, SpectralGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Simulate,
    GaugeResidual,
    Illposed,
    Estimates,
    Admissible,
    Scaling,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::Simulate,
        Subcommand::GaugeResidual,
        Subcommand::Illposed,
        Subcommand::Estimates,
        Subcommand::Admissible,
        Subcommand::Scaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::GaugeResidual => "gauge-residual",
            Subcommand::Illposed => "illposed",
            Subcommand::Estimates => "estimates",
            Subcommand::Admissible => "admissible",
            Subcommand::Scaling => "scaling",
        }
    }

    /// TOML section holding the parameter block.
    pub fn section(self) -> &'static str {
        match self {
            Subcommand::GaugeResidual => "gauge_residual",
            other => other.name(),
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::Config(format!("unknown subcommand `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub n_points: usize,
    pub length: f64,
}

impl GridParams {
    pub fn build(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.n_points, self.length)
    }
}

/// Gaussian `a exp(-((x - c)/w)²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        Self { amplitude: default_amplitude(), width: 1.0, center: 0.0 }
    }
}

impl InitialData {
    pub fn build(&self, grid: &SpectralGrid) -> Result<Field> {
        if !(self.width > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::Config("initial width must be positive and amplitude finite".into()));
        }
        let InitialData { amplitude, width, center } = *self;
        Ok(Field::from_fn(grid, |x| amplitude * (-((x - center) / width).powi(2)).exp()))
    }
}

fn default_amplitude() -> f64 {
    0.1
}
fn one() -> f64 {
    1.0
}
fn default_k() -> u32 {
    12
}
fn default_stride() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub grid: GridParams,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default = "default_k")]
    pub k: u32,
    /// Defaults to the stability bound.
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_sign")]
    pub sign: NonlinearSign,
    #[serde(default)]
    pub rescaled: bool,
    #[serde(default = "default_dealias")]
    pub dealias: Dealias,
    #[serde(default)]
    pub filter_strength: f64,
    #[serde(default = "default_form")]
    pub form: NonlinearForm,
    /// Strides for a Duhamel refinement study; empty skips it.
    #[serde(default)]
    pub duhamel_strides: Vec<usize>,
    #[serde(default = "default_duhamel_max")]
    pub duhamel_max_residual: f64,
    #[serde(default = "four")]
    pub duhamel_min_ratio: f64,
    #[serde(default = "default_drift")]
    pub max_mass_drift: f64,
}

fn default_sign() -> NonlinearSign {
    NonlinearSign::Plus
}
fn default_dealias() -> Dealias {
    Dealias::TwoThirds
}
fn default_form() -> NonlinearForm {
    NonlinearForm::Conservative
}
fn default_duhamel_max() -> f64 {
    1e-6
}
fn four() -> f64 {
    4.0
}
fn default_drift() -> f64 {
    1e-12
}

impl SimulateParams {
    pub fn solver_config(&self, grid: &SpectralGrid) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.k, self.dt.unwrap_or_else(|| SolverConfig::stability_bound(grid)), self.t_end);
        cfg.stride = self.stride;
        cfg.sign = self.sign;
        cfg.rescaled = self.rescaled;
        cfg.dealias = self.dealias;
        cfg.filter_strength = self.filter_strength;
        cfg.form = self.form;
        cfg.validate(grid)?;
        Ok(cfg)
    }

    pub fn duhamel_spec(&self, grid: &SpectralGrid) -> Result<Option<DuhamelStudySpec>> {
        if self.duhamel_strides.is_empty() {
            return Ok(None);
        }
        Ok(Some(DuhamelStudySpec {
            config: self.solver_config(grid)?,
            strides: self.duhamel_strides.clone(),
            max_residual: self.duhamel_max_residual,
            min_ratio: self.duhamel_min_ratio,
        }))
    }

    fn validate(&self) -> Result<()> {
        let grid = self.grid.build()?;
        self.initial.build(&grid)?;
        self.solver_config(&grid)?;
        if self.duhamel_strides.len() == 1 || self.duhamel_strides.contains(&0) {
            return Err(Error::Config("duhamel_strides needs >= 2 positive entries".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeParams {
    pub grid: GridParams,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default = "default_k")]
    pub k: u32,
    pub slice_spacing: f64,
    pub stride: usize,
    #[serde(default = "nine")]
    pub n_slices: usize,
    #[serde(default = "two")]
    pub levels: usize,
    #[serde(default = "default_route")]
    pub route: InnerRoute,
    #[serde(default = "eight")]
    pub min_ratio: f64,
    #[serde(default = "default_gauge_max")]
    pub max_relative: f64,
}

fn nine() -> usize {
    9
}
fn two() -> usize {
    2
}
fn eight() -> f64 {
    8.0
}
fn default_route() -> InnerRoute {
    InnerRoute::Direct
}
fn default_gauge_max() -> f64 {
    1e-4
}

impl GaugeParams {
    pub fn spec(&self) -> GaugeStudySpec {
        GaugeStudySpec {
            k: self.k,
            slice_spacing: self.slice_spacing,
            stride: self.stride,
            n_slices: self.n_slices,
            levels: self.levels,
            route: self.route,
            min_ratio: self.min_ratio,
            max_relative: self.max_relative,
        }
    }

    fn validate(&self) -> Result<()> {
        let grid = self.grid.build()?;
        self.initial.build(&grid)?;
        self.spec().validate(&grid)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IllposedConfig {
    pub s: f64,
    pub theta: f64,
    #[serde(default = "one")]
    pub t: f64,
    pub n_list: Vec<f64>,
    #[serde(default = "thirty_two")]
    pub m: usize,
    #[serde(default = "tenth")]
    pub slope_tol: f64,
    #[serde(default = "five_percent")]
    pub refinement_tol: f64,
    /// Torus oracle lattice density; 0 disables the oracle.
    #[serde(default)]
    pub oracle_modes: usize,
    #[serde(default = "five_percent")]
    pub oracle_tol: f64,
    #[serde(default = "five_percent")]
    pub hn_drift_tol: f64,
    /// Second θ for the sensitivity check.
    pub theta_compare: Option<f64>,
    #[serde(default = "tenth")]
    pub sensitivity_tol: f64,
}

fn thirty_two() -> usize {
    32
}
fn tenth() -> f64 {
    0.1
}
fn five_percent() -> f64 {
    0.05
}

impl IllposedConfig {
    pub fn spec(&self, theta: f64) -> GrowthFitSpec {
        let mut g = GrowthFitSpec::new(self.s, theta, self.n_list.clone());
        g.t = self.t;
        g.m = self.m;
        g.slope_tol = self.slope_tol;
        g.refinement_tol = self.refinement_tol;
        g.oracle_modes = (self.oracle_modes > 0).then_some(self.oracle_modes);
        g.oracle_tol = self.oracle_tol;
        g.hn_drift_tol = self.hn_drift_tol;
        g
    }

    fn validate(&self) -> Result<()> {
        if self.oracle_modes > 0 && self.oracle_modes < 8 {
            return Err(Error::Config("oracle_modes must be 0 or >= 8".into()));
        }
        self.spec(self.theta).validate()?;
        if let Some(t) = self.theta_compare {
            self.spec(t).validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatesConfig {
    pub length: f64,
    pub n_ladder: Vec<usize>,
    pub t: f64,
    #[serde(default = "default_times")]
    pub n_times: usize,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default = "two_f")]
    pub max_drift: f64,
    #[serde(default = "default_control")]
    pub control_frequencies: Vec<f64>,
    #[serde(default = "five_percent")]
    pub control_exponent_tol: f64,
}

fn default_times() -> usize {
    256
}
fn default_trials() -> usize {
    16
}
fn two_f() -> f64 {
    2.0
}
fn default_control() -> Vec<f64> {
    vec![8.0, 16.0, 32.0, 64.0]
}

impl EstimatesConfig {
    pub fn spec(&self, seed: u64) -> EstimatesSpec {
        EstimatesSpec {
            setup: RatioSetup {
                length: self.length,
                n_ladder: self.n_ladder.clone(),
                t: self.t,
                n_times: self.n_times,
                n_trials: self.n_trials,
                seed,
            },
            max_drift: self.max_drift,
            control_frequencies: self.control_frequencies.clone(),
            control_exponent_tol: self.control_exponent_tol,
        }
    }

    fn validate(&self) -> Result<()> {
        self.spec(0).setup.validate()?;
        if !(self.t < 1.0) {
            return Err(Error::Config(format!("estimates need T < 1, got {}", self.t)));
        }
        if self.control_frequencies.len() < 3 {
            return Err(Error::Config("plane-wave control needs >= 3 frequencies".into()));
        }
        let finest = SpectralGrid::new(*self.n_ladder.iter().max().expect("nonempty"), self.length)?;
        check_wrap_around(&finest, self.t)?;
        if self.control_frequencies.iter().any(|f| !(*f > 0.0 && *f < finest.xi_max())) {
            return Err(Error::Config("control frequencies must lie in (0, xi_max)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibleConfig {
    pub s: f64,
    pub k: u32,
    #[serde(default = "milli")]
    pub eps: f64,
    #[serde(default = "milli")]
    pub delta: f64,
}

fn milli() -> f64 {
    1e-3
}

impl AdmissibleConfig {
    fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be >= 2, got {}", self.k)));
        }
        if !(self.s > 0.0 && self.s < 0.5) {
            return Err(Error::Config(format!("s must lie in (0, 1/2), got {}", self.s)));
        }
        if !(self.eps > 0.0 && self.delta > 0.0) {
            return Err(Error::Config("eps and delta must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub grid: GridParams,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default = "default_k")]
    pub k: u32,
    pub lambdas: Vec<f64>,
    pub s_list: Vec<f64>,
    #[serde(default = "default_norm_tol")]
    pub norm_tol: f64,
    /// Flow-commutation horizon; omitted checks initial data only.
    pub t_end: Option<f64>,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_flow_tol")]
    pub flow_tol: f64,
}

fn default_norm_tol() -> f64 {
    1e-10
}
fn default_flow_tol() -> f64 {
    1e-6
}

impl ScalingConfig {
    pub fn flow_config(&self, grid: &SpectralGrid) -> Result<Option<SolverConfig>> {
        let Some(t_end) = self.t_end else { return Ok(None) };
        let mut cfg = SolverConfig::new(self.k, SolverConfig::stability_bound(grid), t_end);
        cfg.stride = self.stride;
        cfg.validate(grid)?;
        Ok(Some(cfg))
    }

    fn validate(&self) -> Result<()> {
        let grid = self.grid.build()?;
        self.initial.build(&grid)?;
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Config("lambdas must be nonempty and positive".into()));
        }
        if self.s_list.is_empty() {
            return Err(Error::Config("s_list must be nonempty".into()));
        }
        self.flow_config(&grid)?;
        Ok(())
    }
}

/// Parameter block of the selected subcommand.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Simulate(SimulateParams),
    GaugeResidual(GaugeParams),
    Illposed(IllposedConfig),
    Estimates(EstimatesConfig),
    Admissible(AdmissibleConfig),
    Scaling(ScalingConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub params: Params,
    pub out: Option<String>,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    out: Option<String>,
    seed: Option<u64>,
    simulate: Option<SimulateParams>,
    gauge_residual: Option<GaugeParams>,
    illposed: Option<IllposedConfig>,
    estimates: Option<EstimatesConfig>,
    admissible: Option<AdmissibleConfig>,
    scaling: Option<ScalingConfig>,
}

fn missing(cmd: Subcommand) -> Error {
    Error::Config(format!("missing [{}] section", cmd.section()))
}

/// Parses and validates the section for `cmd`; other sections are parsed but not validated.
pub fn parse_config(text: &str, cmd: Subcommand) -> Result<RunConfig> {
    let doc: Document = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    let params = match cmd {
        Subcommand::Simulate => Params::Simulate(doc.simulate.ok_or_else(|| missing(cmd))?),
        Subcommand::GaugeResidual => Params::GaugeResidual(doc.gauge_residual.ok_or_else(|| missing(cmd))?),
        Subcommand::Illposed => Params::Illposed(doc.illposed.ok_or_else(|| missing(cmd))?),
        Subcommand::Estimates => Params::Estimates(doc.estimates.ok_or_else(|| missing(cmd))?),
        Subcommand::Admissible => Params::Admissible(doc.admissible.ok_or_else(|| missing(cmd))?),
        Subcommand::Scaling => Params::Scaling(doc.scaling.ok_or_else(|| missing(cmd))?),
    };
    let checked = match &params {
        Params::Simulate(p) => p.validate(),
        Params::GaugeResidual(p) => p.validate(),
        Params::Illposed(p) => p.validate(),
        Params::Estimates(p) => p.validate(),
        Params::Admissible(p) => p.validate(),
        Params::Scaling(p) => p.validate(),
    };
    checked.map_err(|e| match e {
        Error::Config(m) => Error::Config(m),
        other => Error::Config(other.to_string()),
    })?;
    Ok(RunConfig { subcommand: cmd, params, out: doc.out, seed: doc.seed.unwrap_or(DEFAULT_SEED) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_illposed_block() {
        let text = "[illposed]\ns = 0.2\ntheta = 0.2\nn_list = [64, 128, 256, 512, 1024]\n";
        let cfg = parse_config(text, Subcommand::Illposed).unwrap();
        let Params::Illposed(p) = cfg.params else { panic!() };
        assert_eq!(p.m, 32);
        assert_eq!(p.t, 1.0);
        assert_eq!(cfg.seed, DEFAULT_SEED);
    }

    #[test]
    fn zero_step_is_rejected() {
        let text = "[simulate]\ndt = 0.0\nt_end = 0.1\n[simulate.grid]\nn_points = 256\nlength = 30.0\n";
        assert!(matches!(parse_config(text, Subcommand::Simulate), Err(Error::Config(_))));
    }

    #[test]
    fn admissible_block() {
        let cfg = parse_config("[admissible]\ns = 0.45\nk = 12\n", Subcommand::Admissible).unwrap();
        assert_eq!(cfg.params, Params::Admissible(AdmissibleConfig { s: 0.45, k: 12, eps: 1e-3, delta: 1e-3 }));
    }

    #[test]
    fn unknown_and_missing_keys() {
        assert!(parse_config("[admissible]\ns = 0.45\nk = 12\ncolour = 1\n", Subcommand::Admissible).is_err());
        assert!(parse_config("[admissible]\ns = 0.45\n", Subcommand::Admissible).is_err());
        assert!(parse_config("stray = 1\n[admissible]\ns = 0.45\nk = 12\n", Subcommand::Admissible).is_err());
        assert!(parse_config("[admissible]\ns = 0.45\nk = 12\n", Subcommand::Scaling).is_err());
    }

    #[test]
    fn short_ladder_is_rejected() {
        let text = "[illposed]\ns = 0.2\ntheta = 0.2\nn_list = [64, 128, 256]\n";
        assert!(parse_config(text, Subcommand::Illposed).is_err());
    }

    #[test]
    fn subcommand_names_round_trip() {
        for c in Subcommand::ALL {
            assert_eq!(c.name().parse::<Subcommand>().unwrap(), c);
        }
        assert!("plot".parse::<Subcommand>().is_err());
    }
}
