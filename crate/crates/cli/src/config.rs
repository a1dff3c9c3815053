//! Run configuration: a TOML document with named blocks, echoed verbatim
//! into `meta.json` as JSON.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use nmsse::basis::{BasisChoice, BasisSet};
use nmsse::bath::{AbcfScheme, BathSpec, DiscreteMode, SpectralDensity};
use nmsse::hierarchy::{FockSpace, Formulation, Hierarchy, TimeGrid, Truncation};
use nmsse::models::{SystemModel, TransferCoupling};
use nmsse::noise::{default_omega_max, discretize, FrequencyGrid, DEFAULT_MODES};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemBlock,
    pub bath: BathBlock,
    #[serde(default)]
    pub basis: BasisBlock,
    #[serde(default)]
    pub noise: NoiseBlock,
    pub run: RunBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemBlock {
    Sbm {
        epsilon: f64,
        delta: f64,
    },
    Transfer {
        donor: f64,
        acceptor: f64,
        reorganization: f64,
        hopping: f64,
        #[serde(default)]
        coupling: CouplingChoice,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingChoice {
    #[default]
    Acceptor,
    SigmaZ,
    NegAcceptor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub coupling: f64,
    pub frequency: f64,
}

/// Spectral density with its temperature and correlation-function split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BathBlock {
    Discrete {
        modes: Vec<ModeEntry>,
        beta: f64,
        #[serde(default)]
        scheme: SchemeChoice,
    },
    OhmicExp {
        alpha: f64,
        cutoff: f64,
        beta: f64,
        #[serde(default)]
        scheme: SchemeChoice,
    },
    OhmicAlg {
        alpha: f64,
        cutoff: f64,
        beta: f64,
        #[serde(default)]
        scheme: SchemeChoice,
    },
    Brownian {
        reorganization: f64,
        frequency: f64,
        damping: f64,
        beta: f64,
        #[serde(default)]
        scheme: SchemeChoice,
    },
}

impl BathBlock {
    pub fn beta(&self) -> f64 {
        match *self {
            Self::Discrete { beta, .. }
            | Self::OhmicExp { beta, .. }
            | Self::OhmicAlg { beta, .. }
            | Self::Brownian { beta, .. } => beta,
        }
    }

    pub fn scheme(&self) -> SchemeChoice {
        match *self {
            Self::Discrete { scheme, .. }
            | Self::OhmicExp { scheme, .. }
            | Self::OhmicAlg { scheme, .. }
            | Self::Brownian { scheme, .. } => scheme,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    #[default]
    KeZhao,
    SongShi,
    DiosiStrunz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    #[default]
    Auto,
    ForceExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationKind {
    #[default]
    Hypercube,
    Triangular,
}

/// A single cap for every basis function or one per function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Caps {
    Uniform(usize),
    PerMode(Vec<usize>),
}

impl Default for Caps {
    fn default() -> Self {
        Caps::Uniform(3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BasisBlock {
    #[serde(default)]
    pub choice: BasisKind,
    #[serde(default)]
    pub n_max: Caps,
    #[serde(default)]
    pub truncation: TruncationKind,
    /// Total-occupation level for triangular truncation; defaults to the
    /// largest cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseBlock {
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
}

fn default_modes() -> usize {
    DEFAULT_MODES
}

impl Default for NoiseBlock {
    fn default() -> Self {
        Self {
            modes: DEFAULT_MODES,
            omega_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulationKind {
    #[default]
    ExtendedRescaled,
    ExtendedUnscaled,
    ExponentialRescaledD,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "one")]
    pub output_stride: usize,
    pub n_traj: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub formulation: FormulationKind,
    /// Worker threads; 0 lets the pool pick.
    #[serde(default)]
    pub threads: usize,
}

fn default_dt() -> f64 {
    nmsse::hierarchy::DEFAULT_DT
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: default_formats(),
        }
    }
}

/// Everything a run needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct Setup {
    pub model: SystemModel,
    pub bath: BathSpec,
    pub basis: BasisSet,
    pub space: FockSpace,
    pub hierarchy: Hierarchy,
    pub grid: TimeGrid,
    pub noise: Arc<FrequencyGrid>,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    /// Parses TOML, or JSON when the text starts with `{`. A JSON document
    /// holding a `config` object (as `meta.json` does) yields that object.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = if text.trim_start().starts_with('{') {
            let value: serde_json::Value =
                serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
            let inner = match value.get("config") {
                Some(c) if value.get("system").is_none() => c.clone(),
                _ => value,
            };
            serde_json::from_value(inner).map_err(|e| schema(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| schema(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| schema(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Range checks that serde cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(schema(format!("{name} must be finite")))
            }
        };
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(schema(format!("{name} must be positive, got {v}")))
            }
        };
        let non_negative = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(schema(format!("{name} must be non-negative, got {v}")))
            }
        };
        match &self.system {
            SystemBlock::Sbm { epsilon, delta } => {
                finite("system.epsilon", *epsilon)?;
                finite("system.delta", *delta)?;
            }
            SystemBlock::Transfer {
                donor,
                acceptor,
                reorganization,
                hopping,
                ..
            } => {
                finite("system.donor", *donor)?;
                finite("system.acceptor", *acceptor)?;
                non_negative("system.reorganization", *reorganization)?;
                finite("system.hopping", *hopping)?;
            }
        }
        positive("bath.beta", self.bath.beta())?;
        match &self.bath {
            BathBlock::Discrete { modes, .. } => {
                if modes.is_empty() {
                    return Err(schema("bath.modes must list at least one mode"));
                }
                for m in modes {
                    non_negative("bath.modes.coupling", m.coupling)?;
                    positive("bath.modes.frequency", m.frequency)?;
                }
            }
            BathBlock::OhmicExp { alpha, cutoff, .. } | BathBlock::OhmicAlg { alpha, cutoff, .. } => {
                non_negative("bath.alpha", *alpha)?;
                positive("bath.cutoff", *cutoff)?;
            }
            BathBlock::Brownian {
                reorganization,
                frequency,
                damping,
                ..
            } => {
                non_negative("bath.reorganization", *reorganization)?;
                positive("bath.frequency", *frequency)?;
                positive("bath.damping", *damping)?;
            }
        }
        match &self.basis.n_max {
            Caps::Uniform(_) => {}
            Caps::PerMode(v) if v.is_empty() => return Err(schema("basis.n_max list is empty")),
            Caps::PerMode(_) => {}
        }
        if self.basis.level.is_some() && self.basis.truncation != TruncationKind::Triangular {
            return Err(schema("basis.level needs truncation = \"triangular\""));
        }
        if self.noise.modes == 0 {
            return Err(schema("noise.modes must be at least 1"));
        }
        if let Some(w) = self.noise.omega_max {
            positive("noise.omega_max", w)?;
        }
        positive("run.dt", self.run.dt)?;
        non_negative("run.t_final", self.run.t_final)?;
        if self.run.output_stride == 0 {
            return Err(schema("run.output_stride must be at least 1"));
        }
        if self.run.n_traj == 0 {
            return Err(schema("run.n_traj must be at least 1"));
        }
        TimeGrid::new(self.run.dt, self.run.t_final, self.run.output_stride)
            .map_err(|e| schema(e.to_string()))?;
        Ok(())
    }

    pub fn model(&self) -> SystemModel {
        match self.system {
            SystemBlock::Sbm { epsilon, delta } => SystemModel::spin_boson(epsilon, delta),
            SystemBlock::Transfer {
                donor,
                acceptor,
                reorganization,
                hopping,
                coupling,
            } => {
                let coupling = match coupling {
                    CouplingChoice::Acceptor => TransferCoupling::Acceptor,
                    CouplingChoice::SigmaZ => TransferCoupling::SigmaZ,
                    CouplingChoice::NegAcceptor => TransferCoupling::NegAcceptor,
                };
                SystemModel::transfer(donor, acceptor, reorganization, hopping, coupling)
            }
        }
    }

    pub fn spectral_density(&self) -> SpectralDensity {
        match &self.bath {
            BathBlock::Discrete { modes, .. } => SpectralDensity::Discrete {
                modes: modes
                    .iter()
                    .map(|m| DiscreteMode::new(m.coupling, m.frequency))
                    .collect(),
            },
            &BathBlock::OhmicExp { alpha, cutoff, .. } => SpectralDensity::OhmicExp { alpha, cutoff },
            &BathBlock::OhmicAlg { alpha, cutoff, .. } => SpectralDensity::OhmicAlg { alpha, cutoff },
            &BathBlock::Brownian {
                reorganization,
                frequency,
                damping,
                ..
            } => SpectralDensity::Brownian {
                reorganization,
                frequency,
                damping,
            },
        }
    }

    pub fn bath_spec(&self) -> nmsse::Result<BathSpec> {
        let scheme = match self.bath.scheme() {
            SchemeChoice::KeZhao => AbcfScheme::KeZhao,
            SchemeChoice::SongShi => AbcfScheme::SongShi,
            SchemeChoice::DiosiStrunz => AbcfScheme::DiosiStrunz,
        };
        BathSpec::with_scheme(self.spectral_density(), self.bath.beta(), scheme)
    }

    pub fn basis_choice(&self) -> BasisChoice {
        match self.basis.choice {
            BasisKind::Auto => BasisChoice::Auto,
            BasisKind::ForceExponential => BasisChoice::ForceExponential,
        }
    }

    pub fn formulation(&self) -> Formulation {
        match self.run.formulation {
            FormulationKind::ExtendedRescaled => Formulation::ExtendedRescaled,
            FormulationKind::ExtendedUnscaled => Formulation::ExtendedUnscaled,
            FormulationKind::ExponentialRescaledD => Formulation::ExponentialRescaledD,
        }
    }

    pub fn time_grid(&self) -> nmsse::Result<TimeGrid> {
        TimeGrid::new(self.run.dt, self.run.t_final, self.run.output_stride)
    }

    /// Discrete baths are sampled exactly at their own frequencies.
    pub fn frequency_grid(&self) -> FrequencyGrid {
        let sd = self.spectral_density();
        let modes = if sd.is_discrete() { 0 } else { self.noise.modes };
        let omega_max = self.noise.omega_max.unwrap_or_else(|| default_omega_max(&sd));
        discretize(&sd, modes, omega_max)
    }

    pub fn fock_space(&self, basis_len: usize) -> Result<FockSpace, CliError> {
        let caps = match &self.basis.n_max {
            Caps::Uniform(n) => vec![*n; basis_len],
            Caps::PerMode(v) if v.len() == basis_len => v.clone(),
            Caps::PerMode(v) => {
                return Err(schema(format!(
                    "basis.n_max lists {} caps but the basis has {basis_len} functions",
                    v.len()
                )))
            }
        };
        let truncation = match self.basis.truncation {
            TruncationKind::Hypercube => Truncation::Hypercube,
            TruncationKind::Triangular => Truncation::Triangular(
                self.basis
                    .level
                    .unwrap_or_else(|| caps.iter().copied().max().unwrap_or(0)),
            ),
        };
        Ok(FockSpace::new(caps, truncation)?)
    }

    pub fn setup(&self) -> Result<Setup, CliError> {
        let model = self.model();
        let bath = self.bath_spec()?;
        let basis = BasisSet::build(&bath, self.basis_choice())?;
        let space = self.fock_space(basis.len())?;
        let hierarchy = Hierarchy::new(&model, &basis, &space, self.formulation())?;
        let grid = self.time_grid()?;
        let noise = Arc::new(self.frequency_grid());
        Ok(Setup {
            model,
            bath,
            basis,
            space,
            hierarchy,
            grid,
            noise,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = r#"
[system]
type = "sbm"
epsilon = 0.0
delta = 0.5

[bath]
type = "discrete"
modes = [{ coupling = 0.2, frequency = 1.0 }]
beta = 1.0

[basis]
n_max = 3

[run]
dt = 0.01
t_final = 10.0
output_stride = 10
n_traj = 100
master_seed = 7
"#;

    #[test]
    fn parses_and_builds() {
        let cfg = RunConfig::parse(FIG1).unwrap();
        let s = cfg.setup().unwrap();
        assert_eq!(s.basis.len(), 2);
        assert_eq!(s.space.len(), 16);
        assert_eq!(s.grid.outputs(), 101);
        assert_eq!(s.noise.len(), 1);
    }

    #[test]
    fn json_echo_round_trips() {
        let cfg = RunConfig::parse(FIG1).unwrap();
        let meta = serde_json::json!({ "config": cfg, "master_seed": 7 });
        let back = RunConfig::parse(&meta.to_string()).unwrap();
        assert_eq!(back, cfg);
        let toml_back: RunConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(toml_back, cfg);
    }

    #[test]
    fn rejects_unknown_keys() {
        for (from, to) in [
            ("delta = 0.5", "delta = 0.5\ngamma = 1.0"),
            ("beta = 1.0", "beta = 1.0\ntemperature = 1.0"),
            ("n_max = 3", "n_max = 3\ncap = 2"),
            ("[run]", "[run]\nsteps = 3"),
            ("[run]", "[extra]\nx = 1\n[run]"),
        ] {
            let text = FIG1.replacen(from, to, 1);
            assert!(
                matches!(RunConfig::parse(&text), Err(CliError::Config(_))),
                "accepted: {to}"
            );
        }
    }

    #[test]
    fn rejects_bad_values() {
        for (from, to) in [
            ("beta = 1.0", "beta = -1.0"),
            ("n_traj = 100", "n_traj = 0"),
            ("dt = 0.01", "dt = 0.03"),
            ("frequency = 1.0", "frequency = 0.0"),
            ("output_stride = 10", "output_stride = 7"),
            ("n_max = 3", "n_max = []"),
        ] {
            let text = FIG1.replacen(from, to, 1);
            assert!(RunConfig::parse(&text).is_err(), "accepted: {to}");
        }
    }

    #[test]
    fn per_mode_caps_must_match_basis() {
        let cfg = RunConfig::parse(&FIG1.replacen("n_max = 3", "n_max = [3, 4]", 1)).unwrap();
        assert_eq!(cfg.setup().unwrap().space.len(), 20);
        let bad = RunConfig::parse(&FIG1.replacen("n_max = 3", "n_max = [3]", 1)).unwrap();
        assert!(matches!(bad.setup(), Err(CliError::Config(_))));
    }

    #[test]
    fn triangular_level_defaults_to_largest_cap() {
        let text = FIG1.replacen("n_max = 3", "n_max = 3\ntruncation = \"triangular\"", 1);
        let s = RunConfig::parse(&text).unwrap().setup().unwrap();
        assert_eq!(s.space.truncation(), Truncation::Triangular(3));
        assert_eq!(s.space.len(), 10);
    }
}
