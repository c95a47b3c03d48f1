//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use serde::Deserialize;
use staticgate::bath::FieldStatistics;
use staticgate::dynamics::{CouplingMode, FieldSource, RelaxationSchedule, TemperatureSchedule};
use staticgate::hamiltonians::CouplingConstants;
use staticgate::projection::Engine;
use staticgate::Representation;

use crate::CliError;

/// Parses the `--rep` spellings.
pub fn parse_representation(s: &str) -> Result<Representation, String> {
    match s {
        "spin1" => Ok(Representation::Spin1Triode),
        "spin1+idlers" => Ok(Representation::Spin1TriodeWithIdlers),
        "pair" => Ok(Representation::PairHalf),
        "pair+idlers" => Ok(Representation::PairHalfWithIdlers),
        other => Err(format!("unknown representation `{other}` (expected spin1, pair or pair+idlers)")),
    }
}

fn representation<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Representation, D::Error> {
    let s = String::deserialize(d)?;
    parse_representation(&s).map_err(serde::de::Error::custom)
}

fn default_representation() -> Representation {
    Representation::PairHalf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Equal mixture of all basis states with every triode satisfied.
    #[default]
    TripletUniform,
    /// Equal mixture of the frustrated basis states.
    FrustratedUniform,
    /// Random pure state in the triplet sector.
    RandomTriplet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Fields {
    #[default]
    Sampled,
    Equal,
    Zero,
}

impl From<Fields> for FieldSource {
    fn from(f: Fields) -> Self {
        match f {
            Fields::Sampled => FieldSource::Sampled,
            Fields::Equal => FieldSource::Equal,
            Fields::Zero => FieldSource::Zero,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Couplings {
    pub g: f64,
    #[serde(default)]
    pub g_prime: f64,
    /// Singlet penalty `J`.
    #[serde(default)]
    pub j: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bath {
    pub sigma_b: f64,
    pub t_c: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    #[serde(default)]
    pub t_start: f64,
    /// Total run time `Delta T`.
    pub duration: f64,
    pub dt: f64,
    /// Slice length `Delta t`; samples are written at slice boundaries.
    pub slice: f64,
    #[serde(default = "one")]
    pub trajectories: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Temperature {
    pub theta0: f64,
    /// Factor per `t_unit`; 1 keeps the temperature constant.
    #[serde(default = "unit")]
    pub decay: f64,
    #[serde(default = "unit")]
    pub t_unit: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measurement {
    pub samples: usize,
}

impl Default for Measurement {
    fn default() -> Self {
        Self { samples: 200 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub network: PathBuf,
    #[serde(default = "default_representation", deserialize_with = "representation")]
    pub representation: Representation,
    pub engine: Engine,
    /// Coupling used by `relax`.
    #[serde(default = "symmetric")]
    pub mode: CouplingMode,
    #[serde(default)]
    pub fields: Fields,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub verbosity: u8,
    pub couplings: Couplings,
    pub bath: Bath,
    pub schedule: Schedule,
    pub temperature: Temperature,
    #[serde(default)]
    pub measurement: Measurement,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base: PathBuf,
}

fn symmetric() -> CouplingMode {
    CouplingMode::Symmetric
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.constants()?;
        self.schedule()?;
        if self.representation != Representation::PairHalf {
            return Err(CliError::Config(format!(
                "dynamics run on the pair representation, got `{}`",
                self.representation
            )));
        }
        Ok(())
    }

    pub fn network_path(&self) -> PathBuf {
        self.base.join(&self.network)
    }

    pub fn constants(&self) -> Result<CouplingConstants, CliError> {
        CouplingConstants::new(self.couplings.g, self.couplings.g_prime, self.couplings.j)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn schedule(&self) -> Result<RelaxationSchedule, CliError> {
        let temperature = if self.temperature.decay == 1.0 {
            TemperatureSchedule::Constant { theta: self.temperature.theta0 }
        } else {
            TemperatureSchedule::Geometric {
                theta0: self.temperature.theta0,
                decay: self.temperature.decay,
                t_unit: self.temperature.t_unit,
            }
        };
        let s = RelaxationSchedule {
            t_start: self.schedule.t_start,
            t_end: self.schedule.t_start + self.schedule.duration,
            dt: self.schedule.dt,
            slice: self.schedule.slice,
            temperature,
            fields: FieldStatistics { sigma_b: self.bath.sigma_b, t_c: self.bath.t_c },
            trajectories: self.schedule.trajectories,
        };
        s.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 3
network = "net.json"
engine = "dissipative"

[couplings]
g = 1.0

[bath]
sigma_b = 1.0
t_c = 0.5

[schedule]
duration = 10.0
dt = 0.05
slice = 0.5

[temperature]
theta0 = 2.0
decay = 0.5
"#;

    #[test]
    fn minimal_config() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.representation, Representation::PairHalf);
        assert_eq!(c.measurement.samples, 200);
        let s = c.schedule().unwrap();
        assert_eq!(s.t_end, 10.0);
        assert!(matches!(s.temperature, TemperatureSchedule::Geometric { .. }));
    }

    #[test]
    fn seed_is_mandatory() {
        let text = MINIMAL.replace("seed = 3\n", "");
        assert!(matches!(ExperimentConfig::parse(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::parse(&MINIMAL.replace("g = 1.0", "g = -1.0")).is_err());
        assert!(ExperimentConfig::parse(&MINIMAL.replace("dt = 0.05", "dt = 1.0")).is_err());
        assert!(ExperimentConfig::parse(&MINIMAL.replace("decay = 0.5", "decay = 1.5")).is_err());
        assert!(ExperimentConfig::parse(&MINIMAL.replace("engine = \"dissipative\"", "engine = \"magic\"")).is_err());
        assert!(ExperimentConfig::parse(&format!("{MINIMAL}\nextra = 1\n")).is_err());
        let spin1 = MINIMAL.replace("engine =", "representation = \"spin1\"\nengine =");
        assert!(ExperimentConfig::parse(&spin1).is_err());
    }

    #[test]
    fn representation_spellings() {
        assert_eq!(parse_representation("pair+idlers").unwrap(), Representation::PairHalfWithIdlers);
        assert!(parse_representation("triplet").is_err());
    }
}
