//! TOML run configuration.
//!
//! A treatment is either a named preset or an inline `[treatment]` table:
//!
//! ```toml
//! preset = "3-partial"
//!
//! [treatment]
//! num_rounds = 3
//! protocol = "partial"
//! defaults = [0.0, 0.0, 0.0]
//! prize_points = 240
//! shrink_factor = 1.0
//! recognition = "iid_uniform"   # or ["A", "B", "C"]
//! ```
//!
//! Decimal values may also be written as strings such as `"1/20"`, which are
//! read exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{BeliefFamily, GridSpec, ThresholdBelief};
use crate::game::{GameError, GameSpec, InfoProtocol, Player, RecognitionModel};
use crate::presets;
use crate::rational::{self, Q};
use crate::sim::{Agents, LogitModel, ProposerAgent, VoterAgent};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("unknown coefficient column {0}")]
    UnknownColumn(usize),
    #[error("invalid value for {key}: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("no treatment given: pass a preset or a [treatment] table")]
    MissingTreatment,
    #[error(transparent)]
    Game(#[from] GameError),
}

/// A number given either as a float literal or as an exact decimal or
/// fraction string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn to_exact(&self, key: &str) -> Result<Q, ConfigError> {
        let parsed = match self {
            Number::Float(x) => rational::from_f64_decimal(*x),
            Number::Text(s) => rational::parse_decimal(s),
        };
        parsed.ok_or_else(|| ConfigError::InvalidValue { key: key.into(), reason: format!("{self:?} is not a number") })
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Number::Float(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecognitionConfig {
    Named(String),
    Order(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreatmentConfig {
    #[serde(default)]
    pub id: Option<String>,
    pub num_rounds: usize,
    pub protocol: String,
    pub defaults: [Number; 3],
    #[serde(default = "default_prize")]
    pub prize_points: u32,
    #[serde(default = "default_shrink")]
    pub shrink_factor: Number,
    #[serde(default = "default_recognition")]
    pub recognition: RecognitionConfig,
}

fn default_prize() -> u32 {
    240
}

fn default_shrink() -> Number {
    Number::Float(1.0)
}

fn default_recognition() -> RecognitionConfig {
    RecognitionConfig::Named("iid_uniform".into())
}

impl TreatmentConfig {
    pub fn to_spec(&self) -> Result<GameSpec, ConfigError> {
        let protocol = InfoProtocol::parse(&self.protocol).ok_or_else(|| ConfigError::InvalidValue {
            key: "protocol".into(),
            reason: format!("{:?} is not one of perfect, partial, none", self.protocol),
        })?;
        let defaults = [
            self.defaults[0].to_exact("defaults")?,
            self.defaults[1].to_exact("defaults")?,
            self.defaults[2].to_exact("defaults")?,
        ];
        let recognition = match &self.recognition {
            RecognitionConfig::Named(s) if s == "iid_uniform" => RecognitionModel::IidUniform,
            RecognitionConfig::Named(s) => {
                return Err(ConfigError::InvalidValue {
                    key: "recognition".into(),
                    reason: format!("{s:?} is neither \"iid_uniform\" nor a list of players"),
                })
            }
            RecognitionConfig::Order(names) => RecognitionModel::FixedOrder(
                names
                    .iter()
                    .map(|n| {
                        Player::parse(n).ok_or_else(|| ConfigError::InvalidValue {
                            key: "recognition".into(),
                            reason: format!("{n:?} is not a player"),
                        })
                    })
                    .collect::<Result<_, _>>()?,
            ),
        };
        let id = self.id.clone().unwrap_or_else(|| "custom".into());
        let spec = GameSpec::new(id, self.num_rounds, protocol, defaults)
            .with_prize_points(self.prize_points)
            .with_shrink_factor(self.shrink_factor.to_exact("shrink_factor")?)
            .with_recognition(recognition);
        Ok(spec.validate()?)
    }

    pub fn from_spec(spec: &GameSpec) -> TreatmentConfig {
        let num = |x: &Q| Number::Text(rational::display(x));
        let recognition = match &spec.recognition {
            RecognitionModel::FixedOrder(order) => {
                RecognitionConfig::Order(order.iter().map(|p| p.to_string()).collect())
            }
            _ => default_recognition(),
        };
        TreatmentConfig {
            id: Some(spec.id.clone()),
            num_rounds: spec.num_rounds,
            protocol: spec.protocol.to_string(),
            defaults: [num(&spec.defaults[0]), num(&spec.defaults[1]), num(&spec.defaults[2])],
            prize_points: spec.prize_points,
            shrink_factor: num(&spec.shrink_factor),
            recognition,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefConfig {
    #[serde(flatten)]
    pub family: BeliefFamily,
    #[serde(default)]
    pub d: f64,
}

impl BeliefConfig {
    pub fn to_belief(&self) -> Result<ThresholdBelief, ConfigError> {
        ThresholdBelief::new(self.family.clone(), self.d)
            .map_err(|e| ConfigError::InvalidValue { key: "belief".into(), reason: e.to_string() })
    }
}

/// Acceptance-logit coefficients, inline or by published column number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LogitConfig {
    Column { column: usize },
    Inline(LogitModel),
}

impl LogitConfig {
    pub fn model(&self) -> Result<LogitModel, ConfigError> {
        match self {
            LogitConfig::Column { column } => {
                presets::logit_column(*column).map(|c| c.model).ok_or(ConfigError::UnknownColumn(*column))
            }
            LogitConfig::Inline(model) => Ok(*model),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProposerConfig {
    Equilibrium,
    /// Plays the optimum against the run's `[belief]`.
    BeliefOpt,
    Fixed {
        role_shares: [f64; 3],
    },
    EgalitarianMwc,
    EgalitarianGc,
    Dictatorial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VoterConfig {
    Equilibrium,
    /// Thresholds drawn from the run's `[belief]`.
    Threshold {
        #[serde(default)]
        redraw_each_round: bool,
    },
    /// Votes from the run's `[logit]` coefficients.
    Logit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub proposer: ProposerConfig,
    pub voter: VoterConfig,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig { proposer: ProposerConfig::Equilibrium, voter: VoterConfig::Equilibrium }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub treatment: Option<TreatmentConfig>,
    pub belief: Option<BeliefConfig>,
    pub agents: Option<AgentConfig>,
    pub logit: Option<LogitConfig>,
    /// Mean rejection payoff as a fraction of the prize.
    pub mrp: Option<f64>,
    /// Whether the weak and the strong slot count as strong voters.
    pub strong_flags: Option<[bool; 2]>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub grid_step: Option<f64>,
    pub refine_depth: Option<u32>,
    pub experienced: Option<bool>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), reason: e.to_string() })?;
        RunConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// The inline treatment wins over the preset.
    pub fn spec(&self) -> Result<GameSpec, ConfigError> {
        if let Some(t) = &self.treatment {
            return t.to_spec();
        }
        match &self.preset {
            Some(name) => presets::treatment(name).ok_or_else(|| ConfigError::UnknownPreset(name.clone())),
            None => Err(ConfigError::MissingTreatment),
        }
    }

    pub fn grid(&self) -> GridSpec {
        let mut grid = GridSpec::default();
        if let Some(step) = self.grid_step {
            grid.step = step;
        }
        if let Some(depth) = self.refine_depth {
            grid.refine_depth = depth;
        }
        grid
    }

    pub fn belief(&self) -> Result<ThresholdBelief, ConfigError> {
        match &self.belief {
            Some(b) => b.to_belief(),
            None => Err(ConfigError::InvalidValue { key: "belief".into(), reason: "missing [belief] table".into() }),
        }
    }

    pub fn logit_model(&self) -> Result<LogitModel, ConfigError> {
        match &self.logit {
            Some(l) => l.model(),
            None => Err(ConfigError::InvalidValue { key: "logit".into(), reason: "missing [logit] table".into() }),
        }
    }

    pub fn agents(&self) -> Result<Agents, ConfigError> {
        let cfg = self.agents.clone().unwrap_or_default();
        let proposer = match cfg.proposer {
            ProposerConfig::Equilibrium => ProposerAgent::Equilibrium,
            ProposerConfig::BeliefOpt => ProposerAgent::belief_opt(&self.belief()?, self.grid())
                .map_err(|e| ConfigError::InvalidValue { key: "agents.proposer".into(), reason: e.to_string() })?,
            ProposerConfig::Fixed { role_shares } => ProposerAgent::fixed(role_shares)
                .map_err(|e| ConfigError::InvalidValue { key: "agents.proposer".into(), reason: e.to_string() })?,
            ProposerConfig::EgalitarianMwc => ProposerAgent::egalitarian_mwc(),
            ProposerConfig::EgalitarianGc => ProposerAgent::egalitarian_gc(),
            ProposerConfig::Dictatorial => ProposerAgent::dictatorial(),
        };
        let voter = match cfg.voter {
            VoterConfig::Equilibrium => VoterAgent::Equilibrium,
            VoterConfig::Threshold { redraw_each_round } => {
                VoterAgent::Threshold { belief: self.belief()?.family, redraw_each_round }
            }
            VoterConfig::Logit => VoterAgent::Logit { model: self.logit_model()? },
        };
        Ok(Agents::uniform(proposer, voter))
    }
}
