//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Keys starting with `manifest.`
//! are skipped so a run manifest can be fed back in as a config file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use tsc_core::agent::{AgentKind, ControllerKind, EpsilonSchedule, TrainingConfig};
use tsc_core::encoding::{EncodingWeights, CELLS, COLS};
use tsc_core::traffic::ScenarioName;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{at}: expected `key = value`, found {text:?}")]
    Malformed { at: String, text: String },
    #[error("{at}: unknown key `{key}`")]
    UnknownKey { at: String, key: String },
    #[error("{at}: bad value for `{key}`: {reason}")]
    InvalidValue { at: String, key: String, reason: String },
    #[error("{at}: `{key}` out of range: {reason}")]
    OutOfRange { at: String, key: String, reason: String },
    #[error("{at}: inconsistent settings: {reason}")]
    Inconsistent { at: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Which scenarios a command covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioChoice {
    One(ScenarioName),
    All,
}

impl ScenarioChoice {
    pub fn parse(s: &str) -> Option<Self> {
        if s == "all" {
            Some(ScenarioChoice::All)
        } else {
            ScenarioName::parse(s).map(ScenarioChoice::One)
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioChoice::All => "all",
            ScenarioChoice::One(s) => s.name(),
        }
    }

    pub fn scenarios(self) -> Vec<ScenarioName> {
        match self {
            ScenarioChoice::All => ScenarioName::ALL.to_vec(),
            ScenarioChoice::One(s) => vec![s],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub controller: ControllerKind,
    pub scenario: ScenarioChoice,
    /// Learning and simulation knobs. Its `agent` field follows `controller`
    /// whenever that names a learning agent.
    pub training: TrainingConfig,
    pub eval_episodes: usize,
    pub eval_seed: u64,
    pub model: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            controller: ControllerKind::Time,
            scenario: ScenarioChoice::All,
            training: TrainingConfig::new(AgentKind::Time),
            eval_episodes: 5,
            eval_seed: 1000,
            model: None,
            out: PathBuf::from("out"),
        }
    }
}

enum SetError {
    Invalid(String),
    Range(String),
}

type Setter = fn(&mut RunConfig, &str) -> Result<(), SetError>;
type Getter = fn(&RunConfig) -> String;

fn num<T: std::str::FromStr>(v: &str) -> Result<T, SetError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| SetError::Invalid(e.to_string()))
}

fn finite(v: &str) -> Result<f64, SetError> {
    let x: f64 = num(v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(SetError::Invalid(format!("{v} is not a finite number")))
    }
}

fn range(x: f64, lo: f64, hi: f64) -> Result<f64, SetError> {
    if (lo..=hi).contains(&x) {
        Ok(x)
    } else {
        Err(SetError::Range(format!("{x} not in [{lo}, {hi}]")))
    }
}

fn positive(x: f64) -> Result<f64, SetError> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(SetError::Range(format!("{x} must be > 0")))
    }
}

fn at_least_one(n: usize) -> Result<usize, SetError> {
    if n >= 1 {
        Ok(n)
    } else {
        Err(SetError::Range("must be at least 1".into()))
    }
}

fn list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>, SetError>
where
    T::Err: std::fmt::Display,
{
    v.split(',').map(|x| num(x.trim())).collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Every accepted key with its setter and its canonical rendering.
const KEYS: &[(&str, Setter, Getter)] = &[
    (
        "agent",
        |c, v| {
            c.controller = ControllerKind::parse(v)
                .ok_or_else(|| SetError::Invalid("expected turn, time or fixed".into()))?;
            Ok(())
        },
        |c| c.controller.name().into(),
    ),
    (
        "scenario",
        |c, v| {
            c.scenario = ScenarioChoice::parse(v)
                .ok_or_else(|| SetError::Invalid("expected low, high, ew, ns or all".into()))?;
            Ok(())
        },
        |c| c.scenario.name().into(),
    ),
    (
        "episodes",
        |c, v| {
            c.training.episodes = num(v)?;
            Ok(())
        },
        |c| c.training.episodes.to_string(),
    ),
    (
        "episode_length",
        |c, v| {
            c.training.episode_length = positive(finite(v)?)?;
            Ok(())
        },
        |c| c.training.episode_length.to_string(),
    ),
    (
        "gamma",
        |c, v| {
            c.training.gamma = range(finite(v)?, 0.0, 1.0)?;
            Ok(())
        },
        |c| c.training.gamma.to_string(),
    ),
    (
        "reward_scale",
        |c, v| {
            c.training.reward_scale = positive(finite(v)?)?;
            Ok(())
        },
        |c| c.training.reward_scale.to_string(),
    ),
    (
        "lr",
        |c, v| {
            c.training.adam.lr = positive(finite(v)?)?;
            Ok(())
        },
        |c| c.training.adam.lr.to_string(),
    ),
    (
        "batch",
        |c, v| {
            c.training.batch = at_least_one(num(v)?)?;
            Ok(())
        },
        |c| c.training.batch.to_string(),
    ),
    (
        "buffer_capacity",
        |c, v| {
            c.training.buffer_capacity = at_least_one(num(v)?)?;
            Ok(())
        },
        |c| c.training.buffer_capacity.to_string(),
    ),
    (
        "green",
        |c, v| {
            c.training.program.green = whole_seconds(finite(v)?)?;
            Ok(())
        },
        |c| c.training.program.green.to_string(),
    ),
    (
        "yellow",
        |c, v| {
            c.training.program.yellow = whole_seconds(finite(v)?)?;
            Ok(())
        },
        |c| c.training.program.yellow.to_string(),
    ),
    (
        "epsilon_hold",
        |c, v| {
            c.training.epsilon.hold_until = range(finite(v)?, 0.0, f64::MAX)?;
            Ok(())
        },
        |c| c.training.epsilon.hold_until.to_string(),
    ),
    (
        "epsilon_fast",
        |c, v| {
            c.training.epsilon.fast_until = range(finite(v)?, 0.0, f64::MAX)?;
            Ok(())
        },
        |c| c.training.epsilon.fast_until.to_string(),
    ),
    (
        "epsilon_end",
        |c, v| {
            c.training.epsilon.end = range(finite(v)?, 0.0, f64::MAX)?;
            Ok(())
        },
        |c| c.training.epsilon.end.to_string(),
    ),
    (
        "seed",
        |c, v| {
            c.training.seed = num(v)?;
            Ok(())
        },
        |c| c.training.seed.to_string(),
    ),
    (
        "eval_episodes",
        |c, v| {
            c.eval_episodes = at_least_one(num(v)?)?;
            Ok(())
        },
        |c| c.eval_episodes.to_string(),
    ),
    (
        "eval_seed",
        |c, v| {
            c.eval_seed = num(v)?;
            Ok(())
        },
        |c| c.eval_seed.to_string(),
    ),
    (
        "hidden",
        |c, v| {
            let h: Vec<usize> = list(v)?;
            if h.contains(&0) {
                return Err(SetError::Range("hidden widths must be positive".into()));
            }
            c.training.hidden = h;
            Ok(())
        },
        |c| join(&c.training.hidden),
    ),
    (
        "volume_low",
        |c, v| {
            c.training.volumes.low = num(v)?;
            Ok(())
        },
        |c| c.training.volumes.low.to_string(),
    ),
    (
        "volume_high",
        |c, v| {
            c.training.volumes.high = num(v)?;
            Ok(())
        },
        |c| c.training.volumes.high.to_string(),
    ),
    (
        "volume_ew",
        |c, v| {
            c.training.volumes.east_west = num(v)?;
            Ok(())
        },
        |c| c.training.volumes.east_west.to_string(),
    ),
    (
        "volume_ns",
        |c, v| {
            c.training.volumes.north_south = num(v)?;
            Ok(())
        },
        |c| c.training.volumes.north_south.to_string(),
    ),
    (
        "favored_share",
        |c, v| {
            c.training.favored_share = range(finite(v)?, 0.0, 1.0)?;
            Ok(())
        },
        |c| c.training.favored_share.to_string(),
    ),
    (
        "straight_fraction",
        |c, v| {
            c.training.straight_fraction = range(finite(v)?, 0.0, 1.0)?;
            Ok(())
        },
        |c| c.training.straight_fraction.to_string(),
    ),
    (
        "weibull_shape",
        |c, v| {
            c.training.weibull_shape = positive(finite(v)?)?;
            Ok(())
        },
        |c| c.training.weibull_shape.to_string(),
    ),
    (
        "encoding_weights",
        |c, v| {
            let w: Vec<u32> = list(v)?;
            let weights = match w.len() {
                COLS => EncodingWeights::from_columns(w.try_into().expect("length checked")),
                CELLS => EncodingWeights::from_scan(&w),
                n => {
                    return Err(SetError::Invalid(format!(
                        "need {COLS} column weights or {CELLS} cell weights in scan order, got {n}"
                    )))
                }
            };
            c.training.weights = weights.map_err(|e| SetError::Range(e.to_string()))?;
            Ok(())
        },
        |c| join(&c.training.weights.scan().collect::<Vec<_>>()),
    ),
    (
        "model",
        |c, v| {
            c.model = if v.is_empty() { None } else { Some(PathBuf::from(v)) };
            Ok(())
        },
        |c| c.model.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
    ),
    (
        "out",
        |c, v| {
            c.out = PathBuf::from(v);
            Ok(())
        },
        |c| c.out.display().to_string(),
    ),
];

fn whole_seconds(x: f64) -> Result<f64, SetError> {
    if x >= 1.0 && x.fract() == 0.0 {
        Ok(x)
    } else {
        Err(SetError::Range(format!("{x} must be a whole number of seconds >= 1")))
    }
}

impl RunConfig {
    /// Names of all accepted keys.
    pub fn keys() -> impl Iterator<Item = &'static str> {
        KEYS.iter().map(|k| k.0)
    }

    /// Sets one key; `at` names the source for error messages.
    pub fn set(&mut self, key: &str, value: &str, at: &str) -> Result<(), ConfigError> {
        let Some((_, setter, _)) = KEYS.iter().find(|k| k.0 == key) else {
            return Err(ConfigError::UnknownKey {
                at: at.into(),
                key: key.into(),
            });
        };
        setter(self, value).map_err(|e| match e {
            SetError::Invalid(reason) => ConfigError::InvalidValue {
                at: at.into(),
                key: key.into(),
                reason,
            },
            SetError::Range(reason) => ConfigError::OutOfRange {
                at: at.into(),
                key: key.into(),
                reason,
            },
        })
    }

    pub fn get(&self, key: &str) -> Option<String> {
        KEYS.iter().find(|k| k.0 == key).map(|k| (k.2)(self))
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_str(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let at = format!("{origin} line {}", i + 1);
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed {
                    at,
                    text: raw.into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Malformed {
                    at,
                    text: raw.into(),
                });
            }
            if key.starts_with("manifest.") {
                continue;
            }
            self.set(key, value, &at)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        self.apply_str(&text, &path.display().to_string())
    }

    /// Checks cross-field constraints and syncs the training agent kind.
    pub fn finish(&mut self) -> Result<(), ConfigError> {
        if let Some(kind) = self.agent_kind() {
            self.training.agent = kind;
        }
        self.training
            .validate()
            .map_err(|e| ConfigError::Inconsistent {
                at: "config".into(),
                reason: e.to_string(),
            })
    }

    pub fn agent_kind(&self) -> Option<AgentKind> {
        match self.controller {
            ControllerKind::Fixed => None,
            ControllerKind::Turn => Some(AgentKind::Turn),
            ControllerKind::Time => Some(AgentKind::Time),
        }
    }

    /// Canonical `key = value` rendering of every setting.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (key, _, get) in KEYS {
            let _ = writeln!(s, "{key} = {}", get(self));
        }
        s
    }

    /// Epsilon breakpoints stretched to the configured episode count.
    pub fn scale_epsilon(&mut self) {
        self.training.epsilon = EpsilonSchedule::scaled_to(self.training.episodes);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_render_and_reparse() {
        let c = RunConfig::default();
        let mut d = RunConfig::default();
        d.training.gamma = 0.3;
        d.apply_str(&c.to_text(), "dump").unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn comments_blank_lines_and_manifest_keys() {
        let mut c = RunConfig::default();
        c.apply_str(
            "# header\n\n episodes = 12 # trailing\nmanifest.weights_sha256 = abc\n",
            "t",
        )
        .unwrap();
        assert_eq!(c.training.episodes, 12);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let mut c = RunConfig::default();
        let e = c.apply_str("episodes = 3\nnonsense\n", "f").unwrap_err();
        assert!(matches!(e, ConfigError::Malformed { ref at, .. } if at == "f line 2"));
        let e = c.apply_str("\n\ncolour = red", "f").unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey { ref at, .. } if at == "f line 3"));
        let e = c.apply_str("batch = many", "f").unwrap_err();
        assert!(matches!(e, ConfigError::InvalidValue { .. }));
        let e = c.apply_str("gamma = 1.5", "f").unwrap_err();
        assert!(matches!(e, ConfigError::OutOfRange { ref key, .. } if key == "gamma"));
    }
}
