use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::agent::{AgentConfig, EpsilonSchedule};
use crate::netsim::{ActionSet, ShapingModel, SimConfig};
use crate::predictor::{BiLstmConfig, BoostConfig, HybridConfig};
use crate::rng::derive_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: expected 'key = value'")]
    Malformed { line: usize },
    #[error("line {line}: key '{key}' assigned twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: {key} = {value}: {message}")]
    Invalid { line: usize, key: String, value: String, message: String },
    #[error("{path}: {message}")]
    Unreadable { path: PathBuf, message: String },
}

/// Every tunable of a run. See [`RunConfig::KEYS`] for the file keys.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub trace_seed: u64,
    pub train_seed: u64,
    pub eval_seed: u64,

    pub trace_length: usize,
    pub cap_min: f64,
    pub cap_max: f64,
    pub hold: usize,
    pub efficiency: f64,
    pub noise_max: f64,
    pub actions: Vec<f64>,

    pub window: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub clip_norm: f64,
    pub boost_trees: usize,
    pub shrinkage: f64,
    pub max_depth: usize,
    pub subsample: f64,

    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_decay: f64,
    pub epsilon_floor: f64,
    pub episodes: usize,
    pub episode_len: usize,
    pub bin_width: f64,
    pub agent_tie_tolerance: f64,
    pub suboptimal_fraction: f64,

    pub goal_id_kbps: u64,
    pub goal_ood_kbps: u64,
    /// English source of each goal; when non-empty it must translate to the
    /// matching `goal_*_kbps`.
    pub intent_id: String,
    pub intent_ood: String,
    /// Exemplar corpus file; empty means the bundled corpus.
    pub corpus: String,

    pub eval_steps: usize,
    pub mc_episodes: usize,
    pub mc_episode_len: usize,

    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trace_seed: 1,
            train_seed: 2,
            eval_seed: 3,
            trace_length: 300,
            cap_min: 310.0,
            cap_max: 560.0,
            hold: 5,
            efficiency: 0.97,
            noise_max: 5.0,
            actions: ActionSet::DEFAULT_RATES.to_vec(),
            window: 10,
            hidden: 16,
            epochs: 200,
            learning_rate: 0.01,
            clip_norm: 1.0,
            boost_trees: 50,
            shrinkage: 0.1,
            max_depth: 3,
            subsample: 1.0,
            alpha: 0.1,
            gamma: 0.9,
            epsilon_start: 1.0,
            epsilon_decay: 0.99,
            epsilon_floor: 0.05,
            episodes: 400,
            episode_len: 100,
            bin_width: 50.0,
            agent_tie_tolerance: 0.5,
            suboptimal_fraction: 0.1,
            goal_id_kbps: 300,
            goal_ood_kbps: 450,
            intent_id: "I need at most 300 kbps from gateway to appserver".into(),
            intent_ood: "Limit streaming to 450 kbps".into(),
            corpus: String::new(),
            eval_steps: 148,
            mc_episodes: 100,
            mc_episode_len: 20,
            out_dir: "out".into(),
        }
    }
}

fn parse<V: FromStr>(line: usize, key: &str, value: &str) -> Result<V, ConfigError> {
    value.parse().map_err(|_| ConfigError::Invalid {
        line,
        key: key.into(),
        value: value.into(),
        message: "cannot parse".into(),
    })
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

macro_rules! fields {
    ($m:ident) => {
        $m! {
            trace_seed, train_seed, eval_seed,
            trace_length, cap_min, cap_max, hold, efficiency, noise_max,
            window, hidden, epochs, learning_rate, clip_norm, boost_trees, shrinkage, max_depth, subsample,
            alpha, gamma, epsilon_start, epsilon_decay, epsilon_floor, episodes, episode_len, bin_width,
            agent_tie_tolerance, suboptimal_fraction,
            goal_id_kbps, goal_ood_kbps,
            eval_steps, mc_episodes, mc_episode_len
        }
    };
}

impl RunConfig {
    /// All keys accepted in a config file, in canonical order.
    pub const KEYS: &'static [&'static str] = &[
        "trace_seed", "train_seed", "eval_seed",
        "trace_length", "cap_min", "cap_max", "hold", "efficiency", "noise_max", "actions",
        "window", "hidden", "epochs", "learning_rate", "clip_norm", "boost_trees", "shrinkage", "max_depth", "subsample",
        "alpha", "gamma", "epsilon_start", "epsilon_decay", "epsilon_floor", "episodes", "episode_len", "bin_width",
        "agent_tie_tolerance", "suboptimal_fraction",
        "goal_id_kbps", "goal_ood_kbps", "intent_id", "intent_ood", "corpus",
        "eval_steps", "mc_episodes", "mc_episode_len",
        "out_dir",
    ];

    /// Sets the three seeds from one master seed.
    pub fn with_master_seed(mut self, seed: u64) -> Self {
        self.trace_seed = derive_seed(seed, 1);
        self.train_seed = derive_seed(seed, 2);
        self.eval_seed = derive_seed(seed, 3);
        self
    }

    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        macro_rules! assign {
            ($($f:ident),*) => {
                match key {
                    $(stringify!($f) => self.$f = parse(line, key, value)?,)*
                    "actions" => {
                        self.actions = value
                            .split(',')
                            .map(|v| parse(line, key, v.trim()))
                            .collect::<Result<_, _>>()?
                    }
                    "intent_id" => self.intent_id = value.to_string(),
                    "intent_ood" => self.intent_ood = value.to_string(),
                    "corpus" => self.corpus = value.to_string(),
                    "out_dir" => self.out_dir = value.to_string(),
                    _ => return Err(ConfigError::UnknownKey { line, key: key.into() }),
                }
            };
        }
        fields!(assign);
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        macro_rules! read {
            ($($f:ident),*) => {
                match key {
                    $(stringify!($f) => self.$f.to_string(),)*
                    "actions" => fmt_list(&self.actions),
                    "intent_id" => self.intent_id.clone(),
                    "intent_ood" => self.intent_ood.clone(),
                    "corpus" => self.corpus.clone(),
                    "out_dir" => self.out_dir.clone(),
                    _ => unreachable!("unknown key {key}"),
                }
            };
        }
        fields!(read)
    }

    /// Range checks; the error names the key and (when known) its line.
    pub fn validate_at(&self, line_of: impl Fn(&str) -> usize) -> Result<(), ConfigError> {
        let bad = |key: &str, message: &str| ConfigError::Invalid {
            line: line_of(key),
            key: key.into(),
            value: self.get(key),
            message: message.into(),
        };
        let unit_open = |v: f64| v > 0.0 && v <= 1.0;
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let checks: [(&str, bool, &str); 32] = [
            ("trace_length", self.trace_length >= 1, "must be at least 1"),
            ("cap_min", self.cap_min.is_finite() && self.cap_min >= 0.0, "must be non-negative"),
            ("cap_max", self.cap_max.is_finite() && self.cap_max > 0.0 && self.cap_max >= self.cap_min, "must be positive and >= cap_min"),
            ("hold", self.hold >= 1, "must be at least 1"),
            ("efficiency", unit_open(self.efficiency), "must lie in (0, 1]"),
            ("noise_max", self.noise_max.is_finite() && self.noise_max >= 0.0, "must be non-negative"),
            ("actions", !self.actions.is_empty() && self.actions.iter().all(|r| r.is_finite() && *r > 0.0), "needs positive rates"),
            ("window", self.window >= 1 && self.window < self.trace_length, "must lie in [1, trace_length)"),
            ("hidden", self.hidden >= 1, "must be at least 1"),
            ("epochs", self.epochs >= 1, "must be at least 1"),
            ("learning_rate", self.learning_rate.is_finite() && self.learning_rate > 0.0, "must be positive"),
            ("clip_norm", self.clip_norm.is_finite() && self.clip_norm >= 0.0, "must be non-negative"),
            ("boost_trees", true, ""),
            ("shrinkage", unit_open(self.shrinkage), "must lie in (0, 1]"),
            ("max_depth", self.max_depth <= 16, "must be at most 16"),
            ("subsample", unit_open(self.subsample), "must lie in (0, 1]"),
            ("alpha", unit_open(self.alpha), "must lie in (0, 1]"),
            ("gamma", (0.0..1.0).contains(&self.gamma), "must lie in [0, 1)"),
            ("epsilon_start", unit(self.epsilon_start), "must lie in [0, 1]"),
            ("epsilon_decay", unit(self.epsilon_decay), "must lie in [0, 1]"),
            ("epsilon_floor", unit(self.epsilon_floor), "must lie in [0, 1]"),
            ("episodes", self.episodes >= 1, "must be at least 1"),
            ("episode_len", self.episode_len >= 1, "must be at least 1"),
            ("bin_width", self.bin_width.is_finite() && self.bin_width > 0.0, "must be positive"),
            ("agent_tie_tolerance", unit(self.agent_tie_tolerance), "must lie in [0, 1]"),
            ("suboptimal_fraction", unit_open(self.suboptimal_fraction), "must lie in (0, 1]"),
            ("goal_id_kbps", self.goal_id_kbps >= 1, "must be at least 1"),
            ("goal_ood_kbps", self.goal_ood_kbps >= 1, "must be at least 1"),
            ("eval_steps", self.eval_steps >= 1, "must be at least 1"),
            ("mc_episodes", self.mc_episodes >= 2, "must be at least 2"),
            ("mc_episode_len", self.mc_episode_len >= 1, "must be at least 1"),
            ("out_dir", !self.out_dir.is_empty(), "must not be empty"),
        ];
        for (key, ok, message) in checks {
            if !ok {
                return Err(bad(key, message));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_at(|_| 0)
    }

    /// Parses `key = value` lines. Blank lines and `#` comments (whole-line,
    /// or after whitespace) are ignored; absent keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<(String, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find(" #").or_else(|| raw.find("\t#")) {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Malformed { line: line_no })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|(k, _)| k == key) {
                return Err(ConfigError::Duplicate { line: line_no, key: key.into() });
            }
            cfg.set(line_no, key, value)?;
            seen.push((key.to_string(), line_no));
        }
        cfg.validate_at(|key| seen.iter().find(|(k, _)| k == key).map_or(0, |(_, l)| *l))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Unreadable { path: path.to_path_buf(), message: e.to_string() })?;
        Self::parse(&text)
    }

    /// Canonical text: every key, in [`RunConfig::KEYS`] order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key));
        }
        out
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn sim(&self) -> SimConfig {
        SimConfig {
            cap_min: self.cap_min,
            cap_max: self.cap_max,
            hold: self.hold,
            model: ShapingModel { efficiency: self.efficiency, noise_max: self.noise_max },
            actions: ActionSet::from_rates(&self.actions).expect("validated"),
        }
    }

    pub fn hybrid(&self) -> HybridConfig {
        let seed = derive_seed(self.train_seed, 1);
        HybridConfig {
            bilstm: BiLstmConfig {
                window: self.window,
                hidden: self.hidden,
                epochs: self.epochs,
                learning_rate: self.learning_rate,
                clip_norm: self.clip_norm,
                seed,
            },
            boost: BoostConfig {
                trees: self.boost_trees,
                shrinkage: self.shrinkage,
                max_depth: self.max_depth,
                subsample: self.subsample,
                seed,
            },
        }
    }

    /// Agent settings; `which` separates the ID and OOD agents' seeds.
    pub fn agent(&self, which: u64) -> AgentConfig {
        AgentConfig {
            episodes: self.episodes,
            episode_len: self.episode_len,
            alpha: self.alpha,
            gamma: self.gamma,
            epsilon: EpsilonSchedule { start: self.epsilon_start, decay: self.epsilon_decay, floor: self.epsilon_floor },
            bin_width: self.bin_width,
            tie_tolerance: self.agent_tie_tolerance,
            seed: derive_seed(self.train_seed, 10 + which),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn range_error_names_key_and_line() {
        let e = RunConfig::parse("alpha = 0.2\n\ngamma = 1.5\n").unwrap_err();
        assert_eq!(
            e,
            ConfigError::Invalid { line: 3, key: "gamma".into(), value: "1.5".into(), message: "must lie in [0, 1)".into() }
        );
        assert!(e.to_string().contains("gamma"));
    }

    #[test]
    fn unknown_and_malformed_lines() {
        assert_eq!(RunConfig::parse("gama = 0.5").unwrap_err(), ConfigError::UnknownKey { line: 1, key: "gama".into() });
        assert_eq!(RunConfig::parse("\nalpha 0.5").unwrap_err(), ConfigError::Malformed { line: 2 });
        assert!(matches!(RunConfig::parse("hold = x"), Err(ConfigError::Invalid { line: 1, .. })));
        assert!(matches!(RunConfig::parse("hold = 2\nhold = 3"), Err(ConfigError::Duplicate { line: 2, .. })));
    }

    #[test]
    fn inline_comments_and_lists() {
        let c = RunConfig::parse("gamma = 0.8   # discount\nactions = 100, 310,550\nintent_ood = cap it at 2 mbps").unwrap();
        assert_eq!(c.gamma, 0.8);
        assert_eq!(c.actions, [100.0, 310.0, 550.0]);
        assert_eq!(c.intent_ood, "cap it at 2 mbps");
    }

    #[test]
    fn save_load_round_trip() {
        let mut c = RunConfig::default().with_master_seed(99);
        c.learning_rate = 0.012345678901234;
        c.corpus = "my corpus.txt".into();
        let text = c.to_text();
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.conf");
        c.save(&p).unwrap();
        assert_eq!(RunConfig::load(&p).unwrap(), c);
        assert_eq!(RunConfig::KEYS.len(), text.lines().count());
    }

    #[test]
    fn master_seed_changes_all_seeds() {
        let a = RunConfig::default().with_master_seed(1);
        let b = RunConfig::default().with_master_seed(2);
        assert!(a.trace_seed != b.trace_seed && a.train_seed != b.train_seed && a.eval_seed != b.eval_seed);
    }
}
