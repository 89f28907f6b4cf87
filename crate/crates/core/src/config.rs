//! JSON experiment files.
//!
//! ```json
//! {"variant": "rcl_lf", "graph": "multi_star(5,9)", "K": 10, "T": 500,
//!  "reps": 30, "link_p": 0.7, "accept": "min_degree_ratio", "theory": "lf_rs"}
//! ```
//!
//! Omitted keys take the defaults listed on [`ExperimentConfig`].

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::comm::{ChannelConfig, CorruptionPolicy, DelayLaw};
use crate::env::{make_arms, ArmSpec};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSpec};
use crate::policy::{AcceptRule, PolicyConfig, PolicyVariant};

/// Message life: a fixed hop count, or `max(3, ceil(diameter / 2))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaSetting {
    Fixed(u32),
    Auto,
}

impl GammaSetting {
    pub fn resolve(self, g: &Graph) -> Result<u32> {
        Ok(match self {
            GammaSetting::Fixed(x) => x,
            GammaSetting::Auto => 3.max(g.diameter()?.div_ceil(2)),
        })
    }
}

impl Default for GammaSetting {
    fn default() -> Self {
        GammaSetting::Fixed(1)
    }
}

impl Serialize for GammaSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GammaSetting::Fixed(x) => s.serialize_u32(*x),
            GammaSetting::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for GammaSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u32),
            Name(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(x) => Ok(GammaSetting::Fixed(x)),
            Repr::Name(s) if s == "auto" => Ok(GammaSetting::Auto),
            Repr::Name(s) => Err(serde::de::Error::custom(format!("expected an integer or \"auto\", got `{s}`"))),
        }
    }
}

/// Closed-form regret bound to overlay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Instantaneous reward sharing with link failures.
    LfRs,
    /// Message passing with link failures.
    LfMp,
    /// Instantaneous reward sharing with stochastic delays.
    Sd,
}

fn yes() -> bool {
    true
}
fn one_f() -> f64 {
    1.0
}
fn one_u() -> usize {
    1
}
fn one_u32() -> u32 {
    1
}
fn default_xi() -> f64 {
    1.1
}
fn default_delta() -> f64 {
    0.1
}

/// Everything needed to run one experiment. Defaults: `graph_seed = 0`,
/// `resample_graph = true`, arms = mean 1 on arm 0 and 0.5 elsewhere with
/// unit-variance Gaussian noise, `sigma = 1`, `xi = 1.1`, `reps = 1`,
/// `master_seed = 0`, `gamma = 1`, `link_p = 1`, accept rule per variant,
/// no delay, no corruption, `clip01` only for `rcl_rc`, `gamma_bar = 1`,
/// `delta = 0.1`, `lambda_scale = 1`, no theory overlay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub variant: PolicyVariant,
    pub graph: GraphSpec,
    #[serde(default)]
    pub graph_seed: u64,
    /// Draw a fresh graph per repetition for random families.
    #[serde(default = "yes")]
    pub resample_graph: bool,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<ArmSpec>,
    /// Confidence-radius scale used by the UCB indices.
    #[serde(default = "one_f")]
    pub sigma: f64,
    #[serde(default = "default_xi")]
    pub xi: f64,
    #[serde(rename = "T")]
    pub horizon: u64,
    #[serde(default = "one_u")]
    pub reps: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub gamma: GammaSetting,
    #[serde(default = "one_f")]
    pub link_p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accept: Option<AcceptRule>,
    #[serde(default)]
    pub delay: DelayLaw,
    #[serde(default)]
    pub corruption: CorruptionPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip01: Option<bool>,
    #[serde(default = "one_u32")]
    pub gamma_bar: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "one_f")]
    pub lambda_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<Theorem>,
}

impl ExperimentConfig {
    /// A config with every optional key at its default.
    pub fn new(variant: PolicyVariant, graph: GraphSpec, k: usize, horizon: u64) -> Self {
        Self {
            label: None,
            variant,
            graph,
            graph_seed: 0,
            resample_graph: true,
            k: Some(k),
            arms: None,
            sigma: 1.0,
            xi: 1.1,
            horizon,
            reps: 1,
            master_seed: 0,
            gamma: GammaSetting::Fixed(1),
            link_p: 1.0,
            accept: None,
            delay: DelayLaw::None,
            corruption: CorruptionPolicy::None,
            clip01: None,
            gamma_bar: 1,
            delta: 0.1,
            lambda_scale: 1.0,
            theory: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(json_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.variant.name().to_string())
    }

    pub fn arm_spec(&self) -> Result<ArmSpec> {
        match (&self.arms, self.k) {
            (Some(a), Some(k)) if a.means.len() != k => {
                Err(Error::config("K", format!("{k} arms but {} means given", a.means.len())))
            }
            (Some(a), _) => Ok(a.clone()),
            (None, Some(k)) => Ok(ArmSpec::reference(k)),
            (None, None) => Err(Error::config("K", "either K or arms must be given")),
        }
    }

    pub fn clip01(&self) -> bool {
        self.clip01.unwrap_or(self.variant == PolicyVariant::RclRc)
    }

    pub fn accept_rule(&self) -> AcceptRule {
        self.accept.clone().unwrap_or_else(|| self.variant.default_accept())
    }

    pub fn policy(&self) -> PolicyConfig {
        PolicyConfig {
            variant: self.variant,
            xi: self.xi,
            sigma: self.sigma,
            gamma_bar: self.gamma_bar,
            delta: self.delta,
            lambda_scale: self.lambda_scale,
            accept_rule: self.accept_rule(),
        }
    }

    pub fn channel(&self, gamma: u32) -> ChannelConfig {
        ChannelConfig {
            gamma,
            link_p: self.link_p,
            delay: self.delay.clone(),
            corruption: self.corruption,
            clip01: self.clip01(),
        }
    }

    /// Range and consistency checks that do not need a graph.
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::config("T", "horizon must be >= 1"));
        }
        if self.reps < 1 {
            return Err(Error::config("reps", "need at least one repetition"));
        }
        if self.graph.vertex_count() < 1 {
            return Err(Error::config("graph", "need at least one agent"));
        }
        make_arms(&self.arm_spec()?).map_err(|e| Error::config("arms", e.to_string()))?;
        self.policy().validate()?;
        if let GammaSetting::Fixed(0) = self.gamma {
            return Err(Error::config("gamma", "message life must be >= 1"));
        }
        let hops = match self.gamma {
            GammaSetting::Fixed(x) => x,
            GammaSetting::Auto => 3,
        };
        self.channel(hops).validate()?;
        if let AcceptRule::Explicit(p) = self.accept_rule() {
            if p.len() != self.graph.vertex_count() {
                return Err(Error::config(
                    "accept",
                    format!("{} probabilities for {} agents", p.len(), self.graph.vertex_count()),
                ));
            }
            if let Some(x) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::config("accept", format!("probability {x} outside [0, 1]")));
            }
        }
        if self.variant == PolicyVariant::RclRc {
            if self.link_p != 1.0 || !self.delay.is_none() {
                return Err(Error::Unsupported(
                    "rcl_rc is defined for reliable links without delays".into(),
                ));
            }
            if self.accept_rule() != AcceptRule::All {
                return Err(Error::Unsupported("rcl_rc requires accept = all".into()));
            }
            if self.horizon < self.arm_spec()?.means.len() as u64 {
                return Err(Error::config("T", "rcl_rc needs T >= K"));
            }
        }
        Ok(())
    }

    /// Overrides one scalar parameter by name (used by sweeps).
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        let as_int = |v: f64| -> Result<u64> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u64)
            } else {
                Err(Error::config(name, format!("{v} is not a non-negative integer")))
            }
        };
        match name {
            "link_p" => self.link_p = value,
            "epsilon" => self.corruption = self.corruption.with_budget(value),
            "gamma" => self.gamma = GammaSetting::Fixed(as_int(value)? as u32),
            "gamma_bar" => self.gamma_bar = as_int(value)? as u32,
            "xi" => self.xi = value,
            "sigma" => self.sigma = value,
            "delta" => self.delta = value,
            "lambda_scale" => self.lambda_scale = value,
            "T" => self.horizon = as_int(value)?,
            "delay_mean" => match self.delay {
                DelayLaw::TruncatedGeometric(_, max) => self.delay = DelayLaw::TruncatedGeometric(value, max),
                _ => return Err(Error::config("delay_mean", "needs a truncated_geometric delay law")),
            },
            _ => {
                return Err(Error::config(
                    name,
                    format!("not sweepable (one of: {})", SWEEPABLE.join(", ")),
                ))
            }
        }
        self.validate()
    }
}

pub const SWEEPABLE: [&str; 10] =
    ["link_p", "epsilon", "gamma", "gamma_bar", "xi", "sigma", "delta", "lambda_scale", "T", "delay_mean"];

/// Maps serde's message onto a config error naming the offending key.
fn json_error(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    let key = ["unknown field `", "missing field `"]
        .iter()
        .find_map(|p| msg.split_once(p).and_then(|(_, rest)| rest.split_once('`')).map(|(k, _)| k.to_string()))
        .unwrap_or_else(|| "config".to_string());
    Error::config(key, msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_defaults() {
        let c = ExperimentConfig::from_json(r#"{"variant":"coop_ucb","graph":"complete(4)","K":2,"T":100}"#).unwrap();
        assert_eq!(c.xi, 1.1);
        assert_eq!(c.sigma, 1.0);
        assert_eq!(c.reps, 1);
        assert_eq!(c.arm_spec().unwrap().means, vec![1.0, 0.5]);
        assert!(!c.clip01());
    }

    #[test]
    fn range_errors_name_the_key() {
        let e = ExperimentConfig::from_json(r#"{"variant":"coop_ucb","graph":"complete(4)","K":2,"T":100,"xi":0.5}"#)
            .unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "xi"), "{e}");
        let e = ExperimentConfig::from_json(r#"{"variant":"coop_ucb","graph":"complete(4)","K":2,"T":100,"delta":1.5}"#)
            .unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "delta"), "{e}");
        let e = ExperimentConfig::from_json(r#"{"variant":"coop_ucb","graph":"complete(4)","K":2,"T":100,"bogus":1}"#)
            .unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "bogus"), "{e}");
    }

    #[test]
    fn nested_forms() {
        let c = ExperimentConfig::from_json(
            r#"{"variant":"rcl_sd","graph":{"n":3,"edges":[[0,1],[1,2]]},"K":3,"T":10,
                "delay":{"truncated_geometric":[2.0,5]},"corruption":{"adaptive_bias":0.01},
                "accept":[1,0.5,1]}"#,
        )
        .unwrap();
        assert_eq!(c.delay, DelayLaw::TruncatedGeometric(2.0, 5));
        assert_eq!(c.corruption, CorruptionPolicy::AdaptiveBias(0.01));
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn auto_gamma_parses_and_rejects_delays() {
        let base = r#"{"variant":"coop_ucb","graph":"path(5)","K":2,"T":10,"gamma":"auto""#;
        let c = ExperimentConfig::from_json(&format!("{base}}}")).unwrap();
        assert_eq!(c.gamma, GammaSetting::Auto);
        let e = ExperimentConfig::from_json(&format!("{base},\"delay\":{{\"uniform_int\":[0,3]}}}}")).unwrap_err();
        assert!(matches!(e, Error::Unsupported(_)));
    }

    #[test]
    fn rc_rejects_lossy_links() {
        let mut c = ExperimentConfig::new(PolicyVariant::RclRc, GraphSpec::Complete { n: 3 }, 2, 50);
        assert!(c.validate().is_ok());
        c.link_p = 0.9;
        assert!(matches!(c.validate(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn auto_gamma_rounds_up() {
        let g = crate::graph::generate(&GraphSpec::Path { n: 10 }, 0).unwrap();
        assert_eq!(GammaSetting::Auto.resolve(&g).unwrap(), 5);
        let g = crate::graph::generate(&GraphSpec::Path { n: 3 }, 0).unwrap();
        assert_eq!(GammaSetting::Auto.resolve(&g).unwrap(), 3);
    }

    #[test]
    fn sweep_params() {
        let mut c = ExperimentConfig::new(PolicyVariant::CoopUcb, GraphSpec::Complete { n: 3 }, 2, 50);
        c.set_param("link_p", 0.5).unwrap();
        assert_eq!(c.link_p, 0.5);
        assert!(c.set_param("link_p", 1.5).is_err());
        assert!(c.set_param("nope", 1.0).is_err());
        assert!(c.set_param("gamma_bar", 2.5).is_err());
    }
}
