//! Bundled experiment sets, one per regret panel.

use serde::Deserialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::harness::{run_experiment, AggregateResult};

const BUNDLED: [(&str, &str); 5] = [
    ("a", include_str!("../configs/repro_a.json")),
    ("b", include_str!("../configs/repro_b.json")),
    ("c", include_str!("../configs/repro_c.json")),
    ("d", include_str!("../configs/repro_d.json")),
    ("e", include_str!("../configs/repro_e.json")),
];

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproSpec {
    pub id: String,
    pub title: String,
    /// How the run was scaled down to desk size.
    pub scaling: String,
    pub runs: Vec<ExperimentConfig>,
}

pub fn ids() -> Vec<&'static str> {
    BUNDLED.iter().map(|(id, _)| *id).collect()
}

pub fn load(id: &str) -> Result<ReproSpec> {
    let text = BUNDLED
        .iter()
        .find(|(k, _)| *k == id)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::config("id", format!("unknown figure id `{id}` (valid: {})", ids().join(", "))))?;
    let spec: ReproSpec =
        serde_json::from_str(text).map_err(|e| Error::config("repro", format!("bundled set `{id}`: {e}")))?;
    for r in &spec.runs {
        r.validate()?;
    }
    Ok(spec)
}

impl ReproSpec {
    /// Applies `--seed` / `--reps` style overrides to every run.
    pub fn with_overrides(mut self, seed: Option<u64>, reps: Option<usize>) -> Self {
        for r in &mut self.runs {
            if let Some(s) = seed {
                r.master_seed = s;
            }
            if let Some(n) = reps {
                r.reps = n;
            }
        }
        self
    }

    pub fn run(&self) -> Result<Vec<AggregateResult>> {
        self.runs.iter().map(run_experiment).collect()
    }

    pub fn summary_header(&self) -> Vec<(String, String)> {
        vec![
            ("figure".into(), self.id.clone()),
            ("title".into(), self.title.clone()),
            ("scaling".into(), self.scaling.clone()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_sets_parse() {
        for id in ids() {
            let s = load(id).unwrap();
            assert_eq!(s.id, id);
            assert!(!s.runs.is_empty());
        }
    }

    #[test]
    fn unknown_id_lists_valid_ones() {
        let e = load("z").unwrap_err().to_string();
        assert!(e.contains("a, b, c, d, e"), "{e}");
    }
}
