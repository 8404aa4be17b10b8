use std::path::Path;

use chromashape::colorlab::JndParams;
use chromashape::optimizer::{Encoding, GeneratorConfig, ScoringWeights};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

/// One row of the automatic encoding table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoRule {
    pub min: usize,
    pub max: usize,
    pub encoding: Encoding,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoEncodingTable {
    pub rules: Vec<AutoRule>,
}

impl Default for AutoEncodingTable {
    fn default() -> Self {
        let diminished = Some("redundant encoding helps less at this category count".to_owned());
        AutoEncodingTable {
            rules: vec![
                AutoRule {
                    min: 2,
                    max: 2,
                    encoding: Encoding::ColorOnly,
                    note: Some(
                        "with two categories adding shape gives no measurable benefit".to_owned(),
                    ),
                },
                AutoRule {
                    min: 3,
                    max: 4,
                    encoding: Encoding::Redundant,
                    note: diminished.clone(),
                },
                AutoRule {
                    min: 5,
                    max: 8,
                    encoding: Encoding::Redundant,
                    note: None,
                },
                AutoRule {
                    min: 9,
                    max: 10,
                    encoding: Encoding::Redundant,
                    note: diminished,
                },
            ],
        }
    }
}

impl AutoEncodingTable {
    /// Every n in 2..=10 must match exactly one rule.
    pub fn validate(&self) -> Result<(), ApiError> {
        for n in 2..=10 {
            let hits = self
                .rules
                .iter()
                .filter(|r| (r.min..=r.max).contains(&n))
                .count();
            if hits != 1 {
                return Err(ApiError::bad_request(
                    "auto_encoding",
                    format!("n = {n} matches {hits} rules, expected exactly one"),
                ));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, n: usize) -> Result<(Encoding, Option<String>), ApiError> {
        self.rules
            .iter()
            .find(|r| (r.min..=r.max).contains(&n))
            .map(|r| (r.encoding, r.note.clone()))
            .ok_or_else(|| ApiError::bad_request("n", format!("n = {n} outside 2..=10")))
    }
}

/// Overrides for the default discriminability model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JndOverride {
    pub p: Option<f64>,
    pub px_per_degree: Option<f64>,
}

impl JndOverride {
    pub fn params(&self) -> Result<JndParams, ApiError> {
        let mut params = JndParams::default();
        if let Some(p) = self.p {
            params.p = p;
        }
        if let Some(ppd) = self.px_per_degree {
            params.px_per_degree = ppd;
        }
        params
            .validate()
            .map_err(|e| ApiError::bad_request("jnd", e.to_string()))?;
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub weights: ScoringWeights,
    pub generator: GeneratorConfig,
    pub jnd: JndOverride,
    pub auto_encoding: AutoEncodingTable,
    pub session_ttl_secs: u64,
    /// Cells with fewer trials fall back to the all-sizes matrix.
    pub min_observations: Option<u32>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            weights: ScoringWeights::default(),
            generator: GeneratorConfig::default(),
            jnd: JndOverride::default(),
            auto_encoding: AutoEncodingTable::default(),
            session_ttl_secs: 3600,
            min_observations: None,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ApiError> {
        let c: Config =
            toml::from_str(text).map_err(|e| ApiError::bad_request("config", e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ApiError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ApiError::new(500, "io", Some(path.display().to_string()), e.to_string())
        })?;
        Config::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ApiError> {
        self.weights
            .validate()
            .map_err(|e| ApiError::bad_request("weights", e.to_string()))?;
        self.auto_encoding.validate()?;
        self.jnd.params()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_table_defaults() {
        let t = AutoEncodingTable::default();
        t.validate().unwrap();
        assert_eq!(t.resolve(6).unwrap(), (Encoding::Redundant, None));
        let (e, note) = t.resolve(2).unwrap();
        assert_eq!(e, Encoding::ColorOnly);
        assert!(note.is_some());
        let (e, note) = t.resolve(9).unwrap();
        assert_eq!(e, Encoding::Redundant);
        assert!(note.unwrap().contains("less"));
        assert!(t.resolve(11).is_err());
    }

    #[test]
    fn toml_overrides() {
        let c = Config::from_toml(
            r#"
session_ttl_secs = 60
[generator]
repetitions = 4
[jnd]
p = 0.8
[[auto_encoding.rules]]
min = 2
max = 10
encoding = "color_only"
"#,
        )
        .unwrap();
        assert_eq!(c.session_ttl_secs, 60);
        assert_eq!(c.generator.repetitions, 4);
        assert_eq!(c.auto_encoding.resolve(7).unwrap().0, Encoding::ColorOnly);
        assert_eq!(c.jnd.params().unwrap().p, 0.8);
    }

    #[test]
    fn example_file_is_the_default() {
        let c = Config::from_toml(include_str!("../../../docs/config.example.toml")).unwrap();
        assert_eq!(c.jnd.params().unwrap(), JndParams::default());
        let expected = Config {
            jnd: c.jnd.clone(),
            min_observations: Some(5),
            ..Config::default()
        };
        assert_eq!(c, expected);
    }

    #[test]
    fn rejects_gaps_and_bad_weights() {
        assert!(Config::from_toml(
            "[[auto_encoding.rules]]\nmin = 2\nmax = 5\nencoding = \"redundant\"\n"
        )
        .is_err());
        assert!(Config::from_toml("[weights]\nmarker_pair_mean = 0.9\n").is_err());
        assert!(Config::from_toml("colour = 1\n").is_err());
    }
}
