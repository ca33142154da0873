//! TOML case files.
//!
//! ```toml
//! [[case]]
//! id = "box-euclidean"
//! resolutions = [16, 32]
//! seed = 0
//! domain = { shape = "box", lengths = [1.0, 1.0] }
//! norm = { family = "euclidean", dim = 2 }
//! weight = { kind = "lebesgue" }
//! certificate = { k = 0.0, n = 2 }   # optional
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{CurvatureCertificate, DomainSpec, Shape, Weight};
use crate::error::{Error, Result};
use crate::model1d::Dimension;
use crate::norms::NormSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseConfig {
    pub id: String,
    /// Cells per unit length, coarse to fine.
    pub resolutions: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    pub domain: Shape,
    pub norm: NormSpec,
    #[serde(default)]
    pub weight: Weight,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CurvatureCertificate>,
}

impl CaseConfig {
    pub fn spec(&self, resolution: f64) -> DomainSpec {
        DomainSpec {
            shape: self.domain.clone(),
            norm: self.norm.clone(),
            weight: self.weight,
            resolution,
            certificate: self.certificate,
        }
    }

    pub fn finest(&self) -> Result<DomainSpec> {
        self.resolutions
            .iter()
            .copied()
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
            .map(|r| self.spec(r))
            .ok_or_else(|| Error::Config(format!("case {}: no resolutions", self.id)))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(default, rename = "case")]
    pub cases: Vec<CaseConfig>,
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut ids: Vec<&str> = cfg.cases.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate case id {}", w[0])));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Grid for `model-table`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelGrid {
    pub k: Vec<f64>,
    pub n: Vec<Dimension>,
    pub d: Vec<f64>,
}

impl ModelGrid {
    pub fn load(path: &Path) -> Result<Self> {
        toml::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_case_blocks() {
        let text = r#"
            [[case]]
            id = "a"
            resolutions = [16, 32]
            domain = { shape = "box", lengths = [1.0, 1.0] }
            norm = { family = "randers", dim = 2, params = { a = [1.0, 0.0, 0.0, 1.0], b = [0.4, 0.2] } }

            [[case]]
            id = "b"
            resolutions = [100]
            seed = 3
            domain = { shape = "interval", length = 1.0 }
            norm = { family = "two_slope_1d", dim = 1, params = { plus = 2.0, minus = 2.0 } }
            weight = { kind = "gaussian", kappa = 1.0 }
            certificate = { k = 0.0, n = "inf" }
        "#;
        let cfg = SuiteConfig::from_toml(text).unwrap();
        assert_eq!(cfg.cases.len(), 2);
        assert_eq!(cfg.cases[0].weight, Weight::Lebesgue);
        assert_eq!(cfg.cases[1].seed, 3);
        assert_eq!(cfg.cases[1].certificate.unwrap().n, Dimension::Infinite);
        assert_eq!(cfg.cases[0].finest().unwrap().resolution, 32.0);
        assert_eq!(SuiteConfig::from_toml("").unwrap().cases.len(), 0);
    }

    #[test]
    fn rejects_duplicate_ids() {
        let one = r#"
            [[case]]
            id = "a"
            resolutions = [8]
            domain = { shape = "interval", length = 1.0 }
            norm = { family = "euclidean", dim = 1 }
        "#;
        let text = format!("{one}\n{one}");
        assert!(matches!(SuiteConfig::from_toml(&text), Err(Error::Config(_))));
    }
}
