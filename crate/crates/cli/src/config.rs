//! Run configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use antisym::calculus::JacobianMethod;
use antisym::represent::{FitOptions, FitThresholds, TargetKind};
use antisym::verify::Tolerances;
use antisym::{Configuration, Domain, FeatureMap, ProjectionMode};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub d: usize,
    /// One `[lo, hi]` pair per coordinate; `[-1, 1]^d` when absent.
    pub domain_box: Option<Vec<[f64; 2]>>,
    pub projection_mode: ProjectionMode,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    pub verify: VerifySection,
    pub jacobian: JacobianSection,
    pub demo: DemoSection,
    pub fit: FitSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 2,
            d: 1,
            domain_box: None,
            projection_mode: ProjectionMode::Paper,
            seed: 0,
            tolerances: Tolerances::default(),
            output_dir: PathBuf::from("antisym-out"),
            verify: VerifySection::default(),
            jacobian: JacobianSection::default(),
            demo: DemoSection::default(),
            fit: FitSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub trials: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { trials: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JacobianSection {
    pub method: JacobianMethod,
    /// Flattened configurations, `n * d` coordinates each.
    pub points: Vec<Vec<f64>>,
    /// Random collision and distinct-particle points added by `demo jacobian`.
    pub random_points: usize,
    pub rank_tolerance: Option<f64>,
}

impl Default for JacobianSection {
    fn default() -> Self {
        Self {
            method: JacobianMethod::ExactPolynomial,
            points: Vec::new(),
            random_points: 2,
            rank_tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoSection {
    pub eps_list: Vec<f64>,
}

impl Default for DemoSection {
    fn default() -> Self {
        Self {
            eps_list: vec![1e-1, 1e-2, 1e-3, 1e-4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub target: TargetKind,
    pub samples: usize,
    pub feature_count: usize,
    pub ridge: f64,
    pub holdout: usize,
    pub thresholds: FitThresholds,
}

impl Default for FitSection {
    fn default() -> Self {
        let o = FitOptions::default();
        Self {
            target: TargetKind::Slater,
            samples: o.samples,
            feature_count: o.feature_count,
            ridge: o.ridge,
            holdout: o.holdout,
            thresholds: FitThresholds::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Checks everything that does not depend on the subcommand.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            bail!("n and d must be at least 1 (got n={}, d={})", self.n, self.d);
        }
        self.tolerances.validate()?;
        if let Some(b) = &self.domain_box {
            if b.len() != self.d {
                bail!("domain_box has {} intervals, expected d={}", b.len(), self.d);
            }
            if let Some([lo, hi]) = b.iter().find(|[lo, hi]| !(lo < hi && lo.is_finite() && hi.is_finite())) {
                bail!("domain_box interval [{lo}, {hi}] needs finite lo < hi");
            }
        }
        if self.verify.trials == 0 {
            bail!("verify.trials must be at least 1");
        }
        if let Some(eps) = self.demo.eps_list.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            bail!("eps_list entries must be positive, got {eps}");
        }
        if self.demo.eps_list.is_empty() {
            bail!("eps_list is empty");
        }
        if let Some(t) = self.jacobian.rank_tolerance {
            if !(t > 0.0 && t.is_finite()) {
                bail!("jacobian.rank_tolerance must be positive, got {t}");
            }
        }
        if let Some(p) = self.jacobian.points.iter().find(|p| p.len() != self.n * self.d) {
            bail!("jacobian point has {} coordinates, expected n*d={}", p.len(), self.n * self.d);
        }
        let f = &self.fit;
        if f.feature_count == 0 || f.samples < f.feature_count {
            bail!("fit needs samples >= feature_count >= 1");
        }
        if !(f.ridge > 0.0 && f.ridge.is_finite()) {
            bail!("fit.ridge must be positive, got {}", f.ridge);
        }
        if !(f.thresholds.holdout_rmse > 0.0) {
            bail!("fit.thresholds.holdout_rmse must be positive");
        }
        Ok(())
    }

    pub fn domain(&self) -> Option<Domain> {
        self.domain_box.as_ref().map(|b| Domain {
            lower: b.iter().map(|i| i[0]).collect(),
            upper: b.iter().map(|i| i[1]).collect(),
        })
    }

    pub fn feature_map(&self) -> Result<FeatureMap> {
        let spec = FeatureMap::new(self.n, self.d, self.projection_mode)?;
        Ok(match self.domain() {
            Some(b) => spec.with_domain(b)?,
            None => spec,
        })
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            samples: self.fit.samples,
            feature_count: self.fit.feature_count,
            ridge: self.fit.ridge,
            seed: self.seed,
            holdout: self.fit.holdout,
        }
    }

    pub fn configuration(&self, coords: &[f64]) -> Result<Configuration> {
        Ok(Configuration::new(self.n, self.d, coords.to_vec())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"n": 3, "d": 2, "verify": {"trials": 5}}"#).unwrap();
        assert_eq!((c.n, c.d, c.verify.trials), (3, 2, 5));
        assert_eq!(c.demo, DemoSection::default());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"tolerances": {"antisymetry": 1e-9}}"#).is_err());
        let mut c = RunConfig::default();
        c.verify.trials = 0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.domain_box = Some(vec![[1.0, -1.0]]);
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.tolerances.zero = -1.0;
        assert!(c.validate().is_err());
    }
}
