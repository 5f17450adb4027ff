use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bayes::{CostModel, GridSpec, HypothesisPriors, MonteCarloConfig};
use crate::error::{Error, Result};
use crate::mle::MlConfig;
use crate::monitors::{Detector, DetectorKind, PowerModel, DEFAULT_SD_SPACING};

/// Everything a pipeline run needs. Loaded from TOML; every field has a
/// default so an empty file is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub detector: DetectorKind,
    pub taps: usize,
    pub sd_spacing: f64,
    pub output_dir: PathBuf,
    pub mc: MonteCarloConfig,
    pub power: PowerModel,
    pub ml: MlConfig,
    pub cost: CostModel,
    /// Decision-grid axes; the detector's default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub priors: HypothesisPriors,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            detector: DetectorKind::Pdml,
            taps: 11,
            sd_spacing: DEFAULT_SD_SPACING,
            output_dir: PathBuf::from("out"),
            mc: MonteCarloConfig::default(),
            power: PowerModel::default(),
            ml: MlConfig::default(),
            cost: CostModel::default(),
            grid: None,
            priors: HypothesisPriors::default(),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub detector: Option<DetectorKind>,
    pub taps: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(s) = o.seed {
            self.mc.seed = s;
        }
        if let Some(d) = o.detector {
            self.detector = d;
        }
        if let Some(t) = o.taps {
            self.taps = t;
        }
        if let Some(p) = &o.out {
            self.output_dir = p.clone();
        }
        self
    }

    pub fn grid_spec(&self) -> GridSpec {
        self.grid.unwrap_or_else(|| GridSpec::default_for(self.detector))
    }

    /// Checks every nested invariant and builds the detector.
    pub fn validate(&self) -> Result<Detector> {
        self.mc.validate()?;
        self.power.validate()?;
        self.cost.validate()?;
        self.priors.validate()?;
        self.grid_spec().validate()?;
        Detector::new(self.detector, self.taps, self.ml, self.sd_spacing)
    }

    /// Tap count the detector actually correlates with.
    pub fn effective_taps(&self) -> Result<usize> {
        Ok(self.validate()?.grid().len())
    }

    /// SHA-256 of the canonical TOML form with the output directory cleared
    /// and the grid resolved, so equivalent configs hash equally.
    pub fn hash(&self) -> String {
        let canonical = RunConfig {
            output_dir: PathBuf::new(),
            grid: Some(self.grid_spec()),
            ..self.clone()
        };
        let text = toml::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn nested_fields_parse() {
        let c = RunConfig::from_toml(
            r#"
            detector = "sd"
            taps = 9
            [mc]
            n_p = 10
            n_m = 2
            [priors.jamming]
            jnr_db = [10.0, 20.0]
            [grid.power]
            min = -5.0
            max = 5.0
            bins = 50
            [grid.log_distortion]
            min = -2.0
            max = 2.0
            bins = 40
            "#,
        )
        .unwrap();
        assert_eq!(c.detector, DetectorKind::Sd);
        assert_eq!(c.mc.n_p, 10);
        assert_eq!(c.mc.seed, 1);
        assert_eq!(c.priors.jamming.jnr_db, [10.0, 20.0]);
        assert_eq!(c.grid_spec().power.bins, 50);
        assert_eq!(c.effective_taps().unwrap(), 5);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::from_toml("tapz = 3"), Err(Error::Config(_))));
    }

    #[test]
    fn hash_ignores_output_dir_but_not_seed() {
        let a = RunConfig::default();
        let b = a.clone().apply(&Overrides {
            out: Some("elsewhere".into()),
            ..Overrides::default()
        });
        let c = a.clone().apply(&Overrides {
            seed: Some(9),
            ..Overrides::default()
        });
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn invalid_nested_values_rejected() {
        let mut c = RunConfig::default();
        c.taps = 4;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.priors.weights = [1.0, 1.0, 0.0, 0.0];
        assert!(c.validate().is_err());
    }
}
