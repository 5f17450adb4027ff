//! Received-power monitor, the two-tap symmetric-difference distortion used by
//! the baseline detector, and a [`Detector`] that produces either distortion
//! metric from a tap vector.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corrsim::{NoiseCovariance, ScenarioParams, TapGrid, TapVector};
use crate::error::{Error, Result};
use crate::mle::{self, MlConfig};

/// One two-dimensional detector observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub power_db: f64,
    pub distortion: f64,
    pub epoch: u64,
}

/// Received-power measurement model.
///
/// In-band power is `P_A (1 + η) + F (1 + J/N)` where `F` (`noise_floor`) is the
/// thermal-noise power in units of nominal authentic power. Readings are in dB
/// relative to the interference-free value `P_A + F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerModel {
    pub sigma_p_db: f64,
    pub noise_floor: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            sigma_p_db: 0.2,
            noise_floor: 0.5,
        }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_p_db >= 0.0 && self.sigma_p_db.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma_p_db must be >= 0, got {}",
                self.sigma_p_db
            )));
        }
        if !(self.noise_floor >= 0.0 && self.noise_floor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise_floor must be >= 0, got {}",
                self.noise_floor
            )));
        }
        Ok(())
    }

    /// Noise-free power reading in dB.
    pub fn expected_power_db(&self, params: &ScenarioParams) -> f64 {
        let total = params.p_auth * (1.0 + params.eta) + self.noise_floor * (1.0 + params.jnr);
        let nominal = params.p_auth + self.noise_floor;
        10.0 * (total / nominal).log10()
    }
}

/// Power reading in dB with Gaussian measurement noise. Always consumes one
/// normal draw from `rng`, even when `sigma_p_db` is zero.
pub fn measure_power<R: Rng + ?Sized>(
    params: &ScenarioParams,
    model: &PowerModel,
    rng: &mut R,
) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    model.expected_power_db(params) + model.sigma_p_db * z
}

/// `|ξ(−d) − ξ(+d)| / |ξ(0)|`.
pub fn symmetric_difference(taps: &TapVector, grid: &TapGrid, d: f64) -> Result<f64> {
    taps.check(grid.len())?;
    let early = grid.index_of(-d).ok_or(Error::LagNotOnGrid(-d))?;
    let late = grid.index_of(d).ok_or(Error::LagNotOnGrid(d))?;
    let prompt = taps.values[grid.prompt_index()].norm();
    let diff = (taps.values[early] - taps.values[late]).norm();
    if prompt == 0.0 {
        return Ok(if diff == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(diff / prompt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    /// Normalized post-fit residual of the multi-tap ML fit.
    #[default]
    Pdml,
    /// Two-tap symmetric difference.
    Sd,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Pdml => "pdml",
            DetectorKind::Sd => "sd",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pdml" | "pd-ml" => Ok(DetectorKind::Pdml),
            "sd" | "pd" => Ok(DetectorKind::Sd),
            other => Err(Error::InvalidParameter(format!("unknown detector '{other}'"))),
        }
    }
}

pub const DEFAULT_SD_SPACING: f64 = 0.5;

/// Smallest odd tap grid with taps at `±d`.
pub fn sd_grid(d: f64) -> Result<TapGrid> {
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::LagNotOnGrid(d));
    }
    (3..=401)
        .step_by(2)
        .map(TapGrid::new)
        .find_map(|g| g.ok().filter(|g| g.index_of(d).is_some()))
        .ok_or(Error::LagNotOnGrid(d))
}

/// Grid, covariance and settings needed to turn taps into a distortion value.
/// Immutable after construction and shareable across threads.
#[derive(Debug, Clone)]
pub struct Detector {
    kind: DetectorKind,
    grid: TapGrid,
    cov: NoiseCovariance,
    ml: MlConfig,
    sd_spacing: f64,
}

impl Detector {
    /// `taps` sets the ML grid. The SD detector ignores it and correlates on
    /// the smallest odd grid that has taps at `±sd_spacing`.
    pub fn new(kind: DetectorKind, taps: usize, ml: MlConfig, sd_spacing: f64) -> Result<Self> {
        ml.validate()?;
        let grid = match kind {
            DetectorKind::Pdml => TapGrid::new(taps)?,
            DetectorKind::Sd => sd_grid(sd_spacing)?,
        };
        let cov = NoiseCovariance::new(&grid)?;
        Ok(Self {
            kind,
            grid,
            cov,
            ml,
            sd_spacing,
        })
    }

    pub fn with_defaults(kind: DetectorKind, taps: usize) -> Result<Self> {
        Self::new(kind, taps, MlConfig::default(), DEFAULT_SD_SPACING)
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn grid(&self) -> &TapGrid {
        &self.grid
    }

    pub fn covariance(&self) -> &NoiseCovariance {
        &self.cov
    }

    pub fn ml_config(&self) -> &MlConfig {
        &self.ml
    }

    pub fn sd_spacing(&self) -> f64 {
        self.sd_spacing
    }

    pub fn distortion(&self, taps: &TapVector) -> Result<f64> {
        match self.kind {
            DetectorKind::Pdml => mle::distortion(taps, &self.grid, &self.cov, &self.ml).map(|r| r.1),
            DetectorKind::Sd => symmetric_difference(taps, &self.grid, self.sd_spacing),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrsim::{noiseless_taps, NoiseModel};
    use crate::hypothesis::Hypothesis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn nominal() -> ScenarioParams {
        ScenarioParams::nominal(NoiseModel::from_cn0(45.0, 1.0, 0.02).unwrap())
    }

    #[test]
    fn power_nominal_is_zero_db() {
        let m = PowerModel {
            sigma_p_db: 0.0,
            ..PowerModel::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(measure_power(&nominal(), &m, &mut rng), 0.0);
    }

    #[test]
    fn power_spoofer_doubles_signal() {
        let m = PowerModel {
            sigma_p_db: 0.0,
            noise_floor: 1e-12,
        };
        let p = ScenarioParams {
            hypothesis: Hypothesis::H2,
            eta: 1.0,
            ..nominal()
        };
        let db = measure_power(&p, &m, &mut ChaCha8Rng::seed_from_u64(1));
        assert!((db - 3.0103).abs() < 1e-3, "{db}");
    }

    #[test]
    fn power_monotone_in_jamming() {
        let m = PowerModel {
            sigma_p_db: 0.0,
            ..PowerModel::default()
        };
        let mut last = f64::NEG_INFINITY;
        for jnr in [1.0, 10.0, 100.0] {
            let p = ScenarioParams {
                hypothesis: Hypothesis::H3,
                jnr,
                ..nominal()
            }
            .with_ideal_agc();
            let db = measure_power(&p, &m, &mut ChaCha8Rng::seed_from_u64(1));
            assert!(db > last);
            last = db;
        }
    }

    #[test]
    fn sd_centered_and_offset() {
        let g = TapGrid::new(11).unwrap();
        let mut p = nominal();
        p.beta = 1.0;
        let t = noiseless_taps(&p, &g).unwrap();
        assert_eq!(symmetric_difference(&t, &g, 0.4).unwrap(), 0.0);

        let g21 = TapGrid::new(21).unwrap();
        p.dtau_a = 0.1;
        let t = noiseless_taps(&p, &g21).unwrap();
        let sd = symmetric_difference(&t, &g21, 0.5).unwrap();
        assert!((sd - 0.2 / 0.9).abs() < 1e-12, "{sd}");
    }

    #[test]
    fn sd_two_signal_is_asymmetric() {
        let g = TapGrid::new(21).unwrap();
        let p = ScenarioParams {
            hypothesis: Hypothesis::H2,
            eta: 1.0,
            dtau_i: 0.5,
            beta: 1.0,
            ..nominal()
        };
        let t = noiseless_taps(&p, &g).unwrap();
        // ξ(−0.5) = 0.5 + 0, ξ(0.5) = 0.5 + 1, ξ(0) = 1 + 0.5
        let sd = symmetric_difference(&t, &g, 0.5).unwrap();
        assert!((sd - 1.0 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn sd_rejects_off_grid_lag() {
        let g = TapGrid::new(11).unwrap();
        let t = TapVector::new(vec![num_complex::Complex64::new(1.0, 0.0); 11], 1.0);
        assert!(matches!(
            symmetric_difference(&t, &g, 0.5),
            Err(Error::LagNotOnGrid(_))
        ));
        assert_eq!(sd_grid(0.5).unwrap().len(), 5);
        assert_eq!(sd_grid(0.4).unwrap().len(), 11);
        assert!(sd_grid(0.0).is_err());
        let det = Detector::with_defaults(DetectorKind::Sd, 11).unwrap();
        assert_eq!(det.grid().len(), 5);
    }

    #[test]
    fn detector_kind_parse() {
        assert_eq!("pdml".parse::<DetectorKind>().unwrap(), DetectorKind::Pdml);
        assert_eq!("SD".parse::<DetectorKind>().unwrap(), DetectorKind::Sd);
        assert!("xx".parse::<DetectorKind>().is_err());
    }
}
