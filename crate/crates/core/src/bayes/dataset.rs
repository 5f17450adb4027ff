use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::priors::{draw_scenario, HypothesisPriors, Scenario, Theta};
use crate::corrsim::simulate_taps;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::monitors::{measure_power, Detector, Measurement, PowerModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub n_p: u64,
    pub n_m: u64,
    pub seed: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            n_p: 10_000,
            n_m: 20,
            seed: 1,
        }
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_p < 1 || self.n_m < 1 {
            return Err(Error::InvalidParameter("n_p and n_m must be >= 1".into()));
        }
        Ok(())
    }
}

/// One labeled Monte-Carlo measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub measurement: Measurement,
    pub truth: Hypothesis,
    pub theta: Theta,
}

pub type Dataset = Vec<Sample>;

/// Independent random streams for one Monte-Carlo sample.
///
/// The scenario stream decides the hypothesis and θ, the power stream carries
/// power noise and code tracking error, and the tap stream carries correlator
/// noise. Keeping them apart makes the power column independent of the
/// detector's tap count.
pub(crate) struct SampleStreams {
    pub scenario: ChaCha8Rng,
    pub power: ChaCha8Rng,
    pub taps: ChaCha8Rng,
}

impl SampleStreams {
    pub fn new(seed: u64, index: u64) -> Self {
        let stream = |k: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(3 * index + k);
            r
        };
        Self {
            scenario: stream(0),
            power: stream(1),
            taps: stream(2),
        }
    }
}

/// Produces one measurement for `scenario`, drawing tracking error and power
/// noise from `power_rng` and correlator noise from `tap_rng`.
pub fn measure_epoch(
    scenario: &Scenario,
    detector: &Detector,
    power: &PowerModel,
    tracking: &super::priors::TrackingModel,
    epoch: u64,
    power_rng: &mut ChaCha8Rng,
    tap_rng: &mut ChaCha8Rng,
) -> Result<Measurement> {
    let dtau_a = tracking.sample(scenario.theta.cn0_dbhz, scenario.theta.jnr, power_rng);
    let params = scenario.epoch_params(dtau_a)?;
    let power_db = measure_power(&params, power, power_rng);
    let taps = simulate_taps(&params, detector.grid(), detector.covariance(), tap_rng)?;
    let distortion = detector.distortion(&taps)?;
    Ok(Measurement {
        power_db,
        distortion,
        epoch,
    })
}

fn generate_sample(
    index: u64,
    priors: &HypothesisPriors,
    mc: &MonteCarloConfig,
    detector: &Detector,
    power: &PowerModel,
) -> Result<Vec<Sample>> {
    let mut streams = SampleStreams::new(mc.seed, index);
    let truth = priors.draw_hypothesis(&mut streams.scenario);
    let scenario = draw_scenario(truth, priors, &mut streams.scenario);
    (0..mc.n_m)
        .map(|m| {
            let measurement = measure_epoch(
                &scenario,
                detector,
                power,
                &priors.tracking,
                index * mc.n_m + m,
                &mut streams.power,
                &mut streams.taps,
            )?;
            Ok(Sample {
                measurement,
                truth,
                theta: scenario.theta,
            })
        })
        .collect()
}

/// Generates `n_p × n_m` labeled measurements. Each sample uses its own
/// derived streams, so the output is identical for any thread count.
pub fn generate_dataset(
    priors: &HypothesisPriors,
    mc: &MonteCarloConfig,
    detector: &Detector,
    power: &PowerModel,
) -> Result<Dataset> {
    priors.validate()?;
    mc.validate()?;
    power.validate()?;
    let chunks = (0..mc.n_p)
        .into_par_iter()
        .map(|i| generate_sample(i, priors, mc, detector, power))
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitors::DetectorKind;

    fn small() -> MonteCarloConfig {
        MonteCarloConfig {
            n_p: 100,
            n_m: 20,
            seed: 42,
        }
    }

    #[test]
    fn cardinality_and_epochs() {
        let det = Detector::with_defaults(DetectorKind::Pdml, 11).unwrap();
        let ds = generate_dataset(&HypothesisPriors::default(), &small(), &det, &PowerModel::default())
            .unwrap();
        assert_eq!(ds.len(), 2000);
        for (k, s) in ds.iter().enumerate() {
            assert_eq!(s.measurement.epoch, k as u64);
            assert!(s.measurement.distortion >= 0.0);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let det = Detector::with_defaults(DetectorKind::Pdml, 11).unwrap();
        let p = HypothesisPriors::default();
        let a = generate_dataset(&p, &small(), &det, &PowerModel::default()).unwrap();
        let b = generate_dataset(&p, &small(), &det, &PowerModel::default()).unwrap();
        assert_eq!(a, b);
        let c = generate_dataset(
            &p,
            &MonteCarloConfig { seed: 43, ..small() },
            &det,
            &PowerModel::default(),
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn power_path_shared_between_detectors() {
        let p = HypothesisPriors::default();
        let ml = Detector::with_defaults(DetectorKind::Pdml, 11).unwrap();
        let sd = Detector::with_defaults(DetectorKind::Sd, 11).unwrap();
        let mc = MonteCarloConfig { n_p: 20, ..small() };
        let a = generate_dataset(&p, &mc, &ml, &PowerModel::default()).unwrap();
        let b = generate_dataset(&p, &mc, &sd, &PowerModel::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.measurement.power_db, y.measurement.power_db);
            assert_eq!(x.truth, y.truth);
            assert_ne!(x.measurement.distortion, y.measurement.distortion);
        }
    }

    #[test]
    fn rejects_empty_config() {
        let det = Detector::with_defaults(DetectorKind::Pdml, 11).unwrap();
        let mc = MonteCarloConfig { n_p: 0, ..small() };
        assert!(generate_dataset(&HypothesisPriors::default(), &mc, &det, &PowerModel::default())
            .is_err());
    }
}
