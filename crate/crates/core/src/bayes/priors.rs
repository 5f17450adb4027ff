use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corrsim::{NoiseModel, ScenarioParams};
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultipathPrior {
    /// Reflection amplitude ratio range `[α_min, α_max]`, sampled
    /// log-uniformly when `α_min > 0`.
    pub alpha: [f64; 2],
    /// Excess-delay range in chips.
    pub delay: [f64; 2],
    /// Mean of the excess delay in chips. When set, delays are exponentially
    /// distributed and truncated to `delay`; otherwise uniform over `delay`.
    pub delay_mean: Option<f64>,
}

impl Default for MultipathPrior {
    fn default() -> Self {
        Self {
            alpha: [0.01, 0.8],
            delay: [0.0, 1.2],
            delay_mean: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpoofingPrior {
    /// Power advantage range, sampled log-uniformly.
    pub eta: [f64; 2],
    /// Spoofer-to-authentic code offset range in chips.
    pub offset: [f64; 2],
}

impl Default for SpoofingPrior {
    fn default() -> Self {
        Self {
            eta: [0.6, 4.0],
            offset: [0.0, 1.5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JammingPrior {
    /// Jammer-to-noise ratio range in dB, sampled uniformly in dB.
    pub jnr_db: [f64; 2],
}

impl Default for JammingPrior {
    fn default() -> Self {
        Self { jnr_db: [3.0, 30.0] }
    }
}

/// Code tracking error model: zero-mean Gaussian with the standard
/// early-minus-late DLL variance `B_L d / (2 C/N0_eff)` chips², clipped to
/// `±max_error`. Jamming lowers the effective C/N0 by `1 + J/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingModel {
    pub loop_bandwidth_hz: f64,
    pub correlator_spacing: f64,
    pub max_error: f64,
}

impl Default for TrackingModel {
    fn default() -> Self {
        Self {
            loop_bandwidth_hz: 1.0,
            correlator_spacing: 1.0,
            max_error: 0.4,
        }
    }
}

impl TrackingModel {
    pub fn sigma(&self, cn0_dbhz: f64, jnr: f64) -> f64 {
        let cn0_eff = 10f64.powf(cn0_dbhz / 10.0) / (1.0 + jnr);
        (self.loop_bandwidth_hz * self.correlator_spacing / (2.0 * cn0_eff)).sqrt()
    }

    /// Draws one tracking error. Always consumes one normal draw.
    pub fn sample<R: Rng + ?Sized>(&self, cn0_dbhz: f64, jnr: f64, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        (self.sigma(cn0_dbhz, jnr) * z).clamp(-self.max_error, self.max_error)
    }
}

/// Prior over hypotheses and their physical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HypothesisPriors {
    /// Prior probabilities of H0..H3.
    pub weights: [f64; 4],
    /// Authentic carrier-to-noise density range in dB-Hz.
    pub cn0_dbhz: [f64; 2],
    /// Accumulation interval in seconds.
    pub t_accum: f64,
    pub multipath: MultipathPrior,
    pub spoofing: SpoofingPrior,
    pub jamming: JammingPrior,
    pub tracking: TrackingModel,
}

impl Default for HypothesisPriors {
    fn default() -> Self {
        Self {
            weights: [0.25; 4],
            cn0_dbhz: [40.0, 50.0],
            t_accum: 0.02,
            multipath: MultipathPrior::default(),
            spoofing: SpoofingPrior::default(),
            jamming: JammingPrior::default(),
            tracking: TrackingModel::default(),
        }
    }
}

fn check_range(name: &str, r: [f64; 2], lo: f64, hi: f64) -> Result<()> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1] && r[0] >= lo && r[1] <= hi) {
        return Err(Error::InvalidParameter(format!(
            "{name} range [{}, {}] must be ordered and within [{lo}, {hi}]",
            r[0], r[1]
        )));
    }
    Ok(())
}

impl HypothesisPriors {
    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("prior weights must be >= 0".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "prior weights must sum to 1, got {sum}"
            )));
        }
        check_range("cn0_dbhz", self.cn0_dbhz, 0.0, 100.0)?;
        if !(self.t_accum > 0.0 && self.t_accum.is_finite()) {
            return Err(Error::InvalidParameter("t_accum must be > 0".into()));
        }
        check_range("multipath alpha", self.multipath.alpha, 0.0, 1.0)?;
        check_range("multipath delay", self.multipath.delay, 0.0, f64::MAX)?;
        if let Some(m) = self.multipath.delay_mean {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidParameter("delay_mean must be > 0".into()));
            }
        }
        check_range("spoofing eta", self.spoofing.eta, f64::MIN_POSITIVE, f64::MAX)?;
        check_range("spoofing offset", self.spoofing.offset, 0.0, f64::MAX)?;
        check_range("jamming jnr_db", self.jamming.jnr_db, -100.0, 100.0)?;
        let t = &self.tracking;
        if !(t.loop_bandwidth_hz >= 0.0 && t.correlator_spacing >= 0.0 && t.max_error >= 0.0) {
            return Err(Error::InvalidParameter("tracking model values must be >= 0".into()));
        }
        Ok(())
    }

    /// Picks a hypothesis according to the prior weights.
    pub fn draw_hypothesis<R: Rng + ?Sized>(&self, rng: &mut R) -> Hypothesis {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for h in Hypothesis::ALL {
            acc += self.weights[h.index()];
            if u < acc {
                return h;
            }
        }
        // Rounding left u above the cumulative sum: take the last non-zero class.
        Hypothesis::ALL
            .into_iter()
            .rev()
            .find(|h| self.weights[h.index()] > 0.0)
            .unwrap_or(Hypothesis::H0)
    }
}

/// Parameters drawn once per Monte-Carlo sample. Costs depend on these.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Theta {
    /// Interference power advantage (α² under multipath).
    pub eta: f64,
    /// Interference code offset relative to the authentic peak, in chips.
    pub dtau_i: f64,
    /// Interference carrier phase relative to the authentic carrier.
    pub dtheta_i: f64,
    /// Multipath amplitude ratio (0 unless H1).
    pub alpha: f64,
    /// Multipath excess delay in chips (0 unless H1).
    pub delay: f64,
    /// Linear jammer-to-noise ratio (0 unless H3).
    pub jnr: f64,
    pub cn0_dbhz: f64,
}

/// A drawn scenario: truth, parameters, and the authentic carrier phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub truth: Hypothesis,
    pub theta: Theta,
    pub dtheta_a: f64,
    pub t_accum: f64,
}

impl Scenario {
    pub fn noise(&self) -> Result<NoiseModel> {
        NoiseModel::from_cn0(self.theta.cn0_dbhz, 1.0, self.t_accum)
    }

    /// Parameters for one epoch with the receiver's code tracking error
    /// `dtau_a`. The interference moves with the authentic peak.
    pub fn epoch_params(&self, dtau_a: f64) -> Result<ScenarioParams> {
        let params = ScenarioParams {
            hypothesis: self.truth,
            p_auth: 1.0,
            eta: self.theta.eta,
            dtau_a,
            dtheta_a: self.dtheta_a,
            dtau_i: dtau_a + self.theta.dtau_i,
            dtheta_i: self.dtheta_a + self.theta.dtheta_i,
            jnr: self.theta.jnr,
            beta: 1.0,
            noise: self.noise()?,
        }
        .with_ideal_agc();
        params.validate()?;
        Ok(params)
    }
}

fn lerp(r: [f64; 2], u: f64) -> f64 {
    r[0] + (r[1] - r[0]) * u
}

fn log_lerp(r: [f64; 2], u: f64) -> f64 {
    (r[0].ln() + (r[1].ln() - r[0].ln()) * u).exp()
}

fn wrap_phase(u: f64) -> f64 {
    PI - 2.0 * PI * u
}

/// Inverse CDF of an exponential with the given mean restricted to `r`.
fn truncated_exponential(mean: f64, r: [f64; 2], u: f64) -> f64 {
    let lo = (-r[0] / mean).exp();
    let hi = (-r[1] / mean).exp();
    (-mean * (lo - u * (lo - hi)).ln()).clamp(r[0], r[1])
}

/// Draws a scenario under hypothesis `h`.
///
/// Every hypothesis consumes the same five uniforms, so streams stay aligned
/// when only the hypothesis differs.
pub fn draw_scenario<R: Rng + ?Sized>(
    h: Hypothesis,
    priors: &HypothesisPriors,
    rng: &mut R,
) -> Scenario {
    let u: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>());
    let cn0_dbhz = lerp(priors.cn0_dbhz, u[0]);
    let dtheta_a = wrap_phase(u[1]);

    let mut theta = Theta {
        cn0_dbhz,
        ..Theta::default()
    };
    match h {
        Hypothesis::H0 => {}
        Hypothesis::H1 => {
            let mp = &priors.multipath;
            // η = α² is a power ratio, so α is log-uniform like η under H2.
            let alpha = if mp.alpha[0] > 0.0 {
                log_lerp(mp.alpha, u[2])
            } else {
                lerp(mp.alpha, u[2])
            };
            let delay = match mp.delay_mean {
                Some(mean) => truncated_exponential(mean, mp.delay, u[3]),
                None => lerp(mp.delay, u[3]),
            };
            theta.alpha = alpha;
            theta.eta = alpha * alpha;
            theta.delay = delay;
            theta.dtau_i = delay;
            theta.dtheta_i = wrap_phase(u[4]);
        }
        Hypothesis::H2 => {
            let sp = &priors.spoofing;
            theta.eta = log_lerp(sp.eta, u[2]);
            theta.dtau_i = lerp(sp.offset, u[3]);
            theta.dtheta_i = wrap_phase(u[4]);
        }
        Hypothesis::H3 => {
            theta.jnr = 10f64.powf(lerp(priors.jamming.jnr_db, u[2]) / 10.0);
        }
    }
    Scenario {
        truth: h,
        theta,
        dtheta_a,
        t_accum: priors.t_accum,
    }
}
