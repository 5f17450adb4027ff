use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{measure_epoch, SampleStreams};
use super::priors::{Scenario, Theta, TrackingModel};
use super::regions::{classify, DecisionRegionGrid};
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::monitors::{Detector, Measurement, PowerModel};

pub const SCHEDULE_VERSION: u32 = 1;

/// A parameter that is either constant over a span or ramps linearly from
/// the first to the last epoch of the span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ramp {
    Const(f64),
    Linear([f64; 2]),
}

impl Default for Ramp {
    fn default() -> Self {
        Ramp::Const(0.0)
    }
}

impl Ramp {
    /// Value at fraction `f ∈ [0, 1]` of the span.
    pub fn at(&self, f: f64) -> f64 {
        match *self {
            Ramp::Const(v) => v,
            Ramp::Linear([a, b]) => a + (b - a) * f,
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            Ramp::Const(v) => v.is_finite(),
            Ramp::Linear([a, b]) => a.is_finite() && b.is_finite(),
        }
    }
}

/// Epochs `start..end` under one hypothesis.
///
/// `eta` is the interference power advantage (α² for multipath), `offset`
/// its code offset from the authentic peak in chips, `dtheta_i` its carrier
/// phase relative to the authentic carrier, and `jnr_db` the jammer level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub start: u64,
    pub end: u64,
    pub hypothesis: Hypothesis,
    #[serde(default)]
    pub eta: Ramp,
    #[serde(default)]
    pub offset: Ramp,
    #[serde(default)]
    pub dtheta_i: Ramp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jnr_db: Option<Ramp>,
}

impl Span {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    fn fraction(&self, epoch: u64) -> f64 {
        if self.len() <= 1 {
            0.0
        } else {
            (epoch - self.start) as f64 / (self.len() - 1) as f64
        }
    }

    fn theta(&self, epoch: u64, cn0_dbhz: f64) -> Theta {
        let f = self.fraction(epoch);
        let eta = self.eta.at(f);
        let offset = self.offset.at(f);
        let multipath = self.hypothesis == Hypothesis::H1;
        Theta {
            eta,
            dtau_i: offset,
            dtheta_i: self.dtheta_i.at(f),
            alpha: if multipath { eta.max(0.0).sqrt() } else { 0.0 },
            delay: if multipath { offset } else { 0.0 },
            jnr: self
                .jnr_db
                .map_or(0.0, |r| 10f64.powf(r.at(f) / 10.0)),
            cn0_dbhz,
        }
    }
}

/// A scripted sequence of contiguous spans at one decision per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub version: u32,
    pub cn0_dbhz: f64,
    #[serde(default = "default_t_accum")]
    pub t_accum: f64,
    #[serde(rename = "span")]
    pub spans: Vec<Span>,
}

fn default_t_accum() -> f64 {
    0.02
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEDULE_VERSION {
            return Err(Error::Schedule(format!(
                "unsupported schedule version {} (expected {SCHEDULE_VERSION})",
                self.version
            )));
        }
        if !(self.cn0_dbhz.is_finite() && self.t_accum > 0.0 && self.t_accum.is_finite()) {
            return Err(Error::Schedule("cn0_dbhz and t_accum must be finite, t_accum > 0".into()));
        }
        let first = self
            .spans
            .first()
            .ok_or_else(|| Error::Schedule("schedule has no spans".into()))?;
        if first.start != 0 {
            return Err(Error::Schedule(format!(
                "first span must start at epoch 0, starts at {}",
                first.start
            )));
        }
        let mut next = 0;
        for (k, s) in self.spans.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::Schedule(format!(
                    "span {k} is empty ({}..{})",
                    s.start, s.end
                )));
            }
            if s.start < next {
                return Err(Error::Schedule(format!(
                    "span {k} starting at {} overlaps the previous span ending at {next}",
                    s.start
                )));
            }
            if s.start > next {
                return Err(Error::Schedule(format!(
                    "gap between epoch {next} and span {k} starting at {}",
                    s.start
                )));
            }
            let ramps = [Some(s.eta), Some(s.offset), Some(s.dtheta_i), s.jnr_db];
            if ramps.iter().flatten().any(|r| !r.is_finite()) {
                return Err(Error::Schedule(format!("span {k} has non-finite parameters")));
            }
            next = s.end;
        }
        Ok(())
    }

    pub fn epochs(&self) -> u64 {
        self.spans.last().map_or(0, |s| s.end)
    }

    pub fn span_at(&self, epoch: u64) -> Option<&Span> {
        self.spans.iter().find(|s| (s.start..s.end).contains(&epoch))
    }

    /// Scenario in force at `epoch` with authentic carrier phase `dtheta_a`.
    pub fn scenario_at(&self, epoch: u64, dtheta_a: f64) -> Option<Scenario> {
        let span = self.span_at(epoch)?;
        Some(Scenario {
            truth: span.hypothesis,
            theta: span.theta(epoch, self.cn0_dbhz),
            dtheta_a,
            t_accum: self.t_accum,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelineEpoch {
    pub truth: Hypothesis,
    pub measurement: Measurement,
    pub decision: Hypothesis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub epochs: Vec<TimelineEpoch>,
    /// `cumulative[k][h]` is the number of `h` decisions in epochs `0..=k`
    /// divided by the total epoch count, so the last row sums to one.
    pub cumulative: Vec<[f64; 4]>,
}

impl Timeline {
    /// Fraction of epochs in `range` decided as `h`.
    pub fn decision_rate(&self, range: std::ops::Range<usize>, h: Hypothesis) -> f64 {
        let slice = &self.epochs[range];
        if slice.is_empty() {
            return 0.0;
        }
        slice.iter().filter(|e| e.decision == h).count() as f64 / slice.len() as f64
    }
}

pub fn cumulative_traces(decisions: &[Hypothesis]) -> Vec<[f64; 4]> {
    let n = decisions.len() as f64;
    let mut counts = [0u64; 4];
    decisions
        .iter()
        .map(|d| {
            counts[d.index()] += 1;
            counts.map(|c| c as f64 / n)
        })
        .collect()
}

/// Runs the schedule epoch by epoch through the detector and decision map.
/// Each epoch draws from streams derived from `(seed, epoch)`.
pub fn simulate_timeline(
    schedule: &Schedule,
    detector: &Detector,
    power: &PowerModel,
    tracking: &TrackingModel,
    regions: &DecisionRegionGrid,
    seed: u64,
) -> Result<Timeline> {
    schedule.validate()?;
    power.validate()?;
    let epochs = (0..schedule.epochs())
        .into_par_iter()
        .map(|epoch| {
            let mut streams = SampleStreams::new(seed, epoch);
            let dtheta_a = std::f64::consts::PI
                - 2.0 * std::f64::consts::PI * rand::Rng::random::<f64>(&mut streams.scenario);
            let scenario = schedule
                .scenario_at(epoch, dtheta_a)
                .expect("validated schedule covers every epoch");
            let measurement = measure_epoch(
                &scenario,
                detector,
                power,
                tracking,
                epoch,
                &mut streams.power,
                &mut streams.taps,
            )?;
            Ok(TimelineEpoch {
                truth: scenario.truth,
                measurement,
                decision: classify(&measurement, regions),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let decisions: Vec<Hypothesis> = epochs.iter().map(|e| e.decision).collect();
    Ok(Timeline {
        cumulative: cumulative_traces(&decisions),
        epochs,
    })
}
