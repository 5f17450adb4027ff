use super::dataset::Sample;
use super::regions::{classify, DecisionRegionGrid};
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;

/// Decision-versus-truth counts. Rows are decisions, columns are truths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 4]; 4],
}

impl ConfusionMatrix {
    pub fn record(&mut self, decision: Hypothesis, truth: Hypothesis) {
        self.counts[decision.index()][truth.index()] += 1;
    }

    pub fn truth_count(&self, truth: Hypothesis) -> u64 {
        self.counts.iter().map(|row| row[truth.index()]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Relative frequency of deciding `decision` when `truth` holds. Zero for
    /// truths absent from the data.
    pub fn frequency(&self, decision: Hypothesis, truth: Hypothesis) -> f64 {
        let n = self.truth_count(truth);
        if n == 0 {
            0.0
        } else {
            self.counts[decision.index()][truth.index()] as f64 / n as f64
        }
    }

    /// Column-normalized frequency matrix.
    pub fn frequencies(&self) -> [[f64; 4]; 4] {
        let mut f = [[0.0; 4]; 4];
        for d in Hypothesis::ALL {
            for t in Hypothesis::ALL {
                f[d.index()][t.index()] = self.frequency(d, t);
            }
        }
        f
    }

    /// Probability of any interference decision (H2 or H3) under `truth`.
    pub fn alarm_rate(&self, truth: Hypothesis) -> f64 {
        self.frequency(Hypothesis::H2, truth) + self.frequency(Hypothesis::H3, truth)
    }
}

pub fn confusion(dataset: &[Sample], regions: &DecisionRegionGrid) -> Result<ConfusionMatrix> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut m = ConfusionMatrix::default();
    for s in dataset {
        m.record(classify(&s.measurement, regions), s.truth);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::priors::Theta;
    use crate::bayes::regions::{Axis, GridSpec, Provenance};
    use crate::monitors::{DetectorKind, Measurement};

    fn grid() -> DecisionRegionGrid {
        // One power bin, four distortion decades labeled H0..H3.
        let spec = GridSpec {
            power: Axis::new(0.0, 1.0, 1).unwrap(),
            log_distortion: Axis::new(0.0, 4.0, 4).unwrap(),
        };
        DecisionRegionGrid::new(
            spec,
            Hypothesis::ALL.to_vec(),
            Provenance {
                config_hash: String::new(),
                seed: 0,
                detector: DetectorKind::Pdml,
                taps: 11,
                clamped: 0,
            },
        )
        .unwrap()
    }

    fn s(decade: f64, truth: Hypothesis) -> Sample {
        Sample {
            measurement: Measurement {
                power_db: 0.5,
                distortion: 10f64.powf(decade),
                epoch: 0,
            },
            truth,
            theta: Theta::default(),
        }
    }

    #[test]
    fn hand_checked_counts() {
        use Hypothesis::*;
        let ds = [s(0.5, H0), s(0.5, H1), s(3.5, H2), s(2.5, H3)];
        let m = confusion(&ds, &grid()).unwrap();
        assert_eq!(m.counts[0][0], 1);
        assert_eq!(m.counts[0][1], 1);
        assert_eq!(m.counts[3][2], 1);
        assert_eq!(m.counts[2][3], 1);
        assert_eq!(m.total(), 4);
        assert_eq!(m.frequency(H0, H1), 1.0);
        assert_eq!(m.alarm_rate(H2), 1.0);
    }

    #[test]
    fn all_h0() {
        let ds: Vec<Sample> = (0..10).map(|_| s(0.2, Hypothesis::H0)).collect();
        let f = confusion(&ds, &grid()).unwrap().frequencies();
        assert_eq!([f[0][0], f[1][0], f[2][0], f[3][0]], [1.0, 0.0, 0.0, 0.0]);
        // Absent truths yield zero columns.
        assert_eq!(f[0][2], 0.0);
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(confusion(&[], &grid()), Err(Error::EmptyDataset)));
    }
}
